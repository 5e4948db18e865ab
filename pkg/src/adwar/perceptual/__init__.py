"""Generic perceptual library: container search over visual features,
fuzzy image template search, pluggable text recognition, and redirect-
following click resolution. The detectors build on these primitives."""

from .click import (  # noqa: F401
    ClickError,
    Fetcher,
    HttpFetcher,
    LinkResolution,
    RedirectLoopError,
    TransportError,
    UnresolvableLinkError,
    resolve_click,
)
from .containers import (  # noqa: F401
    ElementKind,
    Region,
    VisualQuery,
    find_containers,
    find_sidebars,
)
from .imagematch import (  # noqa: F401
    ImageTemplate,
    TemplateMatch,
    TemplateSizeError,
    match_image,
)
from .kernels import LANE as KERNEL_LANE  # noqa: F401
from .textrec import (  # noqa: F401
    GlyphTemplateRecognizer,
    MarkerLexicon,
    TextHit,
    TextRecognizer,
    recognize_text,
)
