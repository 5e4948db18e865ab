"""Synthetic labeled-snapshot generator.

The live web can't be replayed in tests, so evaluation runs against
generated pages that plant the same structures the detectors target:
bordered feed items and sidebar items with "Sponsored" text (as DOM text
or rendered into pixels) and disclosure links, ad iframes whose creatives
carry the disclosure icon composited at the top-right, and organic decoys
with identical geometry but no markers. Every planted item carries ground
truth: frames get the is_ad_iframe label, feed candidates get a
data-ad-truth attribute.

Perturbation knobs model publisher pushback: pixel noise on creatives,
marker dropout (non-compliant ads that stay labeled as ads), and markup
randomization (ids/classes shuffled while pixels, geometry and links stay
put — exactly the move that defeats filter lists but not perceptual
detection). Output is a pure function of (spec, seed).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .assets import bundled_font, asset_path
from .detectors import AD_TRUTH_ATTR
from .perceptual.pixels import from_rgba_array, load_png, to_rgba_array
from .perceptual.textrec import render_word
from .snapshot import (
    DomNode,
    ImageBitmap,
    LayoutBox,
    PageSnapshot,
    RequestRecord,
    ScriptRecord,
    StyleMap,
    build_frame,
)

__all__ = ["CorpusSpec", "generate_snapshot", "generate_corpus"]

FRAME_DOC_HEIGHT = 2400
FEED_X = 250
FEED_WIDTH = 500
SIDEBAR_WIDTH = 300
SIDEBAR_ITEM_WIDTH = 280
AD_CREATIVE_SIZE = (300, 250)

_ORGANIC_SNIPPETS = (
    "Local council approves new bridge design after review",
    "Community garden volunteers celebrate record harvest",
    "Library announces summer reading program for students",
    "Weekend weather brings sunshine and light winds",
    "Museum opens an exhibition about maritime history",
    "City marathon route changes announced for next spring",
)


@dataclass(frozen=True)
class CorpusSpec:
    count: int = 10
    viewport: tuple[int, int] = (1280, 900)
    feed_slots: int = 6
    feed_ad_density: float = 0.5
    sidebar_slots: int = 3
    sidebar_ad_density: float = 0.34
    iframes_per_page: int = 5
    adchoices_density: float = 0.6
    noise_amplitude: int = 0
    markup_randomization: bool = False
    marker_dropout: float = 0.0
    image_text_fraction: float = 0.3  # sidebar ads with pixel-rendered text

    def __post_init__(self):
        for name in ("feed_ad_density", "sidebar_ad_density", "adchoices_density",
                     "marker_dropout", "image_text_fraction"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        if self.noise_amplitude < 0 or self.noise_amplitude > 255:
            raise ValueError("noise_amplitude must be in [0, 255]")


class _NodeFactory:
    def __init__(self):
        self.nodes: list[DomNode] = []
        self._next = 1

    def add(self, tag: str, *, attrs=(), text="", children=(), layout=None,
            style=None, image_ref=None, handlers=frozenset()) -> int:
        nid = self._next
        self._next += 1
        self.nodes.append(
            DomNode(
                node_id=nid,
                tag=tag,
                attrs=tuple(attrs),
                text=text,
                children=tuple(children),
                layout=layout or LayoutBox(),
                style=style or StyleMap(),
                image_ref=image_ref,
                handlers=handlers,
            )
        )
        return nid

    def set_children(self, nid: int, children: tuple[int, ...]) -> None:
        for i, n in enumerate(self.nodes):
            if n.node_id == nid:
                from dataclasses import replace

                self.nodes[i] = replace(n, children=children)
                return
        raise KeyError(nid)


def _rand_token(rng: random.Random) -> str:
    return "x" + "".join(rng.choice("0123456789abcdef") for _ in range(10))


def _noise(arr: np.ndarray, amplitude: int, rng: random.Random) -> np.ndarray:
    # seed drawn unconditionally so the noise knob never shifts the rest of
    # the generation stream (quiet and noisy corpora stay aligned)
    seed = rng.getrandbits(32)
    if amplitude <= 0:
        return arr
    np_rng = np.random.default_rng(seed)
    noise = np_rng.integers(-amplitude, amplitude + 1, size=arr.shape[:2] + (3,))
    out = arr.astype(np.int16)
    out[:, :, :3] += noise.astype(np.int16)
    return np.clip(out, 0, 255).astype(np.uint8)


def _draw_creative(
    rng: random.Random,
    with_icon: bool,
    icon: ImageBitmap,
    noise_amplitude: int,
) -> ImageBitmap:
    """A 300x250 ad creative: flat background, a couple of content blocks,
    and optionally the disclosure icon in the top-right corner."""
    w, h = AD_CREATIVE_SIZE
    palette = [(236, 240, 241), (245, 234, 214), (224, 236, 244), (240, 224, 236)]
    bg = palette[rng.randrange(len(palette))]
    arr = np.empty((h, w, 4), dtype=np.uint8)
    arr[:, :] = (*bg, 255)
    for _ in range(rng.randint(2, 4)):
        x0 = rng.randint(8, w // 2)
        y0 = rng.randint(40, h - 60)
        bw = rng.randint(40, w - x0 - 8)
        bh = rng.randint(16, 48)
        shade = tuple(max(0, c - rng.randint(30, 90)) for c in bg)
        arr[y0 : y0 + bh, x0 : x0 + bw] = (*shade, 255)
    if with_icon:
        ix = w - icon.width - 2
        iy = 2
        arr[iy : iy + icon.height, ix : ix + icon.width] = to_rgba_array(icon)
    arr = _noise(arr, noise_amplitude, rng)
    return from_rgba_array(arr)


def _draw_text_banner(rng: random.Random, text: str, noise_amplitude: int) -> ImageBitmap:
    """Sidebar banner with the disclosure text rendered in the bundled
    font (the image-rendered-disclosure case OCR has to handle)."""
    font = bundled_font()
    word = render_word(font, text, scale=1)
    w, h = SIDEBAR_ITEM_WIDTH, 90
    arr = np.full((h, w, 4), 255, dtype=np.uint8)
    band = tuple(rng.randint(150, 220) for _ in range(3))
    arr[40:78, 8 : w - 8] = (*band, 255)
    gray = np.stack([word] * 3 + [np.full_like(word, 255)], axis=-1)
    x0, y0 = 10, 8
    arr[y0 : y0 + word.shape[0], x0 : x0 + word.shape[1]] = gray
    arr = _noise(arr, noise_amplitude, rng)
    return from_rgba_array(arr)


def _feed_item(
    f: _NodeFactory,
    rng: random.Random,
    markup_rng: random.Random,
    y: float,
    *,
    is_ad: bool,
    marker_dropped: bool,
    randomize_markup: bool,
    index: int,
) -> int:
    """One 500px bordered feed item; ads carry a Sponsored text node and a
    disclosure link unless their markers were dropped. Markup identity comes
    from its own rng stream so randomizing it can never shift ad placement,
    pixels or text."""
    if randomize_markup:
        css_class, dom_id = _rand_token(markup_rng), _rand_token(markup_rng)
    elif is_ad:
        css_class, dom_id = "sponsored-post", f"feedAd{index}"
    else:
        css_class, dom_id = "post", f"post{index}"
    box = LayoutBox(FEED_X, y, FEED_WIDTH, 200, visible=True)
    style = StyleMap(
        display="block",
        background_color=(255, 255, 255, 255),
        border_left_width=1.0,
        border_right_width=1.0,
    )
    children = []
    title = f.add(
        "h2",
        text=_ORGANIC_SNIPPETS[rng.randrange(len(_ORGANIC_SNIPPETS))],
        layout=LayoutBox(box.x + 12, y + 10, FEED_WIDTH - 24, 24, True),
    )
    children.append(title)
    if is_ad and not marker_dropped:
        label = f.add(
            "span",
            attrs=(("class", _rand_token(markup_rng) if randomize_markup else "label"),),
            layout=LayoutBox(box.x + 12, y + 40, 70, 14, True),
        )
        label_text = f.add(
            "#text", text="Sponsored",
            layout=LayoutBox(box.x + 12, y + 40, 70, 14, True),
        )
        f.set_children(label, (label_text,))
        link = f.add(
            "a",
            attrs=(("href", "https://www.facebook.com/ads/about/"),),
            text="Why am I seeing this?",
            layout=LayoutBox(box.x + 12, y + 58, 140, 14, True),
        )
        children.extend([label, link])
    body_text = f.add(
        "p",
        text=_ORGANIC_SNIPPETS[rng.randrange(len(_ORGANIC_SNIPPETS))],
        layout=LayoutBox(box.x + 12, y + 80, FEED_WIDTH - 24, 100, True),
    )
    children.append(body_text)
    return f.add(
        "div",
        attrs=(
            ("id", dom_id),
            ("class", css_class),
            (AD_TRUTH_ATTR, "1" if is_ad else "0"),
        ),
        children=tuple(children),
        layout=box,
        style=style,
    )


def _sidebar_item(
    f: _NodeFactory,
    rng: random.Random,
    markup_rng: random.Random,
    x: float,
    y: float,
    *,
    is_ad: bool,
    marker_dropped: bool,
    randomize_markup: bool,
    use_image_text: bool,
    image_id: str | None,
    index: int,
) -> int:
    css_class = _rand_token(markup_rng) if randomize_markup else (
        "rail-promo" if is_ad else "rail-widget"
    )
    box = LayoutBox(x, y, SIDEBAR_ITEM_WIDTH, 90, visible=True)
    children = []
    if is_ad and not marker_dropped:
        if use_image_text and image_id is not None:
            img = f.add("img", image_ref=image_id, layout=box)
            children.append(img)
        else:
            txt = f.add(
                "#text", text="Sponsored",
                layout=LayoutBox(x + 8, y + 6, 70, 14, True),
            )
            children.append(txt)
        link = f.add(
            "a",
            attrs=(("href", "https://www.aboutads.info/choices/"),),
            text="Ad info",
            layout=LayoutBox(x + 8, y + 66, 60, 14, True),
        )
        children.append(link)
    else:
        txt = f.add(
            "p",
            text=_ORGANIC_SNIPPETS[rng.randrange(len(_ORGANIC_SNIPPETS))],
            layout=LayoutBox(x + 8, y + 6, SIDEBAR_ITEM_WIDTH - 16, 70, True),
        )
        children.append(txt)
    return f.add(
        "div",
        attrs=(
            ("id", _rand_token(markup_rng) if randomize_markup else f"rail{index}"),
            ("class", css_class),
            (AD_TRUTH_ATTR, "1" if is_ad else "0"),
        ),
        children=tuple(children),
        layout=box,
        style=StyleMap(display="block"),
    )


def _ad_frame(url: str, creative_id: str, is_ad: bool):
    """An iframe document: html > body > img covering the 300x250 frame."""
    f = _NodeFactory()
    w, h = AD_CREATIVE_SIZE
    img = f.add("img", image_ref=creative_id, layout=LayoutBox(0, 0, w, h, True))
    body = f.add("body", children=(img,), layout=LayoutBox(0, 0, w, h, True))
    root = f.add("html", children=(body,), layout=LayoutBox(0, 0, w, h, True))
    _ = root
    return build_frame(url, f.nodes, is_ad_iframe=is_ad)


def generate_snapshot(
    spec: CorpusSpec,
    rng: random.Random,
    index: int,
    feed_drop_count: int = 0,
    sidebar_drop_count: int = 0,
    iframe_drop_count: int = 0,
) -> PageSnapshot:
    """One labeled page. The *_drop_count arguments say how many of this
    page's planted ads lose their markers (they stay labeled as ads)."""
    icon = load_png(asset_path("adchoices_icon.png"))
    vw, _ = spec.viewport
    f = _NodeFactory()
    images: dict[str, ImageBitmap] = {}
    frames = []
    # separate stream: markup randomization must not disturb placement
    markup_rng = random.Random(0x6D61726B ^ (index * 2654435761))

    def plant(slots: int, density: float, drop_count: int) -> tuple[set[int], set[int]]:
        n_ads = int(round(slots * density))
        ad_slots = set(rng.sample(range(slots), n_ads)) if n_ads else set()
        drops = set(rng.sample(sorted(ad_slots), min(drop_count, n_ads))) \
            if drop_count else set()
        return ad_slots, drops

    feed_ad_slots, feed_drops = plant(
        spec.feed_slots, spec.feed_ad_density, feed_drop_count)
    side_ad_slots, sidebar_drops = plant(
        spec.sidebar_slots, spec.sidebar_ad_density, sidebar_drop_count)
    ad_iframe_slots, iframe_drops = plant(
        spec.iframes_per_page, spec.adchoices_density, iframe_drop_count)

    feed_children = []
    feed_ad_counter = 0
    for slot in range(spec.feed_slots):
        is_ad = slot in feed_ad_slots
        feed_children.append(
            _feed_item(
                f, rng, markup_rng, 80 + slot * 220,
                is_ad=is_ad,
                marker_dropped=is_ad and slot in feed_drops,
                randomize_markup=spec.markup_randomization,
                index=feed_ad_counter if is_ad else slot,
            )
        )
        if is_ad:
            feed_ad_counter += 1
    feed_col = f.add(
        "div",
        attrs=(("id", "feed"),),
        children=tuple(feed_children),
        layout=LayoutBox(FEED_X, 60, FEED_WIDTH, FRAME_DOC_HEIGHT - 120, True),
    )

    sidebar_children = []
    side_x = vw - SIDEBAR_WIDTH
    for slot in range(spec.sidebar_slots):
        is_ad = slot in side_ad_slots
        use_image = is_ad and rng.random() < spec.image_text_fraction
        image_id = None
        if use_image and not (slot in sidebar_drops):
            image_id = f"banner{index}_{slot}"
            images[image_id] = _draw_text_banner(rng, "Sponsored", spec.noise_amplitude)
        sidebar_children.append(
            _sidebar_item(
                f, rng, markup_rng, side_x + 10, 90 + slot * 120,
                is_ad=is_ad,
                marker_dropped=is_ad and slot in sidebar_drops,
                randomize_markup=spec.markup_randomization,
                use_image_text=use_image,
                image_id=image_id,
                index=slot,
            )
        )
    rail = f.add(
        "div",
        attrs=(("id", "rail"), ("class", "rail")),
        children=tuple(sidebar_children),
        layout=LayoutBox(side_x, 0, SIDEBAR_WIDTH, FRAME_DOC_HEIGHT * 0.7, True),
    )

    iframe_nodes = []
    for slot in range(spec.iframes_per_page):
        is_ad = slot in ad_iframe_slots
        creative_id = f"creative{index}_{slot}"
        with_icon = is_ad and slot not in iframe_drops
        images[creative_id] = _draw_creative(rng, with_icon, icon, spec.noise_amplitude)
        iframe_nodes.append(
            f.add(
                "iframe",
                attrs=(("src", f"https://adnet{slot}.example/frame"),),
                layout=LayoutBox(
                    FEED_X + (slot % 2) * 320,
                    1500 + (slot // 2) * 270,
                    *AD_CREATIVE_SIZE,
                    True,
                ),
            )
        )
        frames.append(
            _ad_frame(f"https://adnet{slot}.example/frame{index}", creative_id, is_ad)
        )

    body = f.add(
        "body",
        children=(feed_col, rail, *iframe_nodes),
        layout=LayoutBox(0, 0, vw, FRAME_DOC_HEIGHT, True),
    )
    head = f.add("head", layout=LayoutBox(0, 0, 0, 0, False))
    root = f.add(
        "html",
        children=(head, body),
        layout=LayoutBox(0, 0, vw, FRAME_DOC_HEIGHT, True),
    )
    _ = root
    top = build_frame(f"https://site{index}.example/page", f.nodes)

    scripts = (
        ScriptRecord(
            script_id="inline0",
            source="inline",
            text="document.addEventListener('DOMContentLoaded', init);",
        ),
    )
    requests = (
        RequestRecord(f"https://site{index}.example/page", 0, "document"),
        RequestRecord(f"https://static{index}.com/doubleclick/ad.js", 0, "script"),
        RequestRecord(f"https://cdn{index}.example/app.js", 0, "script"),
    )
    return PageSnapshot(
        url=top.url,
        viewport=spec.viewport,
        frames=(top, *frames),
        images=images,
        scripts=scripts,
        requests=requests,
    )


def _spread_drops(per_page: int, count: int, rate: float) -> list[int]:
    """Corpus-wide drop budget floor(rate * planted), spread over pages so
    the realized dropout never exceeds the knob."""
    total = per_page * count
    n_drop = math.floor(rate * total)
    base, extra = divmod(n_drop, count)
    return [base + (1 if i < extra else 0) for i in range(count)]


def generate_corpus(spec: CorpusSpec, seed: int) -> list[tuple[str, PageSnapshot]]:
    """Deterministic corpus: same (spec, seed) gives byte-identical
    serializations."""
    rng = random.Random(seed)
    n_feed = int(round(spec.feed_slots * spec.feed_ad_density))
    n_side = int(round(spec.sidebar_slots * spec.sidebar_ad_density))
    n_ifr = int(round(spec.iframes_per_page * spec.adchoices_density))
    feed_drops = _spread_drops(n_feed, spec.count, spec.marker_dropout)
    side_drops = _spread_drops(n_side, spec.count, spec.marker_dropout)
    ifr_drops = _spread_drops(n_ifr, spec.count, spec.marker_dropout)

    out = []
    for i in range(spec.count):
        page_rng = random.Random(rng.getrandbits(64))
        snap = generate_snapshot(
            spec,
            page_rng,
            i,
            feed_drop_count=feed_drops[i],
            sidebar_drop_count=side_drops[i],
            iframe_drop_count=ifr_drops[i],
        )
        out.append((f"snapshot_{i:03d}.json", snap))
    return out
