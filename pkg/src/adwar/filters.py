"""EasyList-subset filter engine.

Two rule families are supported: resource-blocking rules matched against
request URLs (host-anchored ``||pattern`` and plain substring patterns) and
element-hiding rules (``domain###selector``) matched against snapshot
frames. Comments, ``$``-option rules, exceptions and anything else outside
the subset are skipped with a reason, never fatal: parsing a list is total.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from urllib.parse import urlsplit

from . import selectors
from .snapshot import PageSnapshot

__all__ = [
    "FilterError",
    "RuleKind",
    "Anchor",
    "FilterRule",
    "SkipMarker",
    "FilterList",
    "parse_filter_line",
    "parse_filter_list",
    "match_url",
    "match_elements",
    "registrable_domain",
]


class FilterError(ValueError):
    pass


class RuleKind(enum.Enum):
    RESOURCE_BLOCK = "resource-block"
    ELEMENT_HIDE = "element-hide"


class Anchor(enum.Enum):
    HOST = "host"  # ||pattern: starts at a host-label boundary
    SUBSTRING = "substring"


@dataclass(frozen=True)
class FilterRule:
    kind: RuleKind
    raw: str
    # resource-block fields
    anchor: Anchor | None = None
    pattern: str = ""
    # element-hide fields
    domain_scope: str = ""  # "" means global
    selector: selectors.SelectorExpr | None = None


@dataclass(frozen=True)
class SkipMarker:
    raw: str
    reason: str


@dataclass
class FilterList:
    source_name: str
    rules: list[FilterRule] = field(default_factory=list)
    skipped: list[SkipMarker] = field(default_factory=list)

    def __iter__(self):
        return iter(self.rules)


def parse_filter_line(line: str) -> FilterRule | SkipMarker:
    """Classify one line. Unsupported syntax yields a SkipMarker, never an
    exception."""
    raw = line.rstrip("\n")
    text = raw.strip()
    if not text:
        return SkipMarker(raw, "blank line")
    if text.startswith("!") or text.startswith("[Adblock"):
        return SkipMarker(raw, "comment")
    if text.startswith("@@"):
        return SkipMarker(raw, "exception rules unsupported")
    if "#@#" in text:
        return SkipMarker(raw, "element-hide exception rules unsupported")
    if "##" in text:
        scope, _, sel_text = text.partition("##")
        scope = scope.strip().lower()
        if "," in scope:
            return SkipMarker(raw, "multiple domain scopes unsupported")
        if scope.startswith("~"):
            return SkipMarker(raw, "negated domain scopes unsupported")
        try:
            sel = selectors.parse_selector(sel_text)
        except selectors.SelectorParseError as exc:
            return SkipMarker(raw, f"unsupported selector: {exc}")
        return FilterRule(
            kind=RuleKind.ELEMENT_HIDE, raw=raw, domain_scope=scope, selector=sel
        )
    if "$" in text:
        return SkipMarker(raw, "$-option rules unsupported")
    if text.startswith("/") and text.endswith("/") and len(text) > 1:
        return SkipMarker(raw, "regex rules unsupported")
    if text.startswith("||"):
        pattern = text[2:]
        if not pattern:
            return SkipMarker(raw, "empty host-anchored pattern")
        if "*" in pattern or "^" in pattern:
            return SkipMarker(raw, "wildcard/separator syntax unsupported")
        return FilterRule(
            kind=RuleKind.RESOURCE_BLOCK, raw=raw, anchor=Anchor.HOST, pattern=pattern
        )
    if text.startswith("|"):
        return SkipMarker(raw, "address-anchor rules unsupported")
    if "*" in text or "^" in text:
        return SkipMarker(raw, "wildcard/separator syntax unsupported")
    return FilterRule(
        kind=RuleKind.RESOURCE_BLOCK, raw=raw, anchor=Anchor.SUBSTRING, pattern=text
    )


def parse_filter_list(text: str, source_name: str = "<memory>") -> FilterList:
    flist = FilterList(source_name=source_name)
    for line in text.splitlines():
        out = parse_filter_line(line)
        if isinstance(out, FilterRule):
            flist.rules.append(out)
        else:
            flist.skipped.append(out)
    return flist


# ---------------------------------------------------------------------------
# URL matching


def _split_url(url: str) -> tuple[str, str]:
    """(lowercased host, everything after the host) for an absolute
    http(s) URL."""
    parts = urlsplit(url)
    if parts.scheme not in ("http", "https"):
        raise FilterError(f"not an absolute http(s) URL: {url!r}")
    if not parts.hostname:
        raise FilterError(f"URL has no host: {url!r}")
    rest = parts.path or ""
    if parts.query:
        rest += "?" + parts.query
    return parts.hostname.lower(), rest


def _host_anchored_match(pattern: str, url: str) -> bool:
    """``||p`` matches when p begins at a host-label boundary of the
    scheme-stripped URL. The host portion of p compares case-insensitively;
    anything after the first '/' compares exactly.
    """
    host, rest = _split_url(url)
    stripped = host + rest
    p_host, slash, p_rest = pattern.partition("/")
    norm_pattern = p_host.lower() + slash + p_rest
    boundaries = [0] + [i + 1 for i, ch in enumerate(host) if ch == "."]
    for b in boundaries:
        candidate = stripped[b:]
        if candidate.startswith(norm_pattern):
            # A pattern ending inside the host must stop at a full label
            # unless it ends with '.' (so ||ad. is a prefix match).
            if not slash and len(norm_pattern) < len(host) - b:
                nxt = candidate[len(norm_pattern)]
                if nxt not in (".", "/") and not norm_pattern.endswith("."):
                    continue
            return True
    return False


def match_url(rules: FilterList, url: str) -> tuple[bool, FilterRule | None]:
    """First matching resource-block rule wins; element-hide rules are
    ignored here. Raises FilterError on malformed URLs."""
    host, rest = _split_url(url)  # validates eagerly
    for rule in rules.rules:
        if rule.kind is not RuleKind.RESOURCE_BLOCK:
            continue
        if rule.anchor is Anchor.HOST:
            if _host_anchored_match(rule.pattern, url):
                return True, rule
        else:
            if rule.pattern in url:
                return True, rule
    return False, None


# ---------------------------------------------------------------------------
# Element hiding


# Deliberately tiny public-suffix subset; enough for desk-scale lists and
# swappable for a real PSL if needed.
_MULTI_PART_SUFFIXES = {
    "co.uk", "org.uk", "ac.uk", "gov.uk",
    "com.au", "net.au", "org.au",
    "co.jp", "ne.jp", "or.jp",
    "com.br", "com.cn", "com.mx", "co.in", "co.nz", "com.sg", "com.tr",
}


def registrable_domain(host: str) -> str:
    labels = host.lower().strip(".").split(".")
    if len(labels) <= 2:
        return ".".join(labels)
    if ".".join(labels[-2:]) in _MULTI_PART_SUFFIXES:
        return ".".join(labels[-3:])
    return ".".join(labels[-2:])


def _scope_matches(scope: str, frame_url: str) -> bool:
    if not scope:
        return True
    host = (urlsplit(frame_url).hostname or "").lower()
    if not host:
        return False
    reg = registrable_domain(host)
    # scope must sit at or below the frame's registrable domain, and the
    # frame host must sit at or below the scope.
    scope_in_site = scope == reg or scope.endswith("." + reg)
    host_in_scope = host == scope or host.endswith("." + scope)
    return scope_in_site and host_in_scope


def match_elements(rules: FilterList, snap: PageSnapshot) -> dict[int, set[int]]:
    """Per-frame node ids hidden by element-hiding rules.

    Union over all in-scope rules; only the matched container is reported
    (hiding applies to it, not to each descendant), and the document root is
    never hidden.
    """
    hidden: dict[int, set[int]] = {}
    for fi, frame in enumerate(snap.frames):
        acc: set[int] = set()
        for rule in rules.rules:
            if rule.kind is not RuleKind.ELEMENT_HIDE:
                continue
            if not _scope_matches(rule.domain_scope, frame.url):
                continue
            acc |= selectors.match_selector(frame, rule.selector)
        acc.discard(frame.root_id)
        hidden[fi] = acc
    return hidden
