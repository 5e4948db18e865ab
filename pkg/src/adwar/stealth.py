"""Rootkit-style stealth planning.

Hiding that ads are blocked takes three coordinated artifacts, all produced
here as data rather than injected code:

* an overlay plan: a new true root whose two children are the original
  page subtree and a separate subtree of whitespace boxes positioned
  exactly over the ads (keeping overlays out of the publisher subtree is
  what makes them hideable);
* a rewritten stylesheet: every publisher rule is scoped so it keeps
  applying inside the demoted page subtree and can never style the
  overlays;
* an interception manifest: the host-API members whose behavior must be
  replaced so page scripts can never traverse to the true root or the
  overlay subtree, and so the demoted root still looks like the document
  element.

verify_stealth replays the manifest as a view over the transformed
snapshot and checks that the publisher-visible world is indistinguishable
from the original page; analyze_detectability plays the known inspection
probes against the manifest and grades what an adversary could learn.
"""

from __future__ import annotations

import enum
import random
import re
from dataclasses import dataclass, field, replace

from . import selectors
from .snapshot import (
    DomNode,
    FrameInfo,
    LayoutBox,
    PageSnapshot,
    StyleMap,
    build_frame,
)

__all__ = [
    "StealthError",
    "OverlayEntry",
    "OverlayPlan",
    "plan_overlays",
    "CssRule",
    "parse_stylesheet",
    "RewrittenStylesheet",
    "rewrite_css",
    "ManifestEntry",
    "InterceptionManifest",
    "build_interception_manifest",
    "StealthVerdict",
    "verify_stealth",
    "ProbeKind",
    "StealthProbe",
    "Outcome",
    "DetectabilityVerdict",
    "analyze_detectability",
    "appendix_probe_set",
    "GECKO_PROFILE",
]


class StealthError(ValueError):
    pass


OVERLAY_Z_INDEX = 2147483647
# Default overlay paint; "whitespace" taken literally, configurable for
# pages with non-white canvases.
DEFAULT_OVERLAY_COLOR = (255, 255, 255, 255)


def _token(rng: random.Random) -> str:
    # 16 hex chars; first drawn from a-f so the token is always a valid
    # CSS identifier (identifiers must not start with a digit).
    first = rng.choice("abcdef")
    rest = "".join(rng.choice("0123456789abcdef") for _ in range(15))
    return first + rest


# ---------------------------------------------------------------------------
# Overlay planning


@dataclass(frozen=True)
class OverlayEntry:
    overlay_node_id: int
    ad_node_id: int
    box: LayoutBox


@dataclass(frozen=True)
class OverlayPlan:
    fake_root_id: str  # id token placed on the demoted original root
    fake_body_class: str  # class token placed on the original body
    true_root_id: int  # node id of the new true root
    overlay_root_id: int
    publisher_root_id: int  # node id of the demoted original root
    body_node_id: int | None
    overlays: tuple[OverlayEntry, ...]
    overlay_rules: tuple[str, ...]
    rewritten_stylesheet: tuple[str, ...] = ()
    stylesheet_warnings: tuple[str, ...] = ()
    # attribute values the interception layer must spoof back
    spoofed_attrs: tuple[tuple[int, str, str], ...] = ()
    update_policy: str = "replan-on-snapshot-mutation"

    def overlay_ids(self) -> set[int]:
        return {self.overlay_root_id} | {o.overlay_node_id for o in self.overlays}

    def spoofed_value(self, node_id: int, attr: str) -> str | None:
        for nid, name, value in self.spoofed_attrs:
            if nid == node_id and name == attr:
                return value
        return None

    def to_dict(self) -> dict:
        return {
            "fake_root_id": self.fake_root_id,
            "fake_body_class": self.fake_body_class,
            "true_root_id": self.true_root_id,
            "overlay_root_id": self.overlay_root_id,
            "publisher_root_id": self.publisher_root_id,
            "body_node_id": self.body_node_id,
            "overlays": [
                {
                    "overlay_node": o.overlay_node_id,
                    "ad_node": o.ad_node_id,
                    "box": [o.box.x, o.box.y, o.box.width, o.box.height],
                }
                for o in self.overlays
            ],
            "overlay_rules": list(self.overlay_rules),
            "rewritten_stylesheet": list(self.rewritten_stylesheet),
            "stylesheet_warnings": list(self.stylesheet_warnings),
            "update_policy": self.update_policy,
        }


def _with_attr(node: DomNode, name: str, value: str) -> DomNode:
    attrs = [(k, v) for k, v in node.attrs if k != name]
    attrs.append((name, value))
    return replace(node, attrs=tuple(attrs))


def plan_overlays(
    snap: PageSnapshot,
    ads: list[int],
    stylesheet: str | list["CssRule"] | None = None,
    rng: random.Random | None = None,
    overlay_color: tuple[int, int, int, int] = DEFAULT_OVERLAY_COLOR,
) -> tuple[OverlayPlan, PageSnapshot]:
    """Build the overlay plan and the transformed snapshot.

    The transformed top frame gets a fresh true root with two children:
    the original subtree (its root now carries the fake-root id token, its
    body the fake-body class token) and the overlay subtree, one
    whitespace box per ad with geometry copied from the ad.
    """
    rng = rng or random.Random()
    frame = snap.top_frame
    for nid in ads:
        if nid not in frame.nodes:
            raise StealthError(f"ad node {nid} not found in top frame")

    fake_root_id = _token(rng)
    fake_body_class = _token(rng)
    next_id = max(frame.nodes) + 1
    true_root_id = next_id
    overlay_root_id = next_id + 1
    overlay_ids = list(range(next_id + 2, next_id + 2 + len(ads)))

    spoofed: list[tuple[int, str, str]] = []
    new_nodes: list[DomNode] = []
    body_id: int | None = None
    for node in frame.nodes.values():
        if node.node_id == frame.root_id:
            spoofed.append((node.node_id, "id", node.attr("id") or ""))
            node = _with_attr(node, "id", fake_root_id)
        new_nodes.append(node)
    # the original body gets the class token (CSS scoping needs a class,
    # not an id, to keep selector specificity close to the original)
    for nid in frame.subtree_ids(frame.root_id):
        n = frame.node(nid)
        if n.tag == "body":
            body_id = nid
            break
    if body_id is not None:
        old = frame.node(body_id).attr("class") or ""
        spoofed.append((body_id, "class", old))
        merged = (old + " " + fake_body_class).strip()
        new_nodes = [
            _with_attr(n, "class", merged) if n.node_id == body_id else n
            for n in new_nodes
        ]

    overlays = []
    overlay_nodes = []
    overlay_rules = []
    for oid, ad in zip(overlay_ids, ads):
        box = frame.node(ad).layout
        obox = LayoutBox(box.x, box.y, box.width, box.height, visible=True)
        attr_id = f"ov-{fake_root_id}-{oid}"
        overlay_nodes.append(
            DomNode(
                node_id=oid,
                tag="div",
                attrs=(("id", attr_id),),
                layout=obox,
                style=StyleMap(
                    position="absolute",
                    background_color=overlay_color,
                    z_index=OVERLAY_Z_INDEX,
                ),
            )
        )
        overlays.append(OverlayEntry(overlay_node_id=oid, ad_node_id=ad, box=obox))
        overlay_rules.append(
            f"#{attr_id} {{ position: absolute; left: {box.x:g}px; top: {box.y:g}px; "
            f"width: {box.width:g}px; height: {box.height:g}px; "
            f"background-color: #ffffff; z-index: {OVERLAY_Z_INDEX}; }}"
        )

    root_box = frame.root.layout
    overlay_root = DomNode(
        node_id=overlay_root_id,
        tag="div",
        attrs=(("id", f"ov-{fake_root_id}"),),
        children=tuple(overlay_ids),
        layout=LayoutBox(0, 0, root_box.width, root_box.height, visible=True),
        style=StyleMap(position="absolute"),
    )
    true_root = DomNode(
        node_id=true_root_id,
        tag="html",
        children=(frame.root_id, overlay_root_id),
        layout=root_box,
    )
    new_nodes.extend([overlay_root, true_root, *overlay_nodes])
    new_frame = build_frame(frame.url, new_nodes, frame.is_ad_iframe)

    plan = OverlayPlan(
        fake_root_id=fake_root_id,
        fake_body_class=fake_body_class,
        true_root_id=true_root_id,
        overlay_root_id=overlay_root_id,
        publisher_root_id=frame.root_id,
        body_node_id=body_id,
        overlays=tuple(overlays),
        overlay_rules=tuple(overlay_rules),
        spoofed_attrs=tuple(spoofed),
    )
    if stylesheet is not None:
        rewritten = rewrite_css(stylesheet, plan)
        plan = replace(
            plan,
            rewritten_stylesheet=tuple(rewritten.rules),
            stylesheet_warnings=tuple(rewritten.warnings),
        )
    return plan, snap.with_top_frame(new_frame)


# ---------------------------------------------------------------------------
# CSS rewriting


@dataclass(frozen=True)
class CssRule:
    selectors: tuple[str, ...]
    declarations: str
    raw: str


_CSS_COMMENT_RE = re.compile(r"/\*.*?\*/", re.DOTALL)


def parse_stylesheet(text: str) -> list[CssRule]:
    """Minimal flat-CSS block splitter (no at-rules, no nesting). Blocks
    that don't split cleanly come back with empty selectors and are later
    passed through verbatim."""
    text = _CSS_COMMENT_RE.sub("", text)
    rules = []
    pos = 0
    while True:
        open_brace = text.find("{", pos)
        if open_brace < 0:
            break
        close_brace = text.find("}", open_brace)
        if close_brace < 0:
            break
        head = text[pos:open_brace].strip()
        body = text[open_brace + 1 : close_brace].strip()
        raw = text[pos : close_brace + 1].strip()
        if head.startswith("@"):
            rules.append(CssRule(selectors=(), declarations=body, raw=raw))
        else:
            sels = tuple(s.strip() for s in head.split(",") if s.strip())
            rules.append(CssRule(selectors=sels, declarations=body, raw=raw))
        pos = close_brace + 1
    return rules


@dataclass
class RewrittenStylesheet:
    rules: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def text(self) -> str:
        return "\n".join(self.rules) + ("\n" if self.rules else "")


def _rewrite_selector(sel_text: str, plan: OverlayPlan) -> str:
    """Scope one selector to the publisher subtree.

    html-leading selectors have that token replaced by the fake-root id,
    body-leading ones by the fake-body class; everything else is prefixed
    with the fake-root id and a descendant combinator. Raises
    SelectorParseError for selectors outside the supported grammar.
    """
    expr = selectors.parse_selector(sel_text)
    first = expr.compounds[0]
    if first.tag == "html":
        if first.ident is not None:
            raise selectors.SelectorParseError(
                f"cannot scope {sel_text!r}: id term on the html token"
            )
        new_first = replace(first, tag=None, ident=plan.fake_root_id)
        expr = replace(expr, compounds=(new_first,) + expr.compounds[1:])
        return str(expr)
    if first.tag == "body":
        new_first = replace(
            first, tag=None, classes=(plan.fake_body_class,) + first.classes
        )
        expr = replace(expr, compounds=(new_first,) + expr.compounds[1:])
        return str(expr)
    return f"#{plan.fake_root_id} {expr}"


def rewrite_css(stylesheet: str | list[CssRule], plan: OverlayPlan) -> RewrittenStylesheet:
    """Scope every publisher rule to the publisher subtree; declarations
    are untouched. Unparseable rules pass through verbatim with a warning
    (breaking page styling would itself give the blocker away, so rewriting
    fails open)."""
    if isinstance(stylesheet, str):
        rules = parse_stylesheet(stylesheet)
    else:
        rules = list(stylesheet)
    out = RewrittenStylesheet()
    for rule in rules:
        if not rule.selectors:
            out.rules.append(rule.raw)
            out.warnings.append(f"passed through unparseable rule: {rule.raw[:60]!r}")
            continue
        new_sels = []
        failed = False
        for sel in rule.selectors:
            try:
                new_sels.append(_rewrite_selector(sel, plan))
            except selectors.SelectorParseError as exc:
                out.warnings.append(f"passed through {sel!r}: {exc}")
                failed = True
                break
        if failed:
            out.rules.append(rule.raw)
        else:
            out.rules.append(f"{', '.join(new_sels)} {{ {rule.declarations} }}")
    return out


# ---------------------------------------------------------------------------
# Interception manifest


class Host(enum.Enum):
    DOCUMENT = "document"
    FAKE_HTML = "fake-html"
    HEAD = "head"
    FAKE_BODY = "fake-body"
    PROTOTYPE = "prototype"


class Behavior(enum.Enum):
    REDIRECT = "redirect-to-original-root"
    FILTER = "filter-overlay-subtree"
    SPOOF = "value-spoof"


@dataclass(frozen=True)
class ManifestEntry:
    host: Host
    member: str
    kind: str  # property | function
    behavior: Behavior
    tier: str  # script-level | source-modification
    experimental: bool = False

    @property
    def descriptor_visible(self) -> bool:
        # Script-level property interception converts a plain property into
        # an accessor, which getOwnPropertyDescriptor can see.
        return self.kind == "property" and self.tier == "script-level"

    def to_dict(self) -> dict:
        return {
            "host": self.host.value,
            "member": self.member,
            "kind": self.kind,
            "behavior": self.behavior.value,
            "tier": self.tier,
            "descriptor_visible": self.descriptor_visible,
            "experimental": self.experimental,
        }


# The six member groups of the gecko host-API profile. Which document
# accessors redirect vs filter: properties that would surface the true
# root get redirected to the demoted original root; enumerating/query
# members get filtered so overlay nodes never appear in results.
GECKO_PROFILE = {
    "document-properties": (
        ("childNodes", Behavior.REDIRECT),
        ("children", Behavior.REDIRECT),
        ("documentElement", Behavior.REDIRECT),
        ("firstElementChild", Behavior.REDIRECT),
        ("lastChild", Behavior.REDIRECT),
        ("lastElementChild", Behavior.REDIRECT),
        ("body", Behavior.REDIRECT),
        ("scrollingElement", Behavior.REDIRECT),
        ("all", Behavior.FILTER),
    ),
    "document-functions": (
        ("getElementById", Behavior.FILTER),
        ("getElementsByClassName", Behavior.FILTER),
        ("getElementsByTagName", Behavior.FILTER),
        ("getElementsByTagNameNS", Behavior.FILTER),
        ("querySelector", Behavior.FILTER),
        ("querySelectorAll", Behavior.FILTER),
        ("elementFromPoint", Behavior.FILTER),  # needs experimental sibling API
    ),
    "fake-html-properties": (
        ("tagName", Behavior.SPOOF),
        ("nodeName", Behavior.SPOOF),
        ("localName", Behavior.SPOOF),
        ("parentNode", Behavior.SPOOF),
        ("parentElement", Behavior.SPOOF),
        ("firstChild", Behavior.SPOOF),
        ("firstElementChild", Behavior.SPOOF),
        ("childElementCount", Behavior.SPOOF),
        ("id", Behavior.SPOOF),
        ("outerHTML", Behavior.SPOOF),
        ("innerHTML", Behavior.SPOOF),
    ),
    "fake-html-functions": (
        ("insertBefore", Behavior.REDIRECT),
    ),
    "head-properties": (
        ("nextElementSibling", Behavior.REDIRECT),
        ("nextSibling", Behavior.REDIRECT),
        ("parentElement", Behavior.REDIRECT),
        ("parentNode", Behavior.REDIRECT),
    ),
    "fake-body-properties": (
        ("tagName", Behavior.SPOOF),
        ("nodeName", Behavior.SPOOF),
        ("localName", Behavior.SPOOF),
        ("previousElementSibling", Behavior.SPOOF),
        ("previousSibling", Behavior.SPOOF),
        ("id", Behavior.SPOOF),
        ("className", Behavior.SPOOF),
        ("outerHTML", Behavior.SPOOF),
    ),
}

_GROUP_HOST_KIND = {
    "document-properties": (Host.DOCUMENT, "property"),
    "document-functions": (Host.DOCUMENT, "function"),
    "fake-html-properties": (Host.FAKE_HTML, "property"),
    "fake-html-functions": (Host.FAKE_HTML, "function"),
    "head-properties": (Host.HEAD, "property"),
    "fake-body-properties": (Host.FAKE_BODY, "property"),
}


@dataclass(frozen=True)
class InterceptionManifest:
    profile: str
    entries: tuple[ManifestEntry, ...]
    tier: str = "script-level"
    tostring_patch: str = "prototype"  # or "per-function"

    def entry(self, host: Host, member: str) -> ManifestEntry | None:
        for e in self.entries:
            if e.host is host and e.member == member:
                return e
        return None

    def without(self, host: Host, member: str) -> "InterceptionManifest":
        """Debug helper: drop one entry (used to demonstrate leaks)."""
        kept = tuple(e for e in self.entries if not (e.host is host and e.member == member))
        if len(kept) == len(self.entries):
            raise KeyError(f"no entry {host.value}.{member}")
        return replace(self, entries=kept)

    def group_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for group, (host, kind) in _GROUP_HOST_KIND.items():
            counts[group] = sum(
                1 for e in self.entries if e.host is host and e.kind == kind
            )
        return counts

    def to_dict(self) -> dict:
        return {
            "profile": self.profile,
            "tier": self.tier,
            "tostring_patch": self.tostring_patch,
            "entries": [e.to_dict() for e in self.entries],
        }


def build_interception_manifest(
    profile: str,
    plan: OverlayPlan,  # noqa: ARG001 - entries are profile-wide; the plan binds at verify time
    tier: str = "script-level",
    tostring_patch: str = "prototype",
) -> InterceptionManifest:
    """Enumerate the host-API members that must be intercepted for the
    given API profile ('gecko' ships with the package: 40 members)."""
    if profile != "gecko":
        raise StealthError(f"unknown api profile {profile!r}")
    if tier not in ("script-level", "source-modification"):
        raise StealthError(f"unknown tier {tier!r}")
    if tostring_patch not in ("prototype", "per-function"):
        raise StealthError(f"unknown tostring_patch {tostring_patch!r}")
    entries = []
    for group, members in GECKO_PROFILE.items():
        host, kind = _GROUP_HOST_KIND[group]
        for member, behavior in members:
            entries.append(
                ManifestEntry(
                    host=host,
                    member=member,
                    kind=kind,
                    behavior=behavior,
                    tier=tier,
                    experimental=(member == "elementFromPoint"),
                )
            )
    return InterceptionManifest(
        profile=profile, entries=tuple(entries), tier=tier, tostring_patch=tostring_patch
    )


# ---------------------------------------------------------------------------
# Stealth verification


_DOC = "document"  # sentinel for the document pseudo-node

_DOC_CHILD_PROPS = (
    "childNodes",
    "children",
    "documentElement",
    "firstElementChild",
    "lastChild",
    "lastElementChild",
    "scrollingElement",
)
_DOC_FUNCTIONS = (
    "getElementById",
    "getElementsByClassName",
    "getElementsByTagName",
    "getElementsByTagNameNS",
    "querySelector",
    "querySelectorAll",
    "elementFromPoint",
)


@dataclass
class StealthVerdict:
    passed: bool
    witness: list[str] = field(default_factory=list)
    checks: dict[str, bool] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "witness": self.witness, "checks": self.checks}


class _PublisherView:
    """The transformed snapshot as seen through the manifest's behaviors.

    Entries missing from the manifest fall back to the raw (unintercepted)
    API semantics over the transformed tree, which is exactly how a real
    leak happens. Sibling access is modeled relationally: a node's
    siblings are its visible parent's visible children, so parent/children
    interception propagates.
    """

    def __init__(self, frame: FrameInfo, manifest: InterceptionManifest, plan: OverlayPlan):
        self.frame = frame
        self.manifest = manifest
        self.plan = plan
        self.fake_html = plan.publisher_root_id
        self.body = plan.body_node_id
        self.head = next(
            (c for c in frame.node(self.fake_html).children
             if frame.node(c).tag == "head"),
            None,
        )
        self.publisher_ids = frame.subtree_ids(self.fake_html)

    def _host_of(self, nid: int) -> Host | None:
        if nid == self.fake_html:
            return Host.FAKE_HTML
        if nid == self.head:
            return Host.HEAD
        if nid == self.body:
            return Host.FAKE_BODY
        return None

    def _raw_body(self) -> list[int]:
        for nid in self.frame.subtree_ids(self.frame.root_id):
            if self.frame.node(nid).tag == "body":
                return [nid]
        return []

    def document_member_nodes(self, member: str) -> list[int]:
        """Node ids a page script can obtain from one document member."""
        entry = self.manifest.entry(Host.DOCUMENT, member)
        if member in _DOC_CHILD_PROPS:
            return [self.fake_html] if entry else [self.frame.root_id]
        if member == "body":
            return [self.body] if (entry and self.body is not None) else self._raw_body()
        if member == "all":
            return sorted(self.publisher_ids) if entry else sorted(self.frame.nodes)
        if member in _DOC_FUNCTIONS:
            # Query surface: everything the function could return for some
            # argument. Filtered versions never leave the publisher subtree.
            return sorted(self.publisher_ids) if entry else sorted(self.frame.nodes)
        raise KeyError(member)

    def visible_parent(self, nid: int) -> int | str | None:
        host = self._host_of(nid)
        if host is not None:
            if self.manifest.entry(host, "parentNode") or self.manifest.entry(
                host, "parentElement"
            ):
                if host is Host.FAKE_HTML:
                    return _DOC
                if host is Host.HEAD:
                    return self.fake_html
                # fake-body has no parent entries in the profile; fall through
        return self.frame.parent_id(nid)

    def visible_children(self, nid: int) -> list[int]:
        # No child-list member of the profile changes publisher-internal
        # structure, so children are the raw tree children.
        return list(self.frame.node(nid).children)

    def visible_attrs(self, nid: int) -> dict[str, str]:
        node = self.frame.node(nid)
        attrs = dict(node.attrs)
        host = self._host_of(nid)
        if host is Host.FAKE_HTML and self.manifest.entry(host, "id"):
            original = self.plan.spoofed_value(nid, "id")
            if original:
                attrs["id"] = original
            else:
                attrs.pop("id", None)
        if host is Host.FAKE_BODY and self.manifest.entry(host, "className"):
            original = self.plan.spoofed_value(nid, "class")
            if original:
                attrs["class"] = original
            else:
                attrs.pop("class", None)
        return attrs

    def document_element(self) -> int:
        return self.document_member_nodes("documentElement")[0]


def _closure_check(view: _PublisherView) -> tuple[bool, list[str]]:
    """BFS over everything manifest-mediated access can reach; fails with a
    witness path if any overlay node is reachable."""
    overlay_ids = view.plan.overlay_ids() | {view.plan.true_root_id}
    paths: dict[int, list[str]] = {}
    frontier: list[int] = []

    def describe(nid: int) -> str:
        node = view.frame.node(nid)
        ident = node.attr("id")
        return f"node {nid} <{node.tag}{'#' + ident if ident else ''}>"

    def add(nid: int, step: str, prev: list[str]) -> bool:
        if nid in paths:
            return False
        paths[nid] = prev + [step]
        frontier.append(nid)
        return True

    for member in (*_DOC_CHILD_PROPS, "body", "all", *_DOC_FUNCTIONS):
        entry = view.manifest.entry(Host.DOCUMENT, member)
        how = f"document.{member}" + ("" if entry else " [unintercepted]")
        for nid in view.document_member_nodes(member):
            add(nid, f"{how} -> {describe(nid)}", [])

    i = 0
    while i < len(frontier):
        nid = frontier[i]
        i += 1
        base = paths[nid]
        for child in view.visible_children(nid):
            add(child, f"{describe(nid)}.children -> {describe(child)}", base)
        parent = view.visible_parent(nid)
        if isinstance(parent, int):
            add(parent, f"{describe(nid)}.parentNode -> {describe(parent)}", base)

    for nid in paths:
        if nid in view.plan.overlay_ids():
            return False, paths[nid]
    # Reaching the true root always cascades into the overlay subtree via
    # children, so the loop above is the single source of truth.
    return True, []


def _tree_check(view: _PublisherView, original: FrameInfo) -> tuple[bool, list[str]]:
    """Publisher-visible tree must equal the original pre-transform tree:
    same node ids, tags, attributes (after spoofing), text, child order."""
    root = view.document_element()
    if root != original.root_id:
        return False, [f"view documentElement is node {root}, expected {original.root_id}"]
    stack = [root]
    while stack:
        nid = stack.pop()
        if nid not in original.nodes:
            return False, [f"view exposes node {nid} that did not exist originally"]
        want = original.node(nid)
        have = view.frame.node(nid)
        if have.tag != want.tag:
            return False, [f"node {nid}: tag {have.tag!r} != {want.tag!r}"]
        if view.visible_attrs(nid) != dict(want.attrs):
            return False, [
                f"node {nid}: visible attrs {view.visible_attrs(nid)} != {dict(want.attrs)}"
            ]
        if have.text != want.text:
            return False, [f"node {nid}: text differs"]
        if tuple(view.visible_children(nid)) != want.children:
            return False, [
                f"node {nid}: children {view.visible_children(nid)} != {list(want.children)}"
            ]
        stack.extend(view.visible_children(nid))
    return True, []


def _visible_frame(view: _PublisherView, original_url: str) -> FrameInfo:
    """Materialize the publisher-visible tree as a FrameInfo so selector
    queries can run through the view."""
    nodes = []
    stack = [view.document_element()]
    seen = set()
    while stack:
        nid = stack.pop()
        if nid in seen:
            continue
        seen.add(nid)
        node = view.frame.node(nid)
        nodes.append(
            replace(
                node,
                attrs=tuple(view.visible_attrs(nid).items()),
                children=tuple(view.visible_children(nid)),
            )
        )
        stack.extend(view.visible_children(nid))
    return build_frame(original_url, nodes)


def verify_stealth(
    transformed: PageSnapshot,
    manifest: InterceptionManifest,
    plan: OverlayPlan,
    original: PageSnapshot | None = None,
    check_selectors: tuple[str, ...] = (),
) -> StealthVerdict:
    """Check that the manifest actually hides the transformation.

    (a) no sequence of mediated accesses reaches an overlay node;
    (b) the publisher-visible tree is the original pre-transform tree
        (ids preserved, spoofed attributes restored);
    (c) selector queries through the view equal their pre-transform results.

    ``original`` defaults to the publisher subtree of the transformed
    snapshot with the token attributes spoofed away, which equals the
    pre-transform page whenever the inputs come from plan_overlays.
    """
    frame = transformed.top_frame
    view = _PublisherView(frame, manifest, plan)

    if original is not None:
        original_frame = original.top_frame
    else:
        restored = []
        for nid in sorted(view.publisher_ids):
            node = frame.node(nid)
            attrs = dict(node.attrs)
            for snid, name, value in plan.spoofed_attrs:
                if snid == nid:
                    if value:
                        attrs[name] = value
                    else:
                        attrs.pop(name, None)
            restored.append(replace(node, attrs=tuple(attrs.items())))
        original_frame = build_frame(frame.url, restored)

    verdict = StealthVerdict(passed=True)

    ok, witness = _closure_check(view)
    verdict.checks["closure-excludes-overlays"] = ok
    if not ok:
        return StealthVerdict(False, witness, verdict.checks)

    ok, witness = _tree_check(view, original_frame)
    verdict.checks["visible-tree-isomorphic"] = ok
    if not ok:
        return StealthVerdict(False, witness, verdict.checks)

    if check_selectors:
        visible = _visible_frame(view, original_frame.url)
        for sel_text in check_selectors:
            sel = selectors.parse_selector(sel_text)
            before = selectors.match_selector(original_frame, sel)
            after = selectors.match_selector(visible, sel)
            if before != after:
                verdict.checks["selector-equivalence"] = False
                return StealthVerdict(
                    False,
                    [f"selector {sel_text!r}: pre {sorted(before)} != post {sorted(after)}"],
                    verdict.checks,
                )
        verdict.checks["selector-equivalence"] = True
    return verdict


# ---------------------------------------------------------------------------
# Detectability analysis


class ProbeKind(enum.Enum):
    SOURCE_INSPECTION = "source-inspection"
    TOSTRING_TRANSPLANT = "toString-transplant"
    DESCRIPTOR_INSPECTION = "descriptor-inspection"
    PROTECTED_OBJECT_TOSTRING = "protected-object-toString"


class Outcome(enum.Enum):
    HIDDEN = "hidden"
    MODIFIED_UNATTRIBUTABLE = "modified-but-unattributable"
    REVEALED = "revealed"


_SEVERITY = {
    Outcome.HIDDEN: 0,
    Outcome.MODIFIED_UNATTRIBUTABLE: 1,
    Outcome.REVEALED: 2,
}

_SOURCE_METHODS = ("toString", "toLocaleString", "toSource")


@dataclass(frozen=True)
class StealthProbe:
    kind: ProbeKind
    target: str = ""  # intercepted member, e.g. "document.body"
    method: str = "toString"  # for source-inspection probes

    def __post_init__(self):
        if self.kind is ProbeKind.SOURCE_INSPECTION and self.method not in _SOURCE_METHODS:
            raise ValueError(f"unknown source-inspection method {self.method!r}")


@dataclass(frozen=True)
class DetectabilityVerdict:
    per_probe: tuple[tuple[StealthProbe, Outcome], ...]
    overall: Outcome

    def to_dict(self) -> dict:
        return {
            "per_probe": [
                {"kind": p.kind.value, "target": p.target, "outcome": o.value}
                for p, o in self.per_probe
            ],
            "overall": self.overall.value,
        }


def _find_entry(manifest: InterceptionManifest, target: str) -> ManifestEntry | None:
    host_name, _, member = target.partition(".")
    for e in manifest.entries:
        if member and e.host.value == host_name and e.member == member:
            return e
        if not member and e.member == target:
            return e
    return None


def analyze_detectability(
    manifest: InterceptionManifest,
    probes: list[StealthProbe],
    protected_members: tuple[str, ...] = (),
) -> DetectabilityVerdict:
    """Play the known inspection probes against a manifest.

    Rules of the game: source inspection of a modified function is hidden
    only when the universal prototype toString is patched (per-function
    toString patches are themselves inspectable); transplanting a clean
    toString defeats per-function patches but not prototype-level ones;
    descriptor inspection sees script-level property interception but
    cannot attribute it to ad blocking; a protected (unpatchable) toString
    reveals everything unless the lie lives in the browser source itself.
    ``protected_members`` defaults to empty: no protected objects are known.
    """
    results: list[tuple[StealthProbe, Outcome]] = []
    for probe in probes:
        if not isinstance(probe.kind, ProbeKind):
            raise StealthError(f"unknown probe kind {probe.kind!r}")
        entry = _find_entry(manifest, probe.target) if probe.target else None
        target_modified = entry is not None
        source_modified_tier = (entry.tier if entry else manifest.tier) == "source-modification"

        if probe.kind is ProbeKind.SOURCE_INSPECTION:
            if not target_modified or source_modified_tier:
                outcome = Outcome.HIDDEN
            elif manifest.tostring_patch == "prototype":
                outcome = Outcome.HIDDEN
            else:
                outcome = Outcome.REVEALED
        elif probe.kind is ProbeKind.TOSTRING_TRANSPLANT:
            if not target_modified or source_modified_tier:
                outcome = Outcome.HIDDEN
            elif manifest.tostring_patch == "prototype":
                outcome = Outcome.HIDDEN
            else:
                outcome = Outcome.REVEALED
        elif probe.kind is ProbeKind.DESCRIPTOR_INSPECTION:
            if entry is not None and entry.descriptor_visible:
                outcome = Outcome.MODIFIED_UNATTRIBUTABLE
            else:
                outcome = Outcome.HIDDEN
        elif probe.kind is ProbeKind.PROTECTED_OBJECT_TOSTRING:
            if protected_members and manifest.tier == "script-level":
                outcome = Outcome.REVEALED
            else:
                outcome = Outcome.HIDDEN
        else:  # pragma: no cover
            raise StealthError(f"unknown probe kind {probe.kind!r}")
        results.append((probe, outcome))

    overall = Outcome.HIDDEN
    for _, outcome in results:
        if _SEVERITY[outcome] > _SEVERITY[overall]:
            overall = outcome
    return DetectabilityVerdict(per_probe=tuple(results), overall=overall)


def appendix_probe_set(target: str = "document.getElementById") -> list[StealthProbe]:
    """The full probe taxonomy aimed at one intercepted member (plus the
    descriptor probe at a property and the protected-object probe)."""
    return [
        StealthProbe(ProbeKind.SOURCE_INSPECTION, target, "toString"),
        StealthProbe(ProbeKind.SOURCE_INSPECTION, target, "toLocaleString"),
        StealthProbe(ProbeKind.SOURCE_INSPECTION, target, "toSource"),
        StealthProbe(ProbeKind.TOSTRING_TRANSPLANT, target),
        StealthProbe(ProbeKind.DESCRIPTOR_INSPECTION, "document.body"),
        StealthProbe(ProbeKind.PROTECTED_OBJECT_TOSTRING),
    ]
