"""Page-snapshot data model: parsing, validation, serialization, traversal.

A snapshot is a frozen rendering of one page captured by an external
harness: the DOM trees of every frame, final layout boxes, a computed-style
subset, rasterized images, script bodies and the request log. Everything
downstream (filters, perceptual detection, stealth planning) operates on
these snapshots; nothing here renders, executes scripts or recomputes
layout.

File format: UTF-8 JSON, ``format_version`` 1. See ``parse_snapshot``.
All types are immutable after parsing and safe to share across threads.
"""

from __future__ import annotations

import base64
import json
import re
from dataclasses import dataclass, field, replace

__all__ = [
    "SnapshotError",
    "SnapshotParseError",
    "SnapshotValidationError",
    "LayoutBox",
    "StyleMap",
    "DomNode",
    "FrameInfo",
    "ImageBitmap",
    "ScriptRecord",
    "RequestRecord",
    "PageSnapshot",
    "FORMAT_VERSION",
    "parse_snapshot",
    "serialize_snapshot",
    "snapshot_to_dict",
    "traverse",
    "parse_color",
]

FORMAT_VERSION = 1

TEXT_TAG = "#text"
_TAG_RE = re.compile(r"^[a-z][a-z0-9-]*$")


class SnapshotError(ValueError):
    """Base class for snapshot file problems."""


class SnapshotParseError(SnapshotError):
    """Malformed syntax or wrong JSON shape; carries the offending path."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{message} (at {path})" if path else message)


class SnapshotValidationError(SnapshotError):
    """Structurally valid JSON that violates a snapshot invariant."""


# ---------------------------------------------------------------------------
# Colors


_NAMED_COLORS = {
    "white": (255, 255, 255, 255),
    "black": (0, 0, 0, 255),
    "red": (255, 0, 0, 255),
    "green": (0, 128, 0, 255),
    "blue": (0, 0, 255, 255),
    "yellow": (255, 255, 0, 255),
    "orange": (255, 165, 0, 255),
    "gray": (128, 128, 128, 255),
    "grey": (128, 128, 128, 255),
    "silver": (192, 192, 192, 255),
    "transparent": (0, 0, 0, 0),
}

_RGB_FN_RE = re.compile(r"^rgba?\(([^)]*)\)$")


def parse_color(value) -> tuple[int, int, int, int]:
    """Normalize a CSS color to an 8-bit RGBA tuple.

    Accepts #rgb/#rrggbb/#rrggbbaa, rgb()/rgba(), a small set of keyword
    colors, or an already-normalized 3/4-tuple. Raises ValueError otherwise.
    """
    if isinstance(value, (list, tuple)):
        if len(value) == 3:
            value = (*value, 255)
        if len(value) != 4 or not all(isinstance(c, int) and 0 <= c <= 255 for c in value):
            raise ValueError(f"bad rgba tuple {value!r}")
        return tuple(value)
    if not isinstance(value, str):
        raise ValueError(f"unparseable color value {value!r}")
    s = value.strip().lower()
    if s in _NAMED_COLORS:
        return _NAMED_COLORS[s]
    if s.startswith("#"):
        hexpart = s[1:]
        if len(hexpart) == 3:
            hexpart = "".join(c * 2 for c in hexpart)
        if len(hexpart) == 6:
            hexpart += "ff"
        if len(hexpart) != 8 or any(c not in "0123456789abcdef" for c in hexpart):
            raise ValueError(f"unparseable color value {value!r}")
        return tuple(int(hexpart[i : i + 2], 16) for i in range(0, 8, 2))
    m = _RGB_FN_RE.match(s)
    if m:
        parts = [p.strip() for p in m.group(1).split(",")]
        if len(parts) == 3:
            parts.append("1")
        if len(parts) != 4:
            raise ValueError(f"unparseable color value {value!r}")
        r, g, b = (int(float(p)) for p in parts[:3])
        a = int(round(float(parts[3]) * 255))
        rgba = (r, g, b, a)
        if not all(0 <= c <= 255 for c in rgba):
            raise ValueError(f"color component out of range in {value!r}")
        return rgba
    raise ValueError(f"unparseable color value {value!r}")


def _parse_px(value) -> float:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, str):
        s = value.strip().lower()
        if s.endswith("px"):
            s = s[:-2]
        return float(s)
    raise ValueError(f"unparseable length {value!r}")


# ---------------------------------------------------------------------------
# Domain types


@dataclass(frozen=True)
class LayoutBox:
    """Final rendered geometry in CSS pixels, relative to the frame's
    document origin (not the scrolled viewport)."""

    x: float = 0.0
    y: float = 0.0
    width: float = 0.0
    height: float = 0.0
    visible: bool = True

    def contains(self, other: "LayoutBox") -> bool:
        return (
            other.x >= self.x
            and other.y >= self.y
            and other.x + other.width <= self.x + self.width
            and other.y + other.height <= self.y + self.height
        )

    def intersects(self, x: float, y: float, w: float, h: float) -> bool:
        return not (
            self.x + self.width <= x
            or x + w <= self.x
            or self.y + self.height <= y
            or y + h <= self.y
        )


_STYLE_COLOR_PROPS = ("background-color", "color")
_STYLE_LENGTH_PROPS = ("border-left-width", "border-right-width")


@dataclass(frozen=True)
class StyleMap:
    """Computed-style subset. Color values are normalized 8-bit RGBA."""

    display: str = ""
    visibility: str = ""
    position: str = ""
    background_color: tuple[int, int, int, int] | None = None
    color: tuple[int, int, int, int] | None = None
    border_left_width: float = 0.0
    border_right_width: float = 0.0
    z_index: int | None = None
    extras: tuple[tuple[str, str], ...] = ()

    def get(self, prop: str) -> object:
        """Look up any supported property by its CSS name."""
        known = {
            "display": self.display,
            "visibility": self.visibility,
            "position": self.position,
            "background-color": self.background_color,
            "color": self.color,
            "border-left-width": self.border_left_width,
            "border-right-width": self.border_right_width,
            "z-index": self.z_index,
        }
        if prop in known:
            return known[prop]
        for k, v in self.extras:
            if k == prop:
                return v
        return None


@dataclass(frozen=True)
class DomNode:
    node_id: int
    tag: str
    attrs: tuple[tuple[str, str], ...] = ()
    text: str = ""
    children: tuple[int, ...] = ()
    layout: LayoutBox = field(default_factory=LayoutBox)
    style: StyleMap = field(default_factory=StyleMap)
    image_ref: str | None = None
    handlers: frozenset[str] = frozenset()

    @property
    def is_text(self) -> bool:
        return self.tag == TEXT_TAG

    def attr(self, name: str) -> str | None:
        for k, v in self.attrs:
            if k == name:
                return v
        return None

    @property
    def classes(self) -> tuple[str, ...]:
        raw = self.attr("class")
        return tuple(raw.split()) if raw else ()


@dataclass(frozen=True)
class FrameInfo:
    """One frame's DOM tree. Index 0 in a snapshot is the top frame."""

    url: str
    nodes: dict[int, DomNode]
    root_id: int
    is_ad_iframe: bool | None = None  # ground-truth label, evaluation only
    _parents: dict[int, int] = field(default_factory=dict, repr=False, compare=False)

    def node(self, node_id: int) -> DomNode:
        return self.nodes[node_id]

    @property
    def root(self) -> DomNode:
        return self.nodes[self.root_id]

    def parent_id(self, node_id: int) -> int | None:
        return self._parents.get(node_id)

    def ancestors(self, node_id: int):
        """Yield proper ancestor ids, nearest first."""
        cur = self._parents.get(node_id)
        while cur is not None:
            yield cur
            cur = self._parents.get(cur)

    def subtree_ids(self, node_id: int) -> set[int]:
        out: set[int] = set()
        stack = [node_id]
        while stack:
            nid = stack.pop()
            if nid in out:
                continue
            out.add(nid)
            stack.extend(self.nodes[nid].children)
        return out

    def iter_preorder(self):
        for nid in traverse(self):
            yield self.nodes[nid]

    def text_content(self, node_id: int) -> str:
        """Concatenated text of the subtree in document order, space-joined."""
        parts = []
        stack = [node_id]
        while stack:
            nid = stack.pop(0)
            n = self.nodes[nid]
            if n.text:
                parts.append(n.text)
            stack = list(n.children) + stack
        return " ".join(parts)


@dataclass(frozen=True)
class ImageBitmap:
    """Row-major 8-bit RGBA pixel buffer."""

    width: int
    height: int
    pixels: bytes

    def __post_init__(self):
        expected = self.width * self.height * 4
        if len(self.pixels) != expected:
            raise ValueError(
                f"pixel buffer length {len(self.pixels)} != w*h*4 = {expected}"
            )


@dataclass(frozen=True)
class ScriptRecord:
    script_id: str
    source: str  # source URL, or "inline"
    text: str


@dataclass(frozen=True)
class RequestRecord:
    url: str
    frame_index: int
    kind: str  # script | image | document | xhr | other


@dataclass(frozen=True)
class PageSnapshot:
    url: str
    viewport: tuple[int, int]
    frames: tuple[FrameInfo, ...]
    images: dict[str, ImageBitmap]
    scripts: tuple[ScriptRecord, ...] = ()
    requests: tuple[RequestRecord, ...] = ()

    @property
    def top_frame(self) -> FrameInfo:
        return self.frames[0]

    def with_top_frame(self, frame: FrameInfo) -> "PageSnapshot":
        return replace(self, frames=(frame,) + self.frames[1:])


# ---------------------------------------------------------------------------
# Parsing


def _expect(obj, typ, path: str):
    if typ is int and isinstance(obj, bool):
        raise SnapshotParseError(f"expected {typ.__name__}, got bool", path)
    if not isinstance(obj, typ):
        raise SnapshotParseError(
            f"expected {typ.__name__}, got {type(obj).__name__}", path
        )
    return obj


def _parse_style(raw: dict, path: str) -> StyleMap:
    display = visibility = position = ""
    background_color = color = None
    blw = brw = 0.0
    z_index = None
    extras: list[tuple[str, str]] = []
    for key in raw:
        _expect(key, str, path)
        if key != key.lower():
            raise SnapshotValidationError(f"style key not lowercase: {key!r}")
    try:
        for key, val in raw.items():
            if key == "display":
                display = str(val)
            elif key == "visibility":
                visibility = str(val)
            elif key == "position":
                position = str(val)
            elif key in _STYLE_COLOR_PROPS:
                parsed = parse_color(val)
                if key == "background-color":
                    background_color = parsed
                else:
                    color = parsed
            elif key in _STYLE_LENGTH_PROPS:
                if key == "border-left-width":
                    blw = _parse_px(val)
                else:
                    brw = _parse_px(val)
            elif key == "z-index":
                z_index = int(val)
            else:
                extras.append((key, str(val)))
    except ValueError as exc:
        raise SnapshotValidationError(f"{exc} (at {path})") from exc
    return StyleMap(
        display=display,
        visibility=visibility,
        position=position,
        background_color=background_color,
        color=color,
        border_left_width=blw,
        border_right_width=brw,
        z_index=z_index,
        extras=tuple(extras),
    )


def _parse_layout(raw: dict, path: str) -> LayoutBox:
    box = LayoutBox(
        x=float(raw.get("x", 0)),
        y=float(raw.get("y", 0)),
        width=float(raw.get("w", 0)),
        height=float(raw.get("h", 0)),
        visible=bool(raw.get("visible", True)),
    )
    if box.width < 0 or box.height < 0:
        raise SnapshotValidationError(f"negative layout size (at {path})")
    return box


def _parse_node(raw: dict, path: str) -> DomNode:
    _expect(raw, dict, path)
    node_id = _expect(raw.get("id"), int, path + ".id")
    tag = _expect(raw.get("tag"), str, path + ".tag")
    if tag != TEXT_TAG and not _TAG_RE.match(tag):
        raise SnapshotValidationError(
            f"invalid tag {tag!r}: must be a lowercase element name or {TEXT_TAG}"
        )
    attrs_raw = raw.get("attrs", {})
    _expect(attrs_raw, dict, path + ".attrs")
    attrs = tuple((str(k), str(v)) for k, v in attrs_raw.items())
    children_raw = raw.get("children", [])
    _expect(children_raw, list, path + ".children")
    children = tuple(_expect(c, int, path + ".children[]") for c in children_raw)
    if tag == TEXT_TAG and children:
        raise SnapshotValidationError(f"text node {node_id} with children")
    layout = _parse_layout(raw.get("layout", {}), path + ".layout")
    style = _parse_style(raw.get("style", {}) or {}, path + ".style")
    image_ref = raw.get("image_ref")
    if image_ref is not None:
        image_ref = _expect(image_ref, str, path + ".image_ref")
    handlers_raw = raw.get("handlers", [])
    _expect(handlers_raw, list, path + ".handlers")
    return DomNode(
        node_id=node_id,
        tag=tag,
        attrs=attrs,
        text=str(raw.get("text", "")),
        children=children,
        layout=layout,
        style=style,
        image_ref=image_ref,
        handlers=frozenset(str(h) for h in handlers_raw),
    )


def build_frame(
    url: str,
    nodes: list[DomNode],
    is_ad_iframe: bool | None = None,
) -> FrameInfo:
    """Assemble and validate a frame from a flat node list.

    Enforces unique ids, resolvable child references, a single root and
    single-parent (acyclic) structure.
    """
    by_id: dict[int, DomNode] = {}
    for n in nodes:
        if n.node_id in by_id:
            raise SnapshotValidationError(f"duplicate node id {n.node_id}")
        by_id[n.node_id] = n
    parents: dict[int, int] = {}
    for n in nodes:
        for c in n.children:
            if c not in by_id:
                raise SnapshotValidationError(f"unknown child id {c}")
            if c in parents:
                raise SnapshotValidationError(f"node {c} has multiple parents")
            parents[c] = n.node_id
    roots = [nid for nid in by_id if nid not in parents]
    if len(roots) == 0:
        raise SnapshotValidationError("no root (child links form a cycle)")
    # Nodes unreachable from the single root show up as extra roots or,
    # with a cycle among them, as no root at all.
    if len(roots) > 1:
        raise SnapshotValidationError(f"multiple roots: {sorted(roots)}")
    frame = FrameInfo(
        url=url, nodes=by_id, root_id=roots[0], is_ad_iframe=is_ad_iframe,
        _parents=parents,
    )
    reachable = frame.subtree_ids(frame.root_id)
    if len(reachable) != len(by_id):
        orphans = sorted(set(by_id) - reachable)
        raise SnapshotValidationError(f"unreachable nodes {orphans}")
    return frame


def parse_snapshot(data: bytes | str) -> PageSnapshot:
    """Parse and validate a snapshot file.

    Raises SnapshotParseError for malformed input (with a field path) and
    SnapshotValidationError naming the violated invariant.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SnapshotParseError(f"not UTF-8: {exc}") from exc
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SnapshotParseError(f"invalid JSON: {exc.msg}", f"line {exc.lineno}") from exc
    _expect(doc, dict, "$")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise SnapshotValidationError(
            f"unsupported format_version {version!r} (expected {FORMAT_VERSION})"
        )
    url = _expect(doc.get("url"), str, "$.url")
    vp = _expect(doc.get("viewport"), dict, "$.viewport")
    viewport = (
        _expect(vp.get("w"), int, "$.viewport.w"),
        _expect(vp.get("h"), int, "$.viewport.h"),
    )
    if viewport[0] <= 0 or viewport[1] <= 0:
        raise SnapshotValidationError("non-positive viewport")

    frames_raw = _expect(doc.get("frames"), list, "$.frames")
    if not frames_raw:
        raise SnapshotValidationError("missing top frame (frame 0)")
    frames = []
    for fi, fr in enumerate(frames_raw):
        fpath = f"$.frames[{fi}]"
        _expect(fr, dict, fpath)
        nodes_raw = _expect(fr.get("nodes"), list, fpath + ".nodes")
        nodes = [
            _parse_node(nr, f"{fpath}.nodes[{ni}]") for ni, nr in enumerate(nodes_raw)
        ]
        label = fr.get("is_ad_iframe")
        if label is not None:
            label = bool(label)
        frames.append(build_frame(str(fr.get("url", "")), nodes, label))

    images_raw = doc.get("images", {})
    _expect(images_raw, dict, "$.images")
    images: dict[str, ImageBitmap] = {}
    for iid, img in images_raw.items():
        ipath = f"$.images[{iid!r}]"
        _expect(img, dict, ipath)
        w = _expect(img.get("w"), int, ipath + ".w")
        h = _expect(img.get("h"), int, ipath + ".h")
        try:
            pixels = base64.b64decode(_expect(img.get("rgba_base64"), str, ipath))
        except Exception as exc:
            raise SnapshotParseError(f"bad base64 pixel data: {exc}", ipath) from exc
        try:
            images[iid] = ImageBitmap(w, h, pixels)
        except ValueError as exc:
            raise SnapshotValidationError(f"image {iid}: {exc}") from exc

    scripts = []
    for si, sc in enumerate(doc.get("scripts", [])):
        spath = f"$.scripts[{si}]"
        _expect(sc, dict, spath)
        scripts.append(
            ScriptRecord(
                script_id=str(sc.get("id", f"s{si}")),
                source=str(sc.get("source", "inline")),
                text=_expect(sc.get("text"), str, spath + ".text"),
            )
        )
    seen_sids = set()
    for sc in scripts:
        if sc.script_id in seen_sids:
            raise SnapshotValidationError(f"duplicate script id {sc.script_id!r}")
        seen_sids.add(sc.script_id)

    requests = []
    for ri, rq in enumerate(doc.get("requests", [])):
        rpath = f"$.requests[{ri}]"
        _expect(rq, dict, rpath)
        fidx = _expect(rq.get("frame", 0), int, rpath + ".frame")
        if not (0 <= fidx < len(frames)):
            raise SnapshotValidationError(
                f"request initiator frame {fidx} out of range"
            )
        requests.append(
            RequestRecord(
                url=_expect(rq.get("url"), str, rpath + ".url"),
                frame_index=fidx,
                kind=str(rq.get("kind", "other")),
            )
        )

    # Cross-frame invariant: every referenced image exists.
    for fi, frame in enumerate(frames):
        for n in frame.nodes.values():
            if n.image_ref is not None and n.image_ref not in images:
                raise SnapshotValidationError(f"dangling image-ref {n.image_ref}")

    return PageSnapshot(
        url=url,
        viewport=viewport,
        frames=tuple(frames),
        images=images,
        scripts=tuple(scripts),
        requests=tuple(requests),
    )


# ---------------------------------------------------------------------------
# Serialization


def _style_to_dict(s: StyleMap) -> dict:
    out: dict = {}
    if s.display:
        out["display"] = s.display
    if s.visibility:
        out["visibility"] = s.visibility
    if s.position:
        out["position"] = s.position
    if s.background_color is not None:
        out["background-color"] = list(s.background_color)
    if s.color is not None:
        out["color"] = list(s.color)
    if s.border_left_width:
        out["border-left-width"] = s.border_left_width
    if s.border_right_width:
        out["border-right-width"] = s.border_right_width
    if s.z_index is not None:
        out["z-index"] = s.z_index
    for k, v in s.extras:
        out[k] = v
    return out


def _node_to_dict(n: DomNode) -> dict:
    return {
        "id": n.node_id,
        "tag": n.tag,
        "attrs": dict(n.attrs),
        "text": n.text,
        "children": list(n.children),
        "layout": {
            "x": float(n.layout.x),
            "y": float(n.layout.y),
            "w": float(n.layout.width),
            "h": float(n.layout.height),
            "visible": n.layout.visible,
        },
        "style": _style_to_dict(n.style),
        "image_ref": n.image_ref,
        "handlers": sorted(n.handlers),
    }


def snapshot_to_dict(snap: PageSnapshot) -> dict:
    frames = []
    for fr in snap.frames:
        fd = {
            "url": fr.url,
            "nodes": [_node_to_dict(fr.nodes[nid]) for nid in traverse(fr)],
        }
        if fr.is_ad_iframe is not None:
            fd["is_ad_iframe"] = fr.is_ad_iframe
        frames.append(fd)
    return {
        "format_version": FORMAT_VERSION,
        "url": snap.url,
        "viewport": {"w": snap.viewport[0], "h": snap.viewport[1]},
        "frames": frames,
        "images": {
            iid: {
                "w": img.width,
                "h": img.height,
                "rgba_base64": base64.b64encode(img.pixels).decode("ascii"),
            }
            for iid, img in snap.images.items()
        },
        "scripts": [
            {"id": s.script_id, "source": s.source, "text": s.text}
            for s in snap.scripts
        ],
        "requests": [
            {"url": r.url, "frame": r.frame_index, "kind": r.kind}
            for r in snap.requests
        ],
    }


def serialize_snapshot(snap: PageSnapshot, pretty: bool = False) -> str:
    # No key sorting: attrs are an ordered map and must round-trip in
    # order; construction order is already deterministic.
    doc = snapshot_to_dict(snap)
    if pretty:
        return json.dumps(doc, indent=2) + "\n"
    return json.dumps(doc, separators=(",", ":")) + "\n"


# ---------------------------------------------------------------------------
# Traversal


def traverse(frame: FrameInfo, exclusions: frozenset[int] | set[int] = frozenset()) -> list[int]:
    """Depth-first preorder of node ids, skipping excluded subtrees.

    An excluded node and everything beneath it is omitted; exclusions must
    be node ids of the frame. This is the reference traversal the stealth
    planner hides overlay subtrees from.
    """
    for nid in exclusions:
        if nid not in frame.nodes:
            raise KeyError(f"exclusion {nid} not in frame")
    out: list[int] = []
    if frame.root_id in exclusions:
        return out
    stack = [frame.root_id]
    while stack:
        nid = stack.pop()
        out.append(nid)
        for c in reversed(frame.nodes[nid].children):
            if c not in exclusions:
                stack.append(c)
    return out
