"""Visual container search: query page regions by perceptual features
(element kind, size range, location, style) instead of markup.

Element kinds are derived, not declared: a node is a link because it has an
href or a recorded click handler, a button because of its tag, an image
because it carries pixels, text because it contains only text, and a
container otherwise.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

from ..snapshot import DomNode, FrameInfo, PageSnapshot

__all__ = [
    "ElementKind",
    "Region",
    "VisualQuery",
    "classify_kind",
    "find_sidebars",
    "find_containers",
    "is_top_of_frame",
]

# Sidebar heuristic knobs (documented contract, relied on by the oracle
# tests): width at most 40% of the viewport, height at least 50% of the
# frame, pinned within 8px of either viewport edge.
SIDEBAR_MAX_WIDTH_FRACTION = 0.40
SIDEBAR_MIN_HEIGHT_FRACTION = 0.50
SIDEBAR_EDGE_SLACK_PX = 8.0

# "Top of frame" means the node's top edge is within the first 10% of the
# viewport height (interpretation; the disclosure standards only say where
# icons "usually" sit).
TOP_OF_FRAME_FRACTION = 0.10


class ElementKind(enum.Enum):
    LINK = "link"
    BUTTON = "button"
    TEXT = "text"
    IMAGE = "image"
    CONTAINER = "container"


@dataclass(frozen=True)
class Region:
    """Custom rectangular region predicate (frame coordinates)."""

    x: float
    y: float
    width: float
    height: float


@dataclass(frozen=True)
class VisualQuery:
    element_kinds: frozenset[ElementKind] = frozenset()
    width_range: tuple[float, float] | None = None
    height_range: tuple[float, float] | None = None
    region: str | Region | None = None  # "sidebar" | "top-of-frame" | Region
    required_style: tuple[tuple[str, object], ...] = ()
    requires_left_and_right_borders: bool = False

    def __post_init__(self):
        for rng in (self.width_range, self.height_range):
            if rng is not None and rng[0] > rng[1]:
                raise ValueError(f"range min > max: {rng}")
        if isinstance(self.region, str) and self.region not in ("sidebar", "top-of-frame"):
            raise ValueError(f"unknown region predicate {self.region!r}")


def classify_kind(node: DomNode, frame: FrameInfo) -> ElementKind:
    if node.is_text:
        return ElementKind.TEXT
    if node.attr("href") is not None or "click" in node.handlers:
        return ElementKind.LINK
    if node.tag == "button" or (
        node.tag == "input" and node.attr("type") in ("button", "submit")
    ):
        return ElementKind.BUTTON
    if node.image_ref is not None:
        return ElementKind.IMAGE
    if node.text and not node.children:
        return ElementKind.TEXT
    if node.children and all(frame.node(c).is_text for c in node.children):
        return ElementKind.TEXT
    return ElementKind.CONTAINER


def _is_sidebar(node: DomNode, frame: FrameInfo, viewport: tuple[int, int]) -> bool:
    if node.is_text or not node.layout.visible:
        return False
    vw, _ = viewport
    box = node.layout
    frame_h = frame.root.layout.height
    if frame_h <= 0 or box.width <= 0:
        return False
    if box.width > SIDEBAR_MAX_WIDTH_FRACTION * vw:
        return False
    if box.height < SIDEBAR_MIN_HEIGHT_FRACTION * frame_h:
        return False
    left_pinned = abs(box.x) <= SIDEBAR_EDGE_SLACK_PX
    right_pinned = abs((box.x + box.width) - vw) <= SIDEBAR_EDGE_SLACK_PX
    return left_pinned or right_pinned


def find_sidebars(snap: PageSnapshot, frame_index: int = 0) -> list[int]:
    """Node ids of containers that look like sidebars (tall, narrow,
    pinned to a viewport edge)."""
    frame = snap.frames[frame_index]
    return [
        n.node_id
        for n in frame.iter_preorder()
        if _is_sidebar(n, frame, snap.viewport)
    ]


def is_top_of_frame(node: DomNode, snap: PageSnapshot) -> bool:
    return node.layout.y <= TOP_OF_FRAME_FRACTION * snap.viewport[1]


def _in_sidebar(node: DomNode, frame: FrameInfo, sidebar_ids: set[int]) -> bool:
    return any(aid in sidebar_ids for aid in frame.ancestors(node.node_id))


def _style_satisfied(node: DomNode, prop: str, want) -> bool:
    have = node.style.get(prop)
    if callable(want):
        return bool(want(have))
    if prop in ("background-color", "color") and isinstance(want, (str, list)):
        from ..snapshot import parse_color

        try:
            want = parse_color(want)
        except ValueError:
            return False
        return have == want
    return have == want


def node_satisfies(
    node: DomNode,
    frame: FrameInfo,
    snap: PageSnapshot,
    q: VisualQuery,
    sidebar_ids: set[int],
) -> bool:
    """Evaluate every specified predicate against one node. Kept separate
    (and dumb) so the brute-force oracle tests can call it directly."""
    box = node.layout
    if not box.visible:
        return False
    if q.element_kinds and classify_kind(node, frame) not in q.element_kinds:
        return False
    if q.width_range is not None and not (q.width_range[0] <= box.width <= q.width_range[1]):
        return False
    if q.height_range is not None and not (q.height_range[0] <= box.height <= q.height_range[1]):
        return False
    if q.region == "sidebar":
        if not _in_sidebar(node, frame, sidebar_ids):
            return False
    elif q.region == "top-of-frame":
        if not is_top_of_frame(node, snap):
            return False
    elif isinstance(q.region, Region):
        if not (
            box.x >= q.region.x
            and box.y >= q.region.y
            and box.x + box.width <= q.region.x + q.region.width
            and box.y + box.height <= q.region.y + q.region.height
        ):
            return False
    if q.requires_left_and_right_borders:
        if node.style.border_left_width <= 0 or node.style.border_right_width <= 0:
            return False
    for prop, want in q.required_style:
        if not _style_satisfied(node, prop, want):
            return False
    return True


def find_containers(
    snap: PageSnapshot,
    q: VisualQuery,
    frame_indexes: tuple[int, ...] | None = None,
) -> list[tuple[int, int]]:
    """(frame index, node id) for every visible node satisfying the query,
    in frame order then document order."""
    out: list[tuple[int, int]] = []
    indexes = frame_indexes if frame_indexes is not None else tuple(range(len(snap.frames)))
    for fi in indexes:
        frame = snap.frames[fi]
        sidebar_ids = set(find_sidebars(snap, fi)) if q.region == "sidebar" else set()
        for node in frame.iter_preorder():
            if node_satisfies(node, frame, snap, q, sidebar_ids):
                out.append((fi, node.node_id))
    return out
