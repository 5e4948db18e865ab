"""Concrete perceptual ad detectors plus the evaluation harness.

Two disclosure standards are implemented. AdChoices: third-party ad iframes
carry the industry icon, usually near the creative's top-right corner, so
every non-top frame is scanned for the icon template (top-right-quadrant
content first). Feed-style: candidate containers come from the visual
queries (wide bordered feed items, narrower sidebar items) and a candidate
counts as an ad when any disclosure marker is present: sponsored text in
the DOM, sponsored text rendered into its image, or a link leading to a
known disclosure page.

Detection deliberately ignores markup identity (ids, classes, URLs): those
are what publishers shuffle to defeat filter lists.
"""

from __future__ import annotations

import enum
import json
import re
import time
from dataclasses import dataclass, field, replace
from urllib.parse import urljoin, urlsplit

from .assets import adchoices_icon_template
from .perceptual.click import ClickError, Fetcher, resolve_click
from .perceptual.containers import VisualQuery, find_containers
from .perceptual.imagematch import ImageTemplate, TemplateSizeError, match_image
from .perceptual.textrec import MarkerLexicon, TextRecognizer, recognize_text
from .snapshot import FrameInfo, PageSnapshot

__all__ = [
    "MarkerKind",
    "AdDetection",
    "DetectionReport",
    "ConfusionMatrix",
    "DetectorConfig",
    "EvaluationError",
    "detect_adchoices",
    "detect_feed_ads",
    "run_detection",
    "evaluate_report",
    "confusion_from_pairs",
    "url_in_allowlist",
    "AD_TRUTH_ATTR",
]

# Ground-truth label carried by generated/test snapshots on feed candidates.
AD_TRUTH_ATTR = "data-ad-truth"

DEFAULT_ALLOWLIST = (
    "facebook.com/ads",
    "aboutads.info",
    "youronlinechoices.eu",
    "info.evidon.com",
)

NEWSFEED_QUERY = VisualQuery(
    width_range=(450.0, 550.0),
    requires_left_and_right_borders=True,
)
SIDEBAR_QUERY = VisualQuery(
    width_range=(225.0, 325.0),
    region="sidebar",
)


class MarkerKind(enum.Enum):
    ICON_MATCH = "icon-match"
    DISCLOSURE_TEXT = "disclosure-text"
    DISCLOSURE_LINK = "disclosure-link"


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class AdDetection:
    frame_index: int
    node_id: int
    standard: str  # adchoices | feed-style | other
    markers: frozenset[MarkerKind]
    evidence: tuple[tuple[MarkerKind, object], ...] = ()

    def __post_init__(self):
        if not self.markers:
            raise ValueError("a detection must carry at least one marker")

    def to_dict(self) -> dict:
        return {
            "frame": self.frame_index,
            "node": self.node_id,
            "standard": self.standard,
            "markers": sorted(m.value for m in self.markers),
            "evidence": [[k.value, _evidence_repr(v)] for k, v in self.evidence],
        }


def _evidence_repr(value) -> object:
    if hasattr(value, "__dict__") or hasattr(value, "_asdict"):
        return repr(value)
    return value


@dataclass
class DetectionReport:
    snapshot_url: str
    detections: list[AdDetection] = field(default_factory=list)
    frame_verdicts: dict[int, bool] = field(default_factory=dict)
    feed_candidates: list[tuple[int, int]] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)
    errors: list[str] = field(default_factory=list)

    def detections_for(self, standard: str) -> list[AdDetection]:
        return [d for d in self.detections if d.standard == standard]

    def to_dict(self) -> dict:
        return {
            "snapshot_url": self.snapshot_url,
            "detections": [d.to_dict() for d in self.detections],
            "frame_verdicts": {str(k): v for k, v in sorted(self.frame_verdicts.items())},
            "feed_candidates": [list(c) for c in self.feed_candidates],
            "timings": self.timings,
            "errors": self.errors,
        }


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int
    precision: float
    recall: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, tn: int, fn: int) -> "ConfusionMatrix":
        precision = tp / (tp + fp) if (tp + fp) else 1.0
        recall = tp / (tp + fn) if (tp + fn) else 1.0
        return cls(tp=tp, fp=fp, tn=tn, fn=fn, precision=precision, recall=recall)

    def recomputed(self) -> tuple[float, float]:
        other = ConfusionMatrix.from_counts(self.tp, self.fp, self.tn, self.fn)
        return other.precision, other.recall

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix.from_counts(
            self.tp + other.tp, self.fp + other.fp,
            self.tn + other.tn, self.fn + other.fn,
        )

    def to_dict(self) -> dict:
        return {
            "tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn,
            "precision": self.precision, "recall": self.recall,
        }


@dataclass(frozen=True)
class DetectorConfig:
    icon_template: ImageTemplate
    newsfeed_query: VisualQuery = NEWSFEED_QUERY
    sidebar_query: VisualQuery = SIDEBAR_QUERY
    lexicon: MarkerLexicon = MarkerLexicon.of(("Sponsored", 1))
    allowlist: tuple[str, ...] = DEFAULT_ALLOWLIST
    marker_policy: str = "any"  # "any" (default) or "all"
    # Link resolution is the one server-visible action, so it is off in
    # batch mode; the guard refuses to click before another marker showed.
    resolve_links: bool = False
    click_guard: bool = True
    recognizer: TextRecognizer | None = None

    @classmethod
    def default(cls, **overrides) -> "DetectorConfig":
        cfg = cls(icon_template=adchoices_icon_template())
        return replace(cfg, **overrides) if overrides else cfg

    @classmethod
    def from_file(cls, path) -> "DetectorConfig":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        cfg = cls.default()
        if "icon" in doc:
            icon = doc["icon"]
            scales = tuple(icon.get("scales", (0.5, 0.75, 1.0, 1.25)))
            threshold = float(icon.get("threshold", 0.15))
            if icon.get("path"):
                tmpl = ImageTemplate.from_png(
                    icon["path"], scale_set=scales, max_normalized_rmse=threshold
                )
            else:
                tmpl = adchoices_icon_template(scales, threshold)
            cfg = replace(cfg, icon_template=tmpl)
        if "lexicon" in doc:
            cfg = replace(cfg, lexicon=MarkerLexicon.of(*[tuple(e) for e in doc["lexicon"]]))
        if "allowlist" in doc:
            cfg = replace(cfg, allowlist=tuple(doc["allowlist"]))
        for key in ("marker_policy", "resolve_links", "click_guard"):
            if key in doc:
                cfg = replace(cfg, **{key: doc[key]})
        def _query(base: VisualQuery, spec: dict) -> VisualQuery:
            q = base
            if "width" in spec:
                q = replace(q, width_range=tuple(float(v) for v in spec["width"]))
            if "height" in spec:
                q = replace(q, height_range=tuple(float(v) for v in spec["height"]))
            if "borders" in spec:
                q = replace(q, requires_left_and_right_borders=bool(spec["borders"]))
            if "region" in spec:
                q = replace(q, region=spec["region"])
            return q
        if "newsfeed_query" in doc:
            cfg = replace(cfg, newsfeed_query=_query(cfg.newsfeed_query, doc["newsfeed_query"]))
        if "sidebar_query" in doc:
            cfg = replace(cfg, sidebar_query=_query(cfg.sidebar_query, doc["sidebar_query"]))
        return cfg


# ---------------------------------------------------------------------------
# Marker helpers


def url_in_allowlist(url: str, allowlist: tuple[str, ...]) -> bool:
    """Entry format: host[/path-prefix]. Subdomains of the host match."""
    parts = urlsplit(url)
    host = (parts.hostname or "").lower()
    path = parts.path or "/"
    for entry in allowlist:
        e_host, _, e_path = entry.partition("/")
        e_host = e_host.lower()
        if host != e_host and not host.endswith("." + e_host):
            continue
        if e_path and not path.lstrip("/").startswith(e_path):
            continue
        return True
    return False


def _levenshtein_leq(a: str, b: str, bound: int) -> int | None:
    """Edit distance if <= bound, else None. Tiny banded DP."""
    if abs(len(a) - len(b)) > bound:
        return None
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        if min(cur) > bound:
            return None
        prev = cur
    return prev[-1] if prev[-1] <= bound else None


def _fuzzy_text_match(text: str, phrase: str, bound: int) -> int | None:
    """Distance of the closest token window to the phrase, or None.

    Tokens are alphanumeric runs compared case-insensitively; multi-word
    phrases slide a window of the same token count.
    """
    tokens = re.findall(r"[A-Za-z0-9]+", text)
    words = phrase.split()
    k = len(words)
    target = " ".join(words).lower()
    best: int | None = None
    for i in range(0, len(tokens) - k + 1):
        window = " ".join(tokens[i : i + k]).lower()
        d = _levenshtein_leq(window, target, bound)
        if d is not None and (best is None or d < best):
            best = d
            if best == 0:
                break
    return best


def _subtree_links(frame: FrameInfo, node_id: int) -> list[tuple[int, str]]:
    out = []
    for nid in sorted(frame.subtree_ids(node_id)):
        node = frame.node(nid)
        href = node.attr("href")
        if href:
            out.append((nid, urljoin(frame.url, href)))
    return out


# ---------------------------------------------------------------------------
# Detectors


def _quadrant_ordered_image_nodes(frame: FrameInfo) -> list:
    """Visible image-bearing nodes, top-right-quadrant intersectors first."""
    extent = frame.root.layout
    qx, qy = extent.x + extent.width / 2, extent.y
    qw, qh = extent.width / 2, extent.height / 2
    nodes = [
        n for n in frame.iter_preorder()
        if n.image_ref is not None and n.layout.visible
    ]
    return sorted(
        nodes,
        key=lambda n: (not n.layout.intersects(qx, qy, qw, qh),),
    )


def detect_adchoices(
    snap: PageSnapshot,
    cfg: DetectorConfig,
    fetcher: Fetcher | None = None,
    report: DetectionReport | None = None,
) -> list[AdDetection]:
    """Scan every iframe for the disclosure icon. Per-frame failures are
    recorded on the report, never raised."""
    detections: list[AdDetection] = []
    for fi in range(1, len(snap.frames)):
        frame = snap.frames[fi]
        try:
            markers: dict[MarkerKind, object] = {}
            for node in _quadrant_ordered_image_nodes(frame):
                bitmap = snap.images[node.image_ref]
                try:
                    m = match_image(bitmap, cfg.icon_template)
                except TemplateSizeError:
                    continue
                if m is not None:
                    markers[MarkerKind.ICON_MATCH] = m
                    if cfg.resolve_links and fetcher is not None:
                        # Guard satisfied: the icon marker was already found.
                        try:
                            res = resolve_click(snap, node.node_id, fetcher, frame_index=fi)
                            if url_in_allowlist(res.final_url, cfg.allowlist):
                                markers[MarkerKind.DISCLOSURE_LINK] = res
                        except ClickError as exc:
                            if report is not None:
                                report.errors.append(f"frame {fi}: {exc}")
                    break
            if markers:
                detections.append(
                    AdDetection(
                        frame_index=fi,
                        node_id=frame.root_id,
                        standard="adchoices",
                        markers=frozenset(markers),
                        evidence=tuple(markers.items()),
                    )
                )
        except Exception as exc:  # pragma: no cover - defensive per-frame wall
            if report is not None:
                report.errors.append(f"frame {fi}: {exc}")
    return detections


def detect_feed_ads(
    snap: PageSnapshot,
    cfg: DetectorConfig,
    fetcher: Fetcher | None = None,
    report: DetectionReport | None = None,
) -> list[AdDetection]:
    """Feed/sidebar candidates by geometry, then disclosure markers decide."""
    frame = snap.top_frame
    seen: set[int] = set()
    matched: list[int] = []
    for _, nid in find_containers(snap, cfg.newsfeed_query, frame_indexes=(0,)):
        if nid not in seen:
            seen.add(nid)
            matched.append(nid)
    for _, nid in find_containers(snap, cfg.sidebar_query, frame_indexes=(0,)):
        if nid not in seen:
            seen.add(nid)
            matched.append(nid)
    # The candidate unit is the container: nested matches (a text span or
    # creative image that happens to fall in the size range) collapse into
    # their outermost matching ancestor.
    candidates = [
        nid for nid in matched
        if not any(aid in seen for aid in frame.ancestors(nid))
    ]
    if report is not None:
        report.feed_candidates.extend((0, nid) for nid in candidates)

    detections: list[AdDetection] = []
    for nid in candidates:
        markers: dict[MarkerKind, object] = {}
        # 1. sponsored text in the DOM
        text = frame.text_content(nid)
        for entry in cfg.lexicon.entries:
            d = _fuzzy_text_match(text, entry.word, entry.max_distance)
            if d is not None:
                markers[MarkerKind.DISCLOSURE_TEXT] = ("dom-text", entry.word, d)
                break
        # 2. sponsored text rendered into the candidate's pixels
        if MarkerKind.DISCLOSURE_TEXT not in markers:
            for sub in sorted(frame.subtree_ids(nid)):
                img_node = frame.node(sub)
                if img_node.image_ref is None or not img_node.layout.visible:
                    continue
                hits = recognize_text(
                    snap.images[img_node.image_ref], cfg.lexicon, cfg.recognizer
                )
                if hits:
                    markers[MarkerKind.DISCLOSURE_TEXT] = hits[0]
                    break
        # 3. disclosure link: static href first, live resolution if allowed
        links = _subtree_links(frame, nid)
        for link_nid, url in links:
            if url_in_allowlist(url, cfg.allowlist):
                markers[MarkerKind.DISCLOSURE_LINK] = ("static-href", link_nid, url)
                break
        if (
            MarkerKind.DISCLOSURE_LINK not in markers
            and cfg.resolve_links
            and fetcher is not None
            and (markers or not cfg.click_guard)
        ):
            for link_nid, _ in links:
                try:
                    res = resolve_click(snap, link_nid, fetcher, frame_index=0)
                except ClickError as exc:
                    if report is not None:
                        report.errors.append(f"node {link_nid}: {exc}")
                    continue
                if url_in_allowlist(res.final_url, cfg.allowlist):
                    markers[MarkerKind.DISCLOSURE_LINK] = res
                    break
        found = set(markers)
        if cfg.marker_policy == "all":
            is_ad = {MarkerKind.DISCLOSURE_TEXT, MarkerKind.DISCLOSURE_LINK} <= found
        else:
            is_ad = bool(found)
        if is_ad:
            detections.append(
                AdDetection(
                    frame_index=0,
                    node_id=nid,
                    standard="feed-style",
                    markers=frozenset(found),
                    evidence=tuple(markers.items()),
                )
            )
    return detections


def run_detection(
    snap: PageSnapshot,
    cfg: DetectorConfig,
    fetcher: Fetcher | None = None,
) -> DetectionReport:
    report = DetectionReport(snapshot_url=snap.url)
    t0 = time.perf_counter()
    adchoices = detect_adchoices(snap, cfg, fetcher, report)
    t1 = time.perf_counter()
    feed = detect_feed_ads(snap, cfg, fetcher, report)
    t2 = time.perf_counter()
    report.detections = adchoices + feed
    report.timings = {
        "adchoices_s": t1 - t0,
        "feed_s": t2 - t1,
        "total_s": t2 - t0,
    }
    detected_frames = {d.frame_index for d in adchoices}
    for fi in range(1, len(snap.frames)):
        report.frame_verdicts[fi] = fi in detected_frames
    return report


# ---------------------------------------------------------------------------
# Evaluation


def confusion_from_pairs(pairs) -> ConfusionMatrix:
    """pairs: iterable of (predicted: bool, actual: bool)."""
    tp = fp = tn = fn = 0
    for predicted, actual in pairs:
        if predicted and actual:
            tp += 1
        elif predicted and not actual:
            fp += 1
        elif not predicted and actual:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix.from_counts(tp, fp, tn, fn)


def _evaluate_adchoices(report: DetectionReport, snap: PageSnapshot) -> ConfusionMatrix:
    uncovered = [
        fi for fi in range(1, len(snap.frames))
        if snap.frames[fi].is_ad_iframe is None
    ]
    if uncovered:
        raise EvaluationError(f"frames without ground-truth labels: {uncovered}")
    predicted = {d.frame_index for d in report.detections_for("adchoices")}
    pairs = [
        (fi in predicted, bool(snap.frames[fi].is_ad_iframe))
        for fi in range(1, len(snap.frames))
    ]
    return confusion_from_pairs(pairs)


def _evaluate_feed(report: DetectionReport, snap: PageSnapshot) -> ConfusionMatrix:
    frame = snap.top_frame
    uncovered = []
    pairs = []
    predicted = {(d.frame_index, d.node_id) for d in report.detections_for("feed-style")}
    for fi, nid in report.feed_candidates:
        label = snap.frames[fi].node(nid).attr(AD_TRUTH_ATTR)
        if label is None:
            uncovered.append((fi, nid))
            continue
        pairs.append(((fi, nid) in predicted, label == "1"))
    if uncovered:
        raise EvaluationError(f"candidates without ground-truth labels: {uncovered}")
    # Planted ads the candidate queries missed entirely are false negatives.
    considered = set(report.feed_candidates)
    for node in frame.iter_preorder():
        if node.attr(AD_TRUTH_ATTR) == "1" and (0, node.node_id) not in considered:
            pairs.append((False, True))
    return confusion_from_pairs(pairs)


def evaluate_report(
    report: DetectionReport,
    snap: PageSnapshot,
    standard: str = "both",
) -> ConfusionMatrix:
    """Confusion counts at frame granularity for AdChoices and container
    granularity for feed-style ads. Raises EvaluationError when the truth
    labels don't cover the considered candidates."""
    if standard == "adchoices":
        return _evaluate_adchoices(report, snap)
    if standard == "feed-style":
        return _evaluate_feed(report, snap)
    if standard == "both":
        return _evaluate_adchoices(report, snap) + _evaluate_feed(report, snap)
    raise ValueError(f"unknown standard {standard!r}")
