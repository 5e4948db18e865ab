"""Snapshot parsing, validation, serialization and traversal."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adwar.generator import CorpusSpec, generate_corpus
from adwar.snapshot import (
    SnapshotParseError,
    SnapshotValidationError,
    parse_color,
    parse_snapshot,
    serialize_snapshot,
    traverse,
)

from conftest import make_frame, make_snapshot, n, random_tree_frame


MINIMAL = {
    "format_version": 1,
    "url": "https://example.com/",
    "viewport": {"w": 800, "h": 600},
    "frames": [
        {
            "url": "https://example.com/",
            "nodes": [
                {"id": 1, "tag": "html", "children": [2]},
                {"id": 2, "tag": "body"},
            ],
        }
    ],
    "images": {},
}


def test_minimal_snapshot_parses():
    snap = parse_snapshot(json.dumps(MINIMAL))
    assert len(snap.frames) == 1
    assert len(snap.top_frame.nodes) == 2
    assert snap.top_frame.root.tag == "html"


def test_dangling_image_ref_message():
    doc = json.loads(json.dumps(MINIMAL))
    doc["frames"][0]["nodes"][1]["image_ref"] = "i9"
    with pytest.raises(SnapshotValidationError, match="dangling image-ref i9"):
        parse_snapshot(json.dumps(doc))


def test_unknown_format_version_rejected():
    doc = dict(MINIMAL, format_version=2)
    with pytest.raises(SnapshotValidationError, match="format_version"):
        parse_snapshot(json.dumps(doc))


def test_malformed_json_reports_position():
    with pytest.raises(SnapshotParseError, match="invalid JSON"):
        parse_snapshot(b'{"format_version": 1,')


def test_wrong_type_reports_path():
    doc = dict(MINIMAL, viewport=[800, 600])
    with pytest.raises(SnapshotParseError, match=r"\$\.viewport"):
        parse_snapshot(json.dumps(doc))


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda d: d["frames"][0]["nodes"].append({"id": 1, "tag": "div"}), "duplicate node id"),
        (lambda d: d["frames"][0]["nodes"][0]["children"].append(99), "unknown child id"),
        (lambda d: d["frames"][0]["nodes"].append({"id": 3, "tag": "div"}), "multiple roots"),
        (lambda d: d["frames"][0]["nodes"][0].update(tag="DIV"), "invalid tag"),
        (lambda d: d["frames"][0]["nodes"][1].update(layout={"x": 0, "y": 0, "w": -1, "h": 0}), "negative layout"),
        (lambda d: d.update(frames=[]), "missing top frame"),
        (lambda d: d["frames"][0]["nodes"][1].update(style={"color": "notacolor"}), "unparseable color"),
        (lambda d: d["frames"][0]["nodes"][1].update(style={"Color": "red"}), "not lowercase"),
        (lambda d: d.update(requests=[{"url": "https://x.example/", "frame": 5}]), "out of range"),
    ],
)
def test_validation_errors(mutate, message):
    doc = json.loads(json.dumps(MINIMAL))
    mutate(doc)
    with pytest.raises((SnapshotValidationError, SnapshotParseError), match=message):
        parse_snapshot(json.dumps(doc))


def test_multiple_parent_cycle_detected():
    doc = json.loads(json.dumps(MINIMAL))
    # 2 -> 1 closes a cycle: node 2 gains a child pointing back at the root
    doc["frames"][0]["nodes"][1]["children"] = [1]
    with pytest.raises(SnapshotValidationError, match="multiple parents|no root"):
        parse_snapshot(json.dumps(doc))


def test_color_normalization_forms():
    assert parse_color("#fff") == (255, 255, 255, 255)
    assert parse_color("#336699") == (51, 102, 153, 255)
    assert parse_color("#33669980") == (51, 102, 153, 128)
    assert parse_color("rgb(1, 2, 3)") == (1, 2, 3, 255)
    assert parse_color("rgba(1, 2, 3, 0.5)") == (1, 2, 3, 128)
    assert parse_color("white") == (255, 255, 255, 255)
    assert parse_color([4, 5, 6]) == (4, 5, 6, 255)
    with pytest.raises(ValueError):
        parse_color("#12345")


def test_generator_corpus_round_trips():
    # round-trip oracle: parse(serialize(parse(x))) is byte- and
    # structure-identical over generated snapshots
    for name, snap in generate_corpus(CorpusSpec(count=2), seed=5):
        text = serialize_snapshot(snap)
        reparsed = parse_snapshot(text)
        assert serialize_snapshot(reparsed) == text
        assert reparsed.frames == snap.frames
        assert reparsed.images == snap.images


# ---------------------------------------------------------------------------
# traversal


def test_traverse_empty_exclusions_is_preorder():
    frame = make_frame(
        n("html", n("head"), n("body", n("div", n("span")), n("p")))
    )
    assert traverse(frame) == [1, 2, 3, 4, 5, 6]


def test_traverse_excludes_whole_subtree():
    frame = make_frame(
        n("html", n("head"), n("body", n("div", n("span")), n("p")))
    )
    # excluding body's first child (the div, id 4) removes its subtree
    assert traverse(frame, {4}) == [1, 2, 3, 6]


def test_traverse_visits_each_node_once():
    rng_frame = random_tree_frame(__import__("random").Random(1), 40)
    seq = traverse(rng_frame)
    assert len(seq) == 40
    assert len(set(seq)) == 40


@given(st.integers(0, 10_000), st.integers(5, 40), st.data())
@settings(max_examples=60, deadline=None)
def test_traverse_set_algebra_oracle(seed, size, data):
    """traverse(f, X) equals traverse(f, {}) minus the subtree closure of X,
    order preserved (independent set-subtraction oracle)."""
    import random as _random

    frame = random_tree_frame(_random.Random(seed), size)
    all_ids = sorted(frame.nodes)
    excl = set(data.draw(st.lists(st.sampled_from(all_ids), max_size=4)))
    closure = set()
    for nid in excl:
        closure |= frame.subtree_ids(nid)
    expected = [nid for nid in traverse(frame) if nid not in closure]
    assert traverse(frame, excl) == expected
