"""Selector grammar and matching, checked against a brute-force oracle."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adwar.selectors import (
    SelectorParseError,
    compound_matches,
    match_selector,
    parse_selector,
)

from conftest import make_frame, n, random_tree_frame


def test_parse_format_round_trip_is_idempotent():
    cases = [
        "div#newsfeed div.ad",
        "a.btn.primary[href=\"/x\"]",
        "ul > li > a",
        "#Ad3Right",
        ".feed   >  .item span",
    ]
    for text in cases:
        once = str(parse_selector(text))
        assert str(parse_selector(once)) == once


@pytest.mark.parametrize(
    "bad",
    ["div:hover", "a::before", "div + p", "p ~ span", "[data~=\"x\"]", "", "   ", ">", "div >"],
)
def test_unsupported_syntax_rejected(bad):
    with pytest.raises(SelectorParseError):
        parse_selector(bad)


def test_newsfeed_ad_example():
    # the canonical case: .ad divs inside the #newsfeed div, nothing else
    frame = make_frame(
        n(
            "html",
            n(
                "body",
                n(
                    "div", n("div", cls="ad"), n("div", cls="post"),
                    id="newsfeed",
                ),
                n("div", n("div", cls="ad"), id="other"),
            ),
        )
    )
    got = match_selector(frame, parse_selector("div#newsfeed div.ad"))
    [only] = got
    node = frame.node(only)
    assert node.attr("class") == "ad"
    assert frame.parent_id(only) == 3  # the #newsfeed container


def test_absent_id_matches_nothing():
    frame = make_frame(n("html", n("body", n("div", id="Other"))))
    assert match_selector(frame, parse_selector("#Ad3Right")) == set()


def test_child_vs_descendant():
    frame = make_frame(
        n("html", n("body", n("ul", n("li", n("ul", n("li"))))))
    )
    child = match_selector(frame, parse_selector("body > ul > li"))
    desc = match_selector(frame, parse_selector("body li"))
    assert child == {4}
    assert desc == {4, 6}


def _oracle_match(frame, sel) -> set[int]:
    """Brute-force oracle: per-node predicate walking every ancestor chain
    assignment explicitly (exponential, fine at test sizes)."""

    def chains(nid, idx) -> bool:
        # compounds[idx] matched at nid; try to place compounds[:idx]
        if idx == 0:
            return True
        comb = sel.combinators[idx - 1]
        prev = sel.compounds[idx - 1]
        if comb == ">":
            pid = frame.parent_id(nid)
            return (
                pid is not None
                and compound_matches(frame.node(pid), prev)
                and chains(pid, idx - 1)
            )
        ok = False
        for aid in frame.ancestors(nid):
            if compound_matches(frame.node(aid), prev):
                ok = ok or chains(aid, idx - 1)
        return ok

    out = set()
    for nid, node in frame.nodes.items():
        if compound_matches(node, sel.compounds[-1]) and chains(nid, len(sel.compounds) - 1):
            out.add(nid)
    return out


def _random_selector(rng: random.Random) -> str:
    def compound():
        parts = []
        if rng.random() < 0.6:
            parts.append(rng.choice(["div", "span", "a", "p", "ul", "li", "section"]))
        if rng.random() < 0.3:
            parts.append(f"#id{rng.randint(0, 9)}")
        if rng.random() < 0.5:
            parts.append("." + rng.choice(["ad", "feed", "item", "nav", "promo"]))
        if rng.random() < 0.15:
            parts.append(f'[data-k="{rng.randint(0, 3)}"]')
        if not parts:
            parts.append("div")
        return "".join(parts)

    k = rng.randint(1, 3)
    sel = compound()
    for _ in range(k - 1):
        sel += (" > " if rng.random() < 0.4 else " ") + compound()
    return sel


def test_matches_brute_force_oracle_on_random_instances():
    # >= 1000 random (tree, selector) pairs against the oracle
    rng = random.Random(42)
    checked = 0
    for _ in range(60):
        frame = random_tree_frame(rng, rng.randint(5, 30))
        for _ in range(20):
            sel = parse_selector(_random_selector(rng))
            assert match_selector(frame, sel) == _oracle_match(frame, sel)
            checked += 1
    assert checked >= 1000


@given(st.integers(0, 100_000))
@settings(max_examples=80, deadline=None)
def test_removing_a_node_never_adds_matches(seed):
    """Monotonicity: dropping a leaf can only shrink the match set."""
    rng = random.Random(seed)
    frame = random_tree_frame(rng, rng.randint(4, 25))
    sel = parse_selector(_random_selector(rng))
    before = match_selector(frame, sel)

    from dataclasses import replace

    from adwar.snapshot import build_frame

    leaves = [nid for nid, node in frame.nodes.items()
              if not node.children and nid != frame.root_id]
    if not leaves:
        return
    drop = rng.choice(leaves)
    kept = []
    for nid, node in frame.nodes.items():
        if nid == drop:
            continue
        kept.append(replace(node, children=tuple(c for c in node.children if c != drop)))
    smaller = build_frame(frame.url, kept)
    after = match_selector(smaller, sel)
    assert after <= before
