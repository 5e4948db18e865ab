"""Shared test helpers: a compact tree-builder for hand-written snapshot
fixtures, plus per-criterion result lines for the acceptance module."""

from __future__ import annotations

import random

import pytest

from adwar.snapshot import (
    DomNode,
    FrameInfo,
    ImageBitmap,
    LayoutBox,
    PageSnapshot,
    StyleMap,
    build_frame,
)


def n(tag, *children, **kw):
    """Node spec for make_frame: n('div', n('#text', text='hi'), id='x')."""
    return (tag, children, kw)


def make_frame(spec, url="https://example.com/", is_ad_iframe=None) -> FrameInfo:
    """Build a FrameInfo from nested n() specs; ids assigned in document
    order starting at 1."""
    nodes: list[DomNode] = []
    counter = [0]

    def walk_preorder(item, out):
        tag, children, kw = item
        counter[0] += 1
        nid = counter[0]
        out.append((nid, item))
        kw["_nid"] = nid
        kw["_child_ids"] = []
        for c in children:
            kw["_child_ids"].append(walk_preorder(c, out))
        return nid

    counter[0] = 0
    order: list[tuple[int, tuple]] = []
    walk_preorder(spec, order)
    for nid, (tag, children, kw) in order:
        attrs = []
        if kw.get("id"):
            attrs.append(("id", kw["id"]))
        if kw.get("cls"):
            attrs.append(("class", kw["cls"]))
        if kw.get("href"):
            attrs.append(("href", kw["href"]))
        attrs.extend(kw.get("attrs", ()))
        nodes.append(
            DomNode(
                node_id=nid,
                tag=tag,
                attrs=tuple(attrs),
                text=kw.get("text", ""),
                children=tuple(kw["_child_ids"]),
                layout=LayoutBox(
                    kw.get("x", 0.0), kw.get("y", 0.0),
                    kw.get("w", 0.0), kw.get("h", 0.0),
                    kw.get("visible", True),
                ),
                style=kw.get("style", StyleMap()),
                image_ref=kw.get("image_ref"),
                handlers=frozenset(kw.get("handlers", ())),
            )
        )
    return build_frame(url, nodes, is_ad_iframe)


def make_snapshot(
    *frames: FrameInfo,
    url="https://example.com/",
    viewport=(1280, 900),
    images: dict[str, ImageBitmap] | None = None,
) -> PageSnapshot:
    return PageSnapshot(
        url=url,
        viewport=viewport,
        frames=tuple(frames),
        images=images or {},
    )


def random_tree_frame(rng: random.Random, n_nodes: int = 30,
                      url="https://example.com/") -> FrameInfo:
    """Random DOM tree with random tags/ids/classes/attrs for oracle tests."""
    tags = ["div", "span", "a", "p", "ul", "li", "section"]
    classes = ["ad", "feed", "item", "nav", "promo"]
    nodes: list[DomNode] = []
    for nid in range(1, n_nodes + 1):
        attrs = []
        if rng.random() < 0.3:
            attrs.append(("id", f"id{rng.randint(0, 9)}"))
        if rng.random() < 0.5:
            attrs.append(
                ("class", " ".join(rng.sample(classes, rng.randint(1, 2))))
            )
        if rng.random() < 0.2:
            attrs.append(("data-k", str(rng.randint(0, 3))))
        nodes.append(
            DomNode(node_id=nid, tag=rng.choice(tags), attrs=tuple(attrs))
        )
    # random tree shape: parent of i drawn from earlier nodes
    children: dict[int, list[int]] = {nid: [] for nid in range(1, n_nodes + 1)}
    for nid in range(2, n_nodes + 1):
        children[rng.randint(1, nid - 1)].append(nid)
    from dataclasses import replace

    nodes = [replace(node, children=tuple(children[node.node_id])) for node in nodes]
    return build_frame(url, nodes)


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        print(f"\nACCEPTANCE {name}: {report.outcome.upper()}")
