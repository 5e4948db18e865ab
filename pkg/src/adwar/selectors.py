"""CSS-selector subset: tag / #id / .class / [attr="value"] compounds joined
by descendant or child combinators.

This covers the element-hiding rules the filter engine supports and the
container queries used elsewhere. Anything outside the grammar
(pseudo-classes, sibling combinators, attribute operators like ~=) is
rejected at parse time, never silently mis-matched.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .snapshot import FrameInfo

__all__ = [
    "SelectorParseError",
    "AttrTerm",
    "Compound",
    "SelectorExpr",
    "parse_selector",
    "match_selector",
    "compound_matches",
]


class SelectorParseError(ValueError):
    pass


_IDENT_RE = re.compile(r"[A-Za-z_][-\w]*|-[A-Za-z_][-\w]*")
_TAG_RE = re.compile(r"[A-Za-z][-\w]*")


@dataclass(frozen=True)
class AttrTerm:
    name: str
    value: str


@dataclass(frozen=True)
class Compound:
    """One simple-selector group: optional tag plus id/class/attr terms."""

    tag: str | None = None
    ident: str | None = None
    classes: tuple[str, ...] = ()
    attrs: tuple[AttrTerm, ...] = ()

    def __str__(self) -> str:
        parts = [self.tag or ""]
        if self.ident is not None:
            parts.append(f"#{self.ident}")
        parts.extend(f".{c}" for c in self.classes)
        parts.extend(f'[{a.name}="{a.value}"]' for a in self.attrs)
        out = "".join(parts)
        return out


@dataclass(frozen=True)
class SelectorExpr:
    """Compounds right-to-left joined by ' ' (descendant) or '>' (child)."""

    compounds: tuple[Compound, ...]
    combinators: tuple[str, ...]  # len(compounds) - 1 entries, each ' ' or '>'

    def __str__(self) -> str:
        out = [str(self.compounds[0])]
        for comb, comp in zip(self.combinators, self.compounds[1:]):
            out.append(" " if comb == " " else " > ")
            out.append(str(comp))
        return "".join(out)


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def eof(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self) -> str:
        ch = self.text[self.pos]
        self.pos += 1
        return ch

    def match_re(self, pattern: re.Pattern) -> str | None:
        m = pattern.match(self.text, self.pos)
        if not m:
            return None
        self.pos = m.end()
        return m.group(0)

    def fail(self, why: str):
        raise SelectorParseError(f"{why} at offset {self.pos} in {self.text!r}")


def _parse_compound(sc: _Scanner) -> Compound:
    tag = None
    ident = None
    classes: list[str] = []
    attrs: list[AttrTerm] = []
    start = sc.pos
    m = sc.match_re(_TAG_RE)
    if m:
        tag = m.lower()
    while not sc.eof():
        ch = sc.peek()
        if ch == "#":
            sc.take()
            name = sc.match_re(_IDENT_RE)
            if not name:
                sc.fail("expected identifier after '#'")
            if ident is not None:
                sc.fail("multiple #id terms")
            ident = name
        elif ch == ".":
            sc.take()
            name = sc.match_re(_IDENT_RE)
            if not name:
                sc.fail("expected identifier after '.'")
            classes.append(name)
        elif ch == "[":
            sc.take()
            name = sc.match_re(_IDENT_RE)
            if not name:
                sc.fail("expected attribute name")
            if sc.peek() != "=":
                sc.fail("only [attr=\"value\"] attribute tests are supported")
            sc.take()
            quote = sc.peek()
            if quote not in ("'", '"'):
                sc.fail("attribute value must be quoted")
            sc.take()
            value_chars = []
            while not sc.eof() and sc.peek() != quote:
                value_chars.append(sc.take())
            if sc.eof():
                sc.fail("unterminated attribute value")
            sc.take()
            if sc.peek() != "]":
                sc.fail("expected ']'")
            sc.take()
            attrs.append(AttrTerm(name.lower(), "".join(value_chars)))
        elif ch in (":",):
            sc.fail("pseudo-classes are not supported")
        else:
            break
    if sc.pos == start:
        sc.fail("empty compound selector")
    return Compound(tag=tag, ident=ident, classes=tuple(classes), attrs=tuple(attrs))


def parse_selector(text: str) -> SelectorExpr:
    """Parse a selector; SelectorParseError on anything outside the grammar.

    str(parse_selector(s)) is a fixed point: formatting then re-parsing
    yields the same expression.
    """
    if not isinstance(text, str) or not text.strip():
        raise SelectorParseError(f"empty selector {text!r}")
    sc = _Scanner(text.strip())
    compounds = [_parse_compound(sc)]
    combinators: list[str] = []
    while not sc.eof():
        saw_space = False
        while sc.peek() == " ":
            sc.take()
            saw_space = True
        if sc.eof():
            break
        if sc.peek() == ">":
            sc.take()
            while sc.peek() == " ":
                sc.take()
            combinators.append(">")
        elif saw_space:
            combinators.append(" ")
        else:
            sc.fail(f"unexpected {sc.peek()!r}")
        compounds.append(_parse_compound(sc))
    return SelectorExpr(tuple(compounds), tuple(combinators))


def compound_matches(node, comp: Compound) -> bool:
    """Does one element node satisfy one compound? Text nodes never match."""
    if node.is_text:
        return False
    if comp.tag is not None and node.tag != comp.tag:
        return False
    if comp.ident is not None and node.attr("id") != comp.ident:
        return False
    if comp.classes:
        have = set(node.classes)
        if not all(c in have for c in comp.classes):
            return False
    for at in comp.attrs:
        if node.attr(at.name) != at.value:
            return False
    return True


def match_selector(frame: FrameInfo, sel: SelectorExpr) -> set[int]:
    """All node ids matched under standard descendant/child semantics.

    The rightmost compound must match the node itself; earlier compounds
    match along its ancestor chain.
    """
    compounds = sel.compounds
    combinators = sel.combinators
    memo: dict[tuple[int, int], bool] = {}

    def chain_ok(nid: int, idx: int) -> bool:
        # compounds[idx] already matched at nid; satisfy compounds[:idx].
        if idx == 0:
            return True
        key = (nid, idx)
        if key in memo:
            return memo[key]
        comb = combinators[idx - 1]
        want = compounds[idx - 1]
        result = False
        if comb == ">":
            pid = frame.parent_id(nid)
            if pid is not None and compound_matches(frame.node(pid), want):
                result = chain_ok(pid, idx - 1)
        else:
            for aid in frame.ancestors(nid):
                if compound_matches(frame.node(aid), want) and chain_ok(aid, idx - 1):
                    result = True
                    break
        memo[key] = result
        return result

    last = compounds[-1]
    out: set[int] = set()
    for nid, node in frame.nodes.items():
        if compound_matches(node, last) and chain_ok(nid, len(compounds) - 1):
            out.add(nid)
    return out
