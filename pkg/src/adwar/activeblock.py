"""Signature-based neutralization of anti-adblock detector scripts.

A signature is a site-scoped regular expression over script source plus the
patch that disables what it found: forcing a function's return value,
emptying a function body, splicing replacement text, or emitting a
bait-element-removal directive for the DOM side to act on. Patching is
purely textual and conservative: a patch that would unbalance the script's
delimiters is rolled back and reported rather than shipped corrupt, and
re-running the patcher over its own output applies nothing new.
"""

from __future__ import annotations

import enum
import fnmatch
import json
import re
from dataclasses import dataclass, field

__all__ = [
    "SignatureError",
    "ActionKind",
    "PatchAction",
    "Signature",
    "parse_signatures",
    "signatures_to_json",
    "AppliedAction",
    "RemovalDirective",
    "RewriteResult",
    "scan_and_patch",
    "DetectorCategory",
    "DetectorClass",
    "classify_detector",
    "scan_balanced",
]


class SignatureError(ValueError):
    pass


class ActionKind(enum.Enum):
    FORCE_RETURN = "force-return"
    REMOVE_BAIT = "remove-bait"
    REPLACE_SPAN = "replace-span"
    NOP_FUNCTION = "nop-function"


@dataclass(frozen=True)
class PatchAction:
    kind: ActionKind
    replacement: str = ""  # force-return literal / replace-span text
    selector: str = ""  # remove-bait: selector of the bait element

    def __post_init__(self):
        if self.kind in (ActionKind.FORCE_RETURN, ActionKind.REPLACE_SPAN):
            if not self.replacement:
                raise SignatureError(f"{self.kind.value} needs replacement text")
        if self.kind is ActionKind.REMOVE_BAIT and not self.selector:
            raise SignatureError("remove-bait needs a selector")


@dataclass(frozen=True)
class Signature:
    sig_id: str
    site: str  # host suffix or glob; "" or "*" applies everywhere
    pattern: re.Pattern
    action: PatchAction
    notes: str = ""

    def applies_to(self, host: str) -> bool:
        host = host.lower()
        site = self.site.lower()
        if site in ("", "*"):
            return True
        if any(ch in site for ch in "*?["):
            return fnmatch.fnmatch(host, site)
        return host == site or host.endswith("." + site)

    def to_dict(self) -> dict:
        action: dict = {"kind": self.action.kind.value}
        if self.action.replacement:
            action["replacement"] = self.action.replacement
        if self.action.selector:
            action["selector"] = self.action.selector
        return {
            "id": self.sig_id,
            "site": self.site,
            "pattern": self.pattern.pattern,
            "action": action,
            "notes": self.notes,
        }


def parse_signatures(text: str) -> list[Signature]:
    """Parse a signature file (JSON list). Bad regexes and duplicate ids
    are hard errors naming the signature."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SignatureError(f"signature file is not valid JSON: {exc}") from exc
    if not isinstance(doc, list):
        raise SignatureError("signature file must be a JSON list")
    out: list[Signature] = []
    seen: set[str] = set()
    for i, row in enumerate(doc):
        sig_id = str(row.get("id", f"sig{i}"))
        if sig_id in seen:
            raise SignatureError(f"duplicate signature id {sig_id!r}")
        seen.add(sig_id)
        try:
            pattern = re.compile(row["pattern"], re.DOTALL)
        except re.error as exc:
            raise SignatureError(f"signature {sig_id!r}: bad regex: {exc}") from exc
        action_raw = row.get("action", {})
        try:
            action = PatchAction(
                kind=ActionKind(action_raw.get("kind", "")),
                replacement=action_raw.get("replacement", ""),
                selector=action_raw.get("selector", ""),
            )
        except (ValueError, KeyError) as exc:
            raise SignatureError(f"signature {sig_id!r}: bad action: {exc}") from exc
        out.append(
            Signature(
                sig_id=sig_id,
                site=str(row.get("site", "")),
                pattern=pattern,
                action=action,
                notes=str(row.get("notes", "")),
            )
        )
    return out


def signatures_to_json(sigs: list[Signature]) -> str:
    return json.dumps([s.to_dict() for s in sigs], indent=2) + "\n"


# ---------------------------------------------------------------------------
# Source scanning helpers


def _code_mask(source: str) -> list[bool]:
    """True for positions that are real code (not inside a string literal
    or comment). Handles ' \" ` strings with escapes, // and /* */."""
    mask = [True] * len(source)
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch in ("'", '"', "`"):
            quote = ch
            mask[i] = True  # the delimiter itself counts as code
            i += 1
            while i < n:
                if source[i] == "\\":
                    mask[i] = False
                    if i + 1 < n:
                        mask[i + 1] = False
                    i += 2
                    continue
                if source[i] == quote:
                    break
                mask[i] = False
                i += 1
            i += 1
        elif ch == "/" and i + 1 < n and source[i + 1] == "/":
            while i < n and source[i] != "\n":
                mask[i] = False
                i += 1
        elif ch == "/" and i + 1 < n and source[i + 1] == "*":
            end = source.find("*/", i + 2)
            end = n if end < 0 else end + 2
            for j in range(i, min(end, n)):
                mask[j] = False
            i = end
        else:
            i += 1
    return mask


def scan_balanced(source: str) -> bool:
    """Are (), {}, [] balanced outside strings and comments?"""
    mask = _code_mask(source)
    stack: list[str] = []
    pairs = {")": "(", "}": "{", "]": "["}
    for i, ch in enumerate(source):
        if not mask[i]:
            continue
        if ch in "({[":
            stack.append(ch)
        elif ch in ")}]":
            if not stack or stack[-1] != pairs[ch]:
                return False
            stack.pop()
    return not stack


def _find_body_span(source: str, from_pos: int) -> tuple[int, int] | None:
    """(open_brace, close_brace) of the first brace-balanced block at or
    after from_pos, honoring strings/comments. None when absent/unclosed."""
    mask = _code_mask(source)
    open_pos = -1
    for i in range(from_pos, len(source)):
        if mask[i] and source[i] == "{":
            open_pos = i
            break
    if open_pos < 0:
        return None
    depth = 0
    for i in range(open_pos, len(source)):
        if not mask[i]:
            continue
        if source[i] == "{":
            depth += 1
        elif source[i] == "}":
            depth -= 1
            if depth == 0:
                return open_pos, i
    return None


# ---------------------------------------------------------------------------
# Rewriting


@dataclass(frozen=True)
class AppliedAction:
    sig_id: str
    kind: ActionKind
    span: tuple[int, int]  # matched span in the ORIGINAL source
    status: str  # applied | rolled-back | no-body-found


@dataclass(frozen=True)
class RemovalDirective:
    sig_id: str
    selector: str


@dataclass
class RewriteResult:
    script_id: str
    rewritten: str
    actions: list[AppliedAction] = field(default_factory=list)
    directives: list[RemovalDirective] = field(default_factory=list)
    balance: str = "ok"  # ok | input-unbalanced

    @property
    def modified(self) -> bool:
        return any(
            a.status == "applied" and a.kind is not ActionKind.REMOVE_BAIT
            for a in self.actions
        )

    def to_dict(self) -> dict:
        return {
            "script_id": self.script_id,
            "actions": [
                {"id": a.sig_id, "kind": a.kind.value, "span": list(a.span),
                 "status": a.status}
                for a in self.actions
            ],
            "directives": [
                {"id": d.sig_id, "selector": d.selector} for d in self.directives
            ],
            "balance": self.balance,
        }


def _plan_matches(source: str, host: str, sigs: list[Signature]):
    """Leftmost non-overlapping matches per applicable signature; spans
    claimed in signature order, then sorted ascending for application."""
    claimed: list[tuple[int, int]] = []
    planned = []
    for sig in sigs:
        if not sig.applies_to(host):
            continue
        for m in sig.pattern.finditer(source):
            span = m.span()
            if span[0] == span[1]:
                continue
            if any(not (span[1] <= s or e <= span[0]) for s, e in claimed):
                continue
            claimed.append(span)
            planned.append((span, sig))
    planned.sort(key=lambda it: it[0])
    return planned


def scan_and_patch(source: str, host: str, sigs: list[Signature],
                   script_id: str = "<script>") -> RewriteResult:
    """Apply every applicable signature to one script.

    Span actions splice text; force-return / nop-function locate the
    function body by brace counting from the match and rewrite it. After
    each splice the whole output must still pass the balanced-delimiter
    check or that single patch is rolled back and flagged. Actions whose
    replacement already equals the current text are skipped, which is what
    makes the patcher a fixed point on its own output.
    """
    result = RewriteResult(script_id=script_id, rewritten=source)
    input_balanced = scan_balanced(source)
    if not input_balanced:
        result.balance = "input-unbalanced"

    planned = _plan_matches(source, host, sigs)
    # Apply right-to-left so earlier spans stay valid in the working text.
    working = source
    for span, sig in reversed(planned):
        start, end = span
        action = sig.action
        if action.kind is ActionKind.REMOVE_BAIT:
            result.directives.append(RemovalDirective(sig.sig_id, action.selector))
            result.actions.append(AppliedAction(sig.sig_id, action.kind, span, "applied"))
            continue
        if action.kind is ActionKind.REPLACE_SPAN:
            if working[start:end] == action.replacement:
                continue  # already patched
            candidate = working[:start] + action.replacement + working[end:]
        else:  # FORCE_RETURN / NOP_FUNCTION: rewrite the function body
            body = _find_body_span(working, start)
            if body is None:
                result.actions.append(
                    AppliedAction(sig.sig_id, action.kind, span, "no-body-found")
                )
                continue
            open_pos, close_pos = body
            new_body = (
                f"return {action.replacement};"
                if action.kind is ActionKind.FORCE_RETURN
                else ""
            )
            if working[open_pos + 1 : close_pos] == new_body:
                continue  # already patched
            candidate = working[: open_pos + 1] + new_body + working[close_pos:]
        if input_balanced and not scan_balanced(candidate):
            result.actions.append(
                AppliedAction(sig.sig_id, action.kind, span, "rolled-back")
            )
            continue
        working = candidate
        result.actions.append(AppliedAction(sig.sig_id, action.kind, span, "applied"))

    result.actions.reverse()  # report in ascending span order
    result.rewritten = working
    return result


# ---------------------------------------------------------------------------
# Detector taxonomy classification


class DetectorCategory(enum.Enum):
    ABSENT_KNOWN_RESOURCE = "absent-known-resource"
    BAIT_AD = "bait-ad"
    SIDE_CHANNEL = "side-channel"


@dataclass(frozen=True)
class DetectorClass:
    category: DetectorCategory
    evidence_span: tuple[int, int]
    evidence: str

    def to_dict(self) -> dict:
        return {
            "category": self.category.value,
            "span": list(self.evidence_span),
            "evidence": self.evidence,
        }


_KNOWN_AD_RESOURCES = re.compile(
    r"doubleclick|googlesyndication|adsbygoogle|googletag(?:services)?"
    r"|pagead2?|moatads|outbrain|taboola|amazon-adsystem",
    re.IGNORECASE,
)
_BAIT_CLASS_TOKENS = re.compile(
    r"adsbox|ad[-_]?banner|banner[-_]?ads?|textads|text[-_]ad|pub_300x250"
    r"|ad[-_]placement|sponsor(?:ed)?[-_]?(?:ad|box)|adbadge|ad_unit",
    re.IGNORECASE,
)
_DIMENSION_CHECKS = re.compile(
    r"offsetHeight|offsetWidth|clientHeight|clientWidth|getComputedStyle"
    r"|getBoundingClientRect",
)
_TIMING_APIS = re.compile(
    r"performance\.now|Date\.now|new\s+Date\(\)\s*\.\s*getTime|getTime\(\)",
)
_LOAD_EVENTS = re.compile(
    r"\bonerror\b|\bonload\b|addEventListener\(\s*['\"](?:error|load)['\"]",
)


def classify_detector(source: str) -> list[DetectorClass]:
    """Heuristic taxonomy of what a detector script checks. Categories can
    co-occur (real sites stack several techniques)."""
    out: list[DetectorClass] = []
    m = _KNOWN_AD_RESOURCES.search(source)
    if m:
        out.append(
            DetectorClass(DetectorCategory.ABSENT_KNOWN_RESOURCE, m.span(), m.group(0))
        )
    m = _BAIT_CLASS_TOKENS.search(source)
    if m and _DIMENSION_CHECKS.search(source):
        out.append(DetectorClass(DetectorCategory.BAIT_AD, m.span(), m.group(0)))
    m = _TIMING_APIS.search(source)
    if m and _LOAD_EVENTS.search(source):
        out.append(DetectorClass(DetectorCategory.SIDE_CHANNEL, m.span(), m.group(0)))
    return out
