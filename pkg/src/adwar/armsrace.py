"""The four-state arms-race model and the tool systematization dataset.

States: S1 ads shown, S2 ads blocked, S3 blocking detected, S4 detector
disabled. Exactly six techniques move between them; blocking popup nudges
changes nothing (a no-op in the model), and nothing escalates past S4:
code running at extension/proxy privilege cannot itself be overwritten,
only evaded. The six edges split the race into three independent
mini-races (blocking vs. ad obfuscation, detection vs. stealth, active
blocking vs. detector obfuscation).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .assets import load_table2

__all__ = [
    "ArmsState",
    "Technique",
    "TransitionEvent",
    "IllegalTransitionError",
    "apply_transition",
    "simulate",
    "Mark",
    "ToolProfile",
    "ToolClassification",
    "classify_tool",
    "bundled_tool_profiles",
    "TRANSITIONS",
    "TECHNIQUE_ACTOR",
    "MINI_RACES",
    "EFFORT_SYMBOLS",
]


class ArmsState(enum.Enum):
    ADS_SHOWN = "S1"
    ADS_BLOCKED = "S2"
    BLOCKING_DETECTED = "S3"
    DETECTOR_DISABLED = "S4"


class Technique(enum.Enum):
    INSTALL_OR_IMPROVE_BLOCKER = "install-or-improve-blocker"
    OBFUSCATE_ADS = "obfuscate-ads"
    DEPLOY_DETECTION = "deploy-detection"
    STEALTH = "stealth"
    ACTIVE_BLOCK = "active-block"
    OBFUSCATE_DETECTOR = "obfuscate-detector"
    POPUP_NUDGE_BLOCK = "popup-nudge-block"


# technique -> (from, to); None marks the no-op technique
TRANSITIONS: dict[Technique, tuple[ArmsState, ArmsState] | None] = {
    Technique.INSTALL_OR_IMPROVE_BLOCKER: (ArmsState.ADS_SHOWN, ArmsState.ADS_BLOCKED),
    Technique.OBFUSCATE_ADS: (ArmsState.ADS_BLOCKED, ArmsState.ADS_SHOWN),
    Technique.DEPLOY_DETECTION: (ArmsState.ADS_BLOCKED, ArmsState.BLOCKING_DETECTED),
    Technique.STEALTH: (ArmsState.BLOCKING_DETECTED, ArmsState.ADS_BLOCKED),
    Technique.ACTIVE_BLOCK: (ArmsState.BLOCKING_DETECTED, ArmsState.DETECTOR_DISABLED),
    Technique.OBFUSCATE_DETECTOR: (ArmsState.DETECTOR_DISABLED, ArmsState.BLOCKING_DETECTED),
    Technique.POPUP_NUDGE_BLOCK: None,
}

TECHNIQUE_ACTOR: dict[Technique, str] = {
    Technique.INSTALL_OR_IMPROVE_BLOCKER: "user",
    Technique.OBFUSCATE_ADS: "publisher",
    Technique.DEPLOY_DETECTION: "publisher",
    Technique.STEALTH: "user",
    Technique.ACTIVE_BLOCK: "user",
    Technique.OBFUSCATE_DETECTOR: "publisher",
    Technique.POPUP_NUDGE_BLOCK: "user",
}

# Each mini-race is one pair of opposed edges.
MINI_RACES: dict[int, frozenset[tuple[ArmsState, ArmsState]]] = {
    1: frozenset({(ArmsState.ADS_SHOWN, ArmsState.ADS_BLOCKED),
                  (ArmsState.ADS_BLOCKED, ArmsState.ADS_SHOWN)}),
    2: frozenset({(ArmsState.ADS_BLOCKED, ArmsState.BLOCKING_DETECTED),
                  (ArmsState.BLOCKING_DETECTED, ArmsState.ADS_BLOCKED)}),
    3: frozenset({(ArmsState.BLOCKING_DETECTED, ArmsState.DETECTOR_DISABLED),
                  (ArmsState.DETECTOR_DISABLED, ArmsState.BLOCKING_DETECTED)}),
}

EFFORT_SYMBOLS = frozenset("FTDSB1")


class IllegalTransitionError(ValueError):
    def __init__(self, state: ArmsState, technique: Technique, why: str = ""):
        self.state = state
        self.technique = technique
        msg = f"technique {technique.value} is illegal in state {state.value}"
        super().__init__(msg + (f": {why}" if why else ""))


@dataclass(frozen=True)
class TransitionEvent:
    technique: Technique
    actor: str = ""  # optional; validated against the technique when given

    def __post_init__(self):
        if self.actor and self.actor != TECHNIQUE_ACTOR[self.technique]:
            raise ValueError(
                f"{self.technique.value} belongs to "
                f"{TECHNIQUE_ACTOR[self.technique]}, not {self.actor}"
            )


def apply_transition(state: ArmsState, event: TransitionEvent | Technique) -> ArmsState:
    """Follow one edge of the state graph; the popup-nudge blocker is an
    identity everywhere (it suppresses the publisher's response, not the
    detection). Illegal (state, technique) pairs raise."""
    technique = event.technique if isinstance(event, TransitionEvent) else event
    edge = TRANSITIONS[technique]
    if edge is None:
        return state
    src, dst = edge
    if state is not src:
        raise IllegalTransitionError(state, technique)
    return dst


def simulate(events, start: ArmsState = ArmsState.ADS_SHOWN) -> list[ArmsState]:
    """Replay an event list; returns the state trace including the start."""
    trace = [start]
    for ev in events:
        trace.append(apply_transition(trace[-1], ev))
    return trace


# ---------------------------------------------------------------------------
# Tool systematization


class Mark(enum.Enum):
    YES = "yes"
    PARTIAL = "partial"
    NO = "no"
    NA = "n/a"


# Table column order for the six goal properties.
PROPERTY_COLUMNS = (
    "blocks_tracking",
    "blocks_new_by_default",
    "resilient_to_obfuscation",
    "undetectable_by_client_scripts",
    "undetectable_by_server",
    "extension_implementable",
)


@dataclass(frozen=True)
class ToolProfile:
    name: str
    transition: tuple[ArmsState, ArmsState]
    properties: tuple[Mark, ...]  # six goal marks in PROPERTY_COLUMNS order
    effort_order: str  # symbolic: terms over {F, T, D, S, B, 1} joined by '+'
    status: str = "existing"  # existing | prototyped | design-only

    def __post_init__(self):
        if len(self.properties) != len(PROPERTY_COLUMNS):
            raise ValueError(
                f"expected {len(PROPERTY_COLUMNS)} property marks, "
                f"got {len(self.properties)}"
            )
        for term in self.effort_order.split("+"):
            if term.strip() not in EFFORT_SYMBOLS:
                raise ValueError(f"bad effort term {term!r} in {self.effort_order!r}")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "transition": f"{self.transition[0].value}->{self.transition[1].value}",
            **{col: mark.value for col, mark in zip(PROPERTY_COLUMNS, self.properties)},
            "effort_order": self.effort_order,
            "status": self.status,
        }


def _parse_transition(text: str) -> tuple[ArmsState, ArmsState]:
    src, _, dst = text.partition("->")
    return ArmsState(src.strip()), ArmsState(dst.strip())


def profile_from_dict(row: dict) -> ToolProfile:
    return ToolProfile(
        name=row["name"],
        transition=_parse_transition(row["transition"]),
        properties=tuple(Mark(row[col]) for col in PROPERTY_COLUMNS),
        effort_order=row["effort_order"],
        status=row.get("status", "existing"),
    )


def bundled_tool_profiles() -> list[ToolProfile]:
    return [profile_from_dict(row) for row in load_table2()]


@dataclass(frozen=True)
class ToolClassification:
    mini_race: int
    known_row: bool
    conflicts: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "mini_race": self.mini_race,
            "known_row": self.known_row,
            "conflicts": list(self.conflicts),
        }


def classify_tool(profile: ToolProfile) -> ToolClassification:
    """Place a tool in its mini arms race and diff it against the bundled
    dataset when the name is known. Unknown transitions (edges not in the
    state graph) are errors."""
    race = next(
        (rid for rid, edges in MINI_RACES.items() if profile.transition in edges),
        None,
    )
    if race is None:
        raise ValueError(
            f"no state-graph edge {profile.transition[0].value}->"
            f"{profile.transition[1].value}"
        )
    conflicts: list[str] = []
    known = False
    for row in bundled_tool_profiles():
        if row.name.lower() != profile.name.lower():
            continue
        known = True
        if row.transition != profile.transition:
            conflicts.append(
                f"transition {profile.transition} != dataset {row.transition}"
            )
        for col, have, want in zip(PROPERTY_COLUMNS, profile.properties, row.properties):
            if have is not want:
                conflicts.append(f"{col}: {have.value} != dataset {want.value}")
        if profile.effort_order != row.effort_order:
            conflicts.append(
                f"effort_order {profile.effort_order!r} != dataset {row.effort_order!r}"
            )
        break
    return ToolClassification(mini_race=race, known_row=known, conflicts=tuple(conflicts))
