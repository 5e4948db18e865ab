"""State machine semantics and the tool-systematization dataset."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adwar.armsrace import (
    EFFORT_SYMBOLS,
    MINI_RACES,
    PROPERTY_COLUMNS,
    TRANSITIONS,
    ArmsState,
    IllegalTransitionError,
    Mark,
    Technique,
    ToolProfile,
    TransitionEvent,
    apply_transition,
    bundled_tool_profiles,
    classify_tool,
    profile_from_dict,
    simulate,
)

S1, S2, S3, S4 = ArmsState


def test_named_transitions():
    assert apply_transition(S2, Technique.DEPLOY_DETECTION) is S3
    assert apply_transition(S1, Technique.INSTALL_OR_IMPROVE_BLOCKER) is S2
    assert apply_transition(S2, Technique.OBFUSCATE_ADS) is S1
    assert apply_transition(S3, Technique.STEALTH) is S2
    assert apply_transition(S3, Technique.ACTIVE_BLOCK) is S4
    assert apply_transition(S4, Technique.OBFUSCATE_DETECTOR) is S3


def test_popup_nudge_block_is_identity():
    for state in ArmsState:
        assert apply_transition(state, Technique.POPUP_NUDGE_BLOCK) is state


def test_illegal_moves_error_naming_state_and_technique():
    with pytest.raises(IllegalTransitionError, match="deploy-detection.*S4"):
        apply_transition(S4, Technique.DEPLOY_DETECTION)
    with pytest.raises(IllegalTransitionError):
        apply_transition(S1, Technique.STEALTH)


def test_exhaustive_enumeration_matches_the_six_edges():
    """All (state, technique) pairs: exactly 6 state-changing moves, the
    no-op everywhere, errors elsewhere."""
    changing = []
    noop = 0
    illegal = 0
    for state in ArmsState:
        for technique in Technique:
            try:
                new = apply_transition(state, technique)
            except IllegalTransitionError:
                illegal += 1
                continue
            if new is state:
                noop += 1
            else:
                changing.append((state, new, technique))
    assert len(changing) == 6
    assert noop == 4  # popup-nudge-block in each state
    assert illegal == 4 * 7 - 6 - 4
    assert {(a.value, b.value) for a, b, _ in changing} == {
        ("S1", "S2"), ("S2", "S1"), ("S2", "S3"),
        ("S3", "S2"), ("S3", "S4"), ("S4", "S3"),
    }


def test_no_technique_escalates_past_s4():
    for technique in Technique:
        edge = TRANSITIONS[technique]
        if edge is not None:
            assert edge[0] is not S4 or edge[1] is S3


def test_actor_validation():
    with pytest.raises(ValueError):
        TransitionEvent(Technique.STEALTH, actor="publisher")
    TransitionEvent(Technique.STEALTH, actor="user")  # fine


@given(st.lists(st.sampled_from(list(Technique)), max_size=30))
@settings(max_examples=200, deadline=None)
def test_closure_random_legal_sequences_stay_in_state_set(events):
    state = S1
    for technique in events:
        try:
            state = apply_transition(state, technique)
        except IllegalTransitionError:
            continue
        assert state in ArmsState


def test_simulate_trace():
    trace = simulate(
        [Technique.INSTALL_OR_IMPROVE_BLOCKER, Technique.DEPLOY_DETECTION,
         Technique.STEALTH],
    )
    assert [s.value for s in trace] == ["S1", "S2", "S3", "S2"]


# ---------------------------------------------------------------------------
# Table 2 dataset


# Independent copy of the systematization table (name, transition, six goal
# marks, effort order) used to check the bundled dataset cell-for-cell.
REFERENCE_ROWS = [
    ("Filter list", "S1->S2", "yes", "no", "no", "no", "no", "yes", "F+T"),
    ("Perceptual", "S1->S2", "no", "yes", "yes", "no", "partial", "yes", "D"),
    ("Rootkit-style", "S3->S2", "no", "n/a", "n/a", "partial", "yes", "yes", "B"),
    ("Shadow copy-based", "S3->S2", "no", "n/a", "n/a", "yes", "partial", "no", "1"),
    ("Namespace overwriter", "S3->S4", "no", "no", "no", "no", "no", "yes", "S"),
    ("Signature-based", "S3->S4", "partial", "no", "no", "no", "yes", "partial", "S"),
    ("Differential execution-based", "S3->S4", "no", "yes", "yes", "yes", "partial", "no", "1"),
]


def test_bundled_dataset_matches_reference_cell_for_cell():
    rows = bundled_tool_profiles()
    assert len(rows) == 7
    for profile, ref in zip(rows, REFERENCE_ROWS):
        name, transition, *marks, effort = ref
        assert profile.name == name
        assert f"{profile.transition[0].value}->{profile.transition[1].value}" == transition
        assert tuple(m.value for m in profile.properties) == tuple(marks)
        assert profile.effort_order == effort


def test_tool_rows_classify_into_their_mini_races():
    by_name = {p.name: p for p in bundled_tool_profiles()}
    assert classify_tool(by_name["Filter list"]).mini_race == 1
    assert by_name["Filter list"].effort_order == "F+T"
    rootkit = classify_tool(by_name["Rootkit-style"])
    assert rootkit.mini_race == 2 and rootkit.known_row
    assert by_name["Rootkit-style"].effort_order == "B"
    assert classify_tool(by_name["Signature-based"]).mini_race == 3


def test_unknown_transition_is_an_error():
    bogus = ToolProfile(
        name="Imaginary",
        transition=(S2, S4),
        properties=tuple([Mark.NO] * len(PROPERTY_COLUMNS)),
        effort_order="1",
    )
    with pytest.raises(ValueError, match="S2->S4"):
        classify_tool(bogus)


def test_conflicting_profile_reports_cells():
    base = bundled_tool_profiles()[0].to_dict()
    base["blocks_tracking"] = "no"  # dataset says yes for the filter list
    profile = profile_from_dict(base)
    result = classify_tool(profile)
    assert result.known_row
    assert any("blocks_tracking" in c for c in result.conflicts)


def test_effort_orders_use_known_symbols():
    for profile in bundled_tool_profiles():
        for term in profile.effort_order.split("+"):
            assert term in EFFORT_SYMBOLS


def test_mini_races_partition_the_edges():
    edges = set()
    for pair in MINI_RACES.values():
        assert len(pair) == 2
        edges |= pair
    assert len(edges) == 6
