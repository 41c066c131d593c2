"""Lifecycle rules and commitment bookkeeping."""

import pytest

from commitlab import (
    ACTIVE_STATES,
    TERMINAL_STATES,
    TRANSITIONS,
    Commitment,
    CommitmentState,
    Top,
    can_transition,
)
from commitlab.propositions import EventAtom, Literal

from oracles import LIFECYCLE


def make(state=CommitmentState.CONDITIONAL, **overrides):
    base = dict(
        id="k1",
        order=0,
        debtor="a",
        creditor="b",
        antecedent=EventAtom("go", ()),
        consequent=EventAtom("done", ()),
        state=state,
        created_by=1,
        history=((1, state),),
        initial_consequent=EventAtom("done", ()),
    )
    base.update(overrides)
    return Commitment(**base)


def test_transition_table_matches_oracle():
    for src_name, allowed in LIFECYCLE.items():
        src = CommitmentState(src_name)
        for dst in CommitmentState:
            assert can_transition(src, dst) == (dst.value in allowed), (src, dst)


def test_every_state_classified():
    for state in CommitmentState:
        terminal = not TRANSITIONS[state]
        assert (state in TERMINAL_STATES) == terminal
        assert (state in ACTIVE_STATES) == (
            state in (CommitmentState.CONDITIONAL, CommitmentState.DETACHED)
        )


def test_with_state_appends_history():
    c = make()
    c2 = c.with_state(CommitmentState.DETACHED, 7)
    assert c2.state is CommitmentState.DETACHED
    assert c2.history == ((1, CommitmentState.CONDITIONAL), (7, CommitmentState.DETACHED))
    assert c.state is CommitmentState.CONDITIONAL  # original untouched


def test_illegal_transition_rejected():
    c = make(state=CommitmentState.DISCHARGED)
    with pytest.raises(ValueError):
        c.with_state(CommitmentState.VIOLATED, 9)
    with pytest.raises(ValueError):
        make().with_state(CommitmentState.VIOLATED, 9)  # Conditional cannot violate


def test_content_key_survives_detach_substitution():
    c = make()
    detached = c.with_state(CommitmentState.DETACHED, 2).with_consequent(
        EventAtom("done", (Literal(1),))
    )
    assert detached.content_key() == c.content_key()


def test_display_content_shows_detached_as_unconditional():
    c = make().with_state(CommitmentState.DETACHED, 2)
    _, _, antecedent, _ = c.display_content()
    assert antecedent == "top"
    _, _, conditional_antecedent, _ = make().display_content()
    assert conditional_antecedent == "go"


def test_active_and_terminal_flags():
    assert make().active and not make().terminal
    done = make(state=CommitmentState.DISCHARGED, history=((1, CommitmentState.DISCHARGED),))
    assert done.terminal and not done.active


def test_render_mentions_all_parts():
    text = make().render()
    assert text == "C(a, b, go, done)"


def test_top_antecedent_renders():
    c = make(antecedent=Top())
    assert c.render() == "C(a, b, top, done)"
