"""Commitments and their lifecycle.

A commitment C(debtor, creditor, antecedent, consequent) means: the debtor
is answerable to the creditor for bringing about the consequent once the
antecedent holds.  Its state evolves only along the transition table below;
every transition records the sequence number of the event that caused it,
so any state a commitment is in can be traced back to concrete events.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from .propositions import Proposition, Top, render


class CommitmentState(enum.Enum):
    CONDITIONAL = "Conditional"
    DETACHED = "Detached"
    DISCHARGED = "Discharged"
    RELEASED = "Released"
    CANCELLED = "Cancelled"
    VIOLATED = "Violated"
    EXPIRED = "Expired"
    DELEGATED = "Delegated"
    ASSIGNED = "Assigned"


_S = CommitmentState

# every state not listed as a source is terminal
TRANSITIONS: dict[CommitmentState, frozenset[CommitmentState]] = {
    _S.CONDITIONAL: frozenset(
        {_S.DETACHED, _S.DISCHARGED, _S.RELEASED, _S.CANCELLED, _S.EXPIRED, _S.DELEGATED, _S.ASSIGNED}
    ),
    _S.DETACHED: frozenset(
        {_S.DISCHARGED, _S.RELEASED, _S.VIOLATED, _S.DELEGATED, _S.ASSIGNED}
    ),
    _S.DISCHARGED: frozenset(),
    _S.RELEASED: frozenset(),
    _S.CANCELLED: frozenset(),
    _S.VIOLATED: frozenset(),
    _S.EXPIRED: frozenset(),
    _S.DELEGATED: frozenset(),
    _S.ASSIGNED: frozenset(),
}

ACTIVE_STATES = frozenset({_S.CONDITIONAL, _S.DETACHED})
TERMINAL_STATES = frozenset(s for s, outs in TRANSITIONS.items() if not outs)

# states under which a commitment counts as holding for condition purposes:
# still in force, or already fulfilled
HOLDING_STATES = frozenset({_S.CONDITIONAL, _S.DETACHED, _S.DISCHARGED})


def can_transition(src: CommitmentState, dst: CommitmentState) -> bool:
    return dst in TRANSITIONS[src]


@dataclass(frozen=True)
class Commitment:
    """One commitment instance inside a social state.

    `order` is the creation index used for deterministic iteration.
    `created_by` is the seq of the causing event; `derived_from` links a
    commitment the engine produced out of another one (detach of a nested
    commitment, delegation, assignment) back to its origin.  `history`
    records (event seq, state entered).  `initial_consequent` keeps the
    consequent as it was at creation; detaching may specialise the live
    consequent by substituting the antecedent's witness.
    """

    id: str
    order: int
    debtor: str
    creditor: str
    antecedent: Proposition
    consequent: Proposition
    state: CommitmentState
    created_by: int
    history: tuple[tuple[int, CommitmentState], ...]
    initial_consequent: Proposition
    derived_from: str | None = None

    @property
    def active(self) -> bool:
        return self.state in ACTIVE_STATES

    @property
    def terminal(self) -> bool:
        return self.state in TERMINAL_STATES

    def with_state(self, new_state: CommitmentState, cause_seq: int) -> "Commitment":
        if not can_transition(self.state, new_state):
            raise ValueError(
                f"illegal transition {self.state.value} -> {new_state.value} "
                f"for commitment {self.id}"
            )
        return replace(
            self,
            state=new_state,
            history=self.history + ((cause_seq, new_state),),
        )

    def with_consequent(self, consequent: Proposition) -> "Commitment":
        return replace(self, consequent=consequent)

    def content_key(self) -> tuple[str, str, str, str]:
        """Identity of the commitment by its creation-time content.

        Two principals' views of the same commitment agree on this key even
        after one of them has seen it detach and specialise."""
        return (
            self.debtor,
            self.creditor,
            render(self.antecedent),
            render(self.initial_consequent),
        )

    def display_content(self) -> tuple[str, str, str, str]:
        """Current content with a detached commitment shown unconditionally."""
        antecedent = Top() if self.state is _S.DETACHED else self.antecedent
        return (self.debtor, self.creditor, render(antecedent), render(self.consequent))

    def render(self) -> str:
        return "C({}, {}, {}, {})".format(
            self.debtor, self.creditor, render(self.antecedent), render(self.consequent)
        )
