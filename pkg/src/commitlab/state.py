"""Social state and its progression.

A SocialState is the set of commitments in force between principals plus
the event history that justifies them.  Everything here is pure: each
operation takes a state and returns a new one, so any state ever observed
can be reproduced by folding the operations over the same events.

The casting (role to principal) also lives in the state.  It is seeded by
scenario setup or learned from the first use of each role, which keeps
traces self-contained and replayable.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .commitments import (
    ACTIVE_STATES,
    HOLDING_STATES,
    Commitment,
    CommitmentState,
)
from .errors import (
    DebtorNotSender,
    FixpointOverflow,
    FreeVariable,
    NotCreditor,
    NotDebtor,
    SelfCommitment,
    TerminalState,
    UnknownCommitment,
)
from .events import Event
from .propositions import (
    CommitmentAtom,
    And,
    Before,
    EventAtom,
    ExistsIn,
    Literal,
    LiteralValue,
    Proposition,
    Term,
    Top,
    TruthStatus,
    Wildcard,
    contains_commitment,
    free_vars,
    role_refs,
    substitute,
)

# occurrence record: (event seq, argument vector)
_Occurrence = tuple[int, tuple[LiteralValue, ...]]


@dataclass(frozen=True)
class SocialState:
    commitments: dict[str, Commitment] = field(default_factory=dict)
    history: tuple[Event, ...] = ()
    casting: tuple[tuple[str, str], ...] = ()
    next_id: int = 1
    # name -> occurrences, derived from history; excluded from equality
    occurrences: dict[str, tuple[_Occurrence, ...]] = field(
        default_factory=dict, compare=False, repr=False
    )

    def casting_map(self) -> dict[str, str]:
        return dict(self.casting)

    def get(self, commitment_id: str) -> Commitment:
        c = self.commitments.get(commitment_id)
        if c is None:
            raise UnknownCommitment(commitment_id)
        return c

    def last_seq(self) -> int:
        return self.history[-1].seq if self.history else 0


def append_event(state: SocialState, ev: Event) -> SocialState:
    """Record an event; seq numbers must strictly increase."""
    if state.history and ev.seq <= state.history[-1].seq:
        raise ValueError(
            f"event seq {ev.seq} does not follow {state.history[-1].seq}"
        )
    occurrences = state.occurrences
    if not ev.name.startswith("@"):
        occurrences = dict(occurrences)
        occurrences[ev.name] = occurrences.get(ev.name, ()) + ((ev.seq, ev.atom_args()),)
    return replace(state, history=state.history + (ev,), occurrences=occurrences)


def with_casting(state: SocialState, role: str, principal: str) -> SocialState:
    current = state.casting_map()
    if role in current:
        if current[role] != principal:
            raise ValueError(
                f"role {role!r} already cast as {current[role]!r}, not {principal!r}"
            )
        return state
    return replace(state, casting=state.casting + ((role, principal),))


# ---------------------------------------------------------------------------
# evaluation


def _args_match(pattern: tuple[Term, ...], actual: tuple[LiteralValue, ...]) -> bool:
    # an argument-free atom matches any occurrence of the name
    if not pattern:
        return True
    if len(pattern) != len(actual):
        return False
    for p, a in zip(pattern, actual):
        if isinstance(p, Wildcard):
            continue
        if not (isinstance(p, Literal) and p.value == a):
            return False
    return True


def _first_occurrence(state: SocialState, atom: EventAtom) -> int | None:
    for seq, args in state.occurrences.get(atom.name, ()):
        if _args_match(atom.args, args):
            return seq
    return None


def evaluate(prop: Proposition, state: SocialState) -> TruthStatus:
    """Three-valued truth of a fully instantiated proposition.

    Satisfied and Violated are final for every variant except commitment
    atoms, whose referents can still be released or cancelled; Pending
    means the history so far decides nothing.
    """
    unresolved = free_vars(prop) | role_refs(prop)
    if unresolved:
        raise FreeVariable(unresolved)
    return _eval(prop, state)


def _eval(prop: Proposition, state: SocialState) -> TruthStatus:
    if isinstance(prop, Top):
        return TruthStatus.SATISFIED
    if isinstance(prop, EventAtom):
        if _first_occurrence(state, prop) is not None:
            return TruthStatus.SATISFIED
        return TruthStatus.PENDING
    if isinstance(prop, CommitmentAtom):
        if _commitment_holds(prop, state):
            return TruthStatus.SATISFIED
        return TruthStatus.PENDING
    if isinstance(prop, And):
        statuses = [_eval(p, state) for p in prop.parts]
        if any(s is TruthStatus.VIOLATED for s in statuses):
            return TruthStatus.VIOLATED
        if all(s is TruthStatus.SATISFIED for s in statuses):
            return TruthStatus.SATISFIED
        return TruthStatus.PENDING
    if isinstance(prop, ExistsIn):
        statuses = []
        for choice in prop.domain:
            bound = substitute(prop.body, {prop.var: choice})  # type: ignore[dict-item]
            statuses.append(_eval(bound, state))
        if any(s is TruthStatus.SATISFIED for s in statuses):
            return TruthStatus.SATISFIED
        # an empty domain offers no way to ever satisfy the choice
        if all(s is TruthStatus.VIOLATED for s in statuses):
            return TruthStatus.VIOLATED
        return TruthStatus.PENDING
    if isinstance(prop, Before):
        second_at = _first_occurrence(state, prop.second)
        if second_at is None:
            return TruthStatus.PENDING
        for seq, args in state.occurrences.get(prop.first.name, ()):
            if seq < second_at and _args_match(prop.first.args, args):
                return TruthStatus.SATISFIED
        return TruthStatus.VIOLATED
    raise TypeError(f"cannot evaluate {prop!r}")


def _commitment_holds(atom: CommitmentAtom, state: SocialState) -> bool:
    """A commitment atom holds if a commitment with that content is in
    force or already fulfilled.

    A detached commitment also counts for the unconditional form of its
    content: once its antecedent held, the expectation it carries is
    exactly the Top-antecedent commitment."""
    assert isinstance(atom.debtor, Literal) and isinstance(atom.creditor, Literal)
    debtor = atom.debtor.value
    creditor = atom.creditor.value
    wants_top = isinstance(atom.antecedent, Top)
    for c in state.commitments.values():
        if c.debtor != debtor or c.creditor != creditor:
            continue
        if c.state not in HOLDING_STATES:
            continue
        if c.consequent != atom.consequent:
            continue
        if c.antecedent == atom.antecedent:
            return True
        if wants_top and c.state in (CommitmentState.DETACHED, CommitmentState.DISCHARGED):
            return True
    return False


def _witnesses(prop: Proposition, state: SocialState) -> dict[str, Term] | None:
    """A substitution for existential variables under which prop is
    Satisfied, or None.  Chooses the first satisfying domain value, so
    detachment is deterministic."""
    if isinstance(prop, Top):
        return {}
    if isinstance(prop, (EventAtom, CommitmentAtom, Before)):
        return {} if _eval(prop, state) is TruthStatus.SATISFIED else None
    if isinstance(prop, And):
        merged: dict[str, Term] = {}
        for p in prop.parts:
            w = _witnesses(p, state)
            if w is None:
                return None
            merged.update(w)
        return merged
    if isinstance(prop, ExistsIn):
        for choice in prop.domain:  # type: ignore[union-attr]
            bound = substitute(prop.body, {prop.var: choice})  # type: ignore[dict-item]
            w = _witnesses(bound, state)
            if w is not None:
                return {prop.var: choice, **w}
        return None
    raise TypeError(f"cannot search witnesses in {prop!r}")


# ---------------------------------------------------------------------------
# elementary operations


def _event_by_seq(state: SocialState, seq: int) -> Event:
    for ev in state.history:
        if ev.seq == seq:
            return ev
    raise ValueError(f"no event with seq {seq} in history")


def _fresh_id(state: SocialState) -> tuple[str, int]:
    n = state.next_id
    while f"k{n}" in state.commitments:
        n += 1
    return f"k{n}", n + 1


def _add_commitment(
    state: SocialState,
    debtor: str,
    creditor: str,
    antecedent: Proposition,
    consequent: Proposition,
    cause: int,
    *,
    birth: CommitmentState | None = None,
    derived_from: str | None = None,
    commitment_id: str | None = None,
) -> SocialState:
    if debtor == creditor:
        raise SelfCommitment(debtor)
    if commitment_id is None:
        commitment_id, next_id = _fresh_id(state)
    else:
        if commitment_id in state.commitments:
            raise ValueError(f"commitment id {commitment_id!r} already in use")
        next_id = state.next_id
    if birth is None:
        birth = (
            CommitmentState.DETACHED
            if isinstance(antecedent, Top)
            else CommitmentState.CONDITIONAL
        )
    c = Commitment(
        id=commitment_id,
        order=len(state.commitments),
        debtor=debtor,
        creditor=creditor,
        antecedent=antecedent,
        consequent=consequent,
        state=birth,
        created_by=cause,
        history=((cause, birth),),
        initial_consequent=consequent,
        derived_from=derived_from,
    )
    commitments = dict(state.commitments)
    commitments[commitment_id] = c
    return replace(state, commitments=commitments, next_id=next_id)


def setup_commitment(
    state: SocialState,
    commitment_id: str | None,
    debtor: str,
    creditor: str,
    antecedent: Proposition,
    consequent: Proposition,
    cause: int,
) -> SocialState:
    """Add a commitment that predates this enactment.

    Scenario setup declarations stand in for commitments created by some
    earlier interaction, so accountability chains may legitimately bottom
    out here rather than at a message of the debtor."""
    return _add_commitment(
        state, debtor, creditor, antecedent, consequent, cause, commitment_id=commitment_id
    )


def create(
    state: SocialState,
    debtor: str,
    creditor: str,
    antecedent: Proposition,
    consequent: Proposition,
    cause: int,
) -> SocialState:
    """Add a commitment on behalf of `debtor`.

    The causing event must be an act of the debtor itself: commitments
    enter the social state through their debtor's communications, which is
    what makes the debtor accountable for them later.
    """
    ev = _event_by_seq(state, cause)
    if ev.sender != debtor:
        raise DebtorNotSender(debtor, ev.sender)
    return _add_commitment(state, debtor, creditor, antecedent, consequent, cause)


def _put(state: SocialState, c: Commitment) -> SocialState:
    commitments = dict(state.commitments)
    commitments[c.id] = c
    return replace(state, commitments=commitments)


def release(state: SocialState, commitment_id: str, by: str) -> SocialState:
    c = state.get(commitment_id)
    if c.terminal:
        raise TerminalState(commitment_id, c.state.value, "release")
    if by != c.creditor:
        raise NotCreditor(commitment_id, by)
    return _put(state, c.with_state(CommitmentState.RELEASED, state.last_seq()))


def cancel(state: SocialState, commitment_id: str, by: str) -> SocialState:
    c = state.get(commitment_id)
    if c.terminal:
        raise TerminalState(commitment_id, c.state.value, "cancel")
    if by != c.debtor:
        raise NotDebtor(commitment_id, by, "cancel")
    # reneging on an already unconditional expectation is a violation
    outcome = (
        CommitmentState.VIOLATED
        if c.state is CommitmentState.DETACHED
        else CommitmentState.CANCELLED
    )
    return _put(state, c.with_state(outcome, state.last_seq()))


def delegate(
    state: SocialState, commitment_id: str, new_debtor: str, by: str, cause: int
) -> SocialState:
    c = state.get(commitment_id)
    if c.terminal:
        raise TerminalState(commitment_id, c.state.value, "delegate")
    if by != c.debtor:
        raise NotDebtor(commitment_id, by, "delegate")
    if new_debtor == c.creditor:
        raise SelfCommitment(new_debtor)
    _event_by_seq(state, cause)
    state = _put(state, c.with_state(CommitmentState.DELEGATED, cause))
    return _add_commitment(
        state,
        new_debtor,
        c.creditor,
        c.antecedent,
        c.consequent,
        cause,
        birth=c.state,
        derived_from=commitment_id,
    )


def assign(
    state: SocialState, commitment_id: str, new_creditor: str, by: str, cause: int
) -> SocialState:
    c = state.get(commitment_id)
    if c.terminal:
        raise TerminalState(commitment_id, c.state.value, "assign")
    if by != c.creditor:
        raise NotCreditor(commitment_id, by)
    if new_creditor == c.debtor:
        raise SelfCommitment(new_creditor)
    _event_by_seq(state, cause)
    state = _put(state, c.with_state(CommitmentState.ASSIGNED, cause))
    return _add_commitment(
        state,
        c.debtor,
        new_creditor,
        c.antecedent,
        c.consequent,
        cause,
        birth=c.state,
        derived_from=commitment_id,
    )


# ---------------------------------------------------------------------------
# progression


def _detach(state: SocialState, c: Commitment, cause: int) -> SocialState:
    """Make a commitment unconditional, fixing the antecedent's witness.

    If the specialised consequent promises a commitment, that promise is
    made concrete: a Top-antecedent commitment with the specialised
    consequent is added for the same debtor.  This is how selecting a slot
    turns the physician's conditional offer into an actual expectation of
    a confirmed appointment."""
    witness = _witnesses(c.antecedent, state) or {}
    consequent = substitute(c.consequent, witness) if witness else c.consequent
    state = _put(state, c.with_state(CommitmentState.DETACHED, cause).with_consequent(consequent))
    if not isinstance(c.antecedent, Top) and contains_commitment(consequent):
        state = _add_commitment(
            state,
            c.debtor,
            c.creditor,
            Top(),
            consequent,
            cause,
            derived_from=c.id,
        )
    return state


def progress(state: SocialState) -> SocialState:
    """Drive the state to the fixpoint of the progression rules.

    Rules per commitment, in creation order: discharge when the consequent
    holds; detach when the antecedent holds; expire when the antecedent can
    no longer hold; violate when an unconditional consequent can no longer
    hold.  Deterministic, idempotent, and bounded by a quadratic sweep
    budget (the rules only move commitments toward terminal states, so
    exceeding the budget means an engine bug).
    """
    cause = state.last_seq()
    sweeps = 0
    while True:
        if sweeps > max(4, len(state.commitments) ** 2):
            raise FixpointOverflow(sweeps)
        sweeps += 1
        changed = False
        for c in sorted(state.commitments.values(), key=lambda c: c.order):
            c = state.commitments[c.id]
            if c.state not in ACTIVE_STATES:
                continue
            # a consequent may keep antecedent-bound variables until detach
            consequent_closed = not free_vars(c.consequent)
            if consequent_closed and _eval(c.consequent, state) is TruthStatus.SATISFIED:
                state = _put(state, c.with_state(CommitmentState.DISCHARGED, cause))
                changed = True
                continue
            if c.state is CommitmentState.CONDITIONAL:
                antecedent_status = _eval(c.antecedent, state)
                if antecedent_status is TruthStatus.SATISFIED:
                    state = _detach(state, c, cause)
                    changed = True
                elif antecedent_status is TruthStatus.VIOLATED:
                    state = _put(state, c.with_state(CommitmentState.EXPIRED, cause))
                    changed = True
            else:
                if consequent_closed and _eval(c.consequent, state) is TruthStatus.VIOLATED:
                    state = _put(state, c.with_state(CommitmentState.VIOLATED, cause))
                    changed = True
        if not changed:
            return state


# ---------------------------------------------------------------------------
# queries


def query(
    state: SocialState,
    *,
    debtor: str | None = None,
    creditor: str | None = None,
    involving: str | None = None,
    states: frozenset[CommitmentState] | set[CommitmentState] | None = None,
    active: bool | None = None,
) -> list[Commitment]:
    """Commitments matching every given filter, in creation order."""
    out = []
    for c in sorted(state.commitments.values(), key=lambda c: c.order):
        if debtor is not None and c.debtor != debtor:
            continue
        if creditor is not None and c.creditor != creditor:
            continue
        if involving is not None and involving not in (c.debtor, c.creditor):
            continue
        if states is not None and c.state not in states:
            continue
        if active is not None and c.active != active:
            continue
        out.append(c)
    return out
