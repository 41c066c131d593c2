"""Applying events to social state under a protocol.

A message changes the social state by what it counts as: each meaning
clause of its schema is instantiated with the message's bindings and the
casting, then executed as the corresponding commitment operation.  Domain
events and clock ticks change nothing directly; they only feed the
progression rules.

Reserved record names keep traces self-contained: `@cast` fixes the
role-to-principal casting and `@setup` carries commitments that predate
the enactment.
"""

from __future__ import annotations

from typing import Iterable, Iterator

from .errors import (
    BindingArityMismatch,
    CommitlabError,
    ReplayError,
    RoleMismatch,
    UnknownMessage,
)
from .events import CAST_EVENT, SETUP_EVENT, Event, EventKind
from .parser import parse_proposition_text
from .propositions import ExistsIn, Literal, Term
from .protocol import (
    AssignClause,
    CancelClause,
    CommitmentPattern,
    CreateClause,
    DelegateClause,
    MeaningClause,
    Protocol,
    ReleaseClause,
)
from .state import (
    SocialState,
    append_event,
    assign,
    cancel,
    create,
    delegate,
    progress,
    release,
    setup_commitment,
    with_casting,
)
from .propositions import prop_matches, substitute, substitute_term, term_matches


def apply_message(state: SocialState, protocol: Protocol, msg: Event) -> SocialState:
    """Record a message event and execute its social meaning.

    Works for both MessageSent and MessageReceived: the sender's state
    changes when it speaks, a receiver's when it hears.  Unknown roles are
    learned from the first message that casts them.
    """
    if msg.kind not in (EventKind.MESSAGE_SENT, EventKind.MESSAGE_RECEIVED):
        raise ValueError(f"not a message event: {msg.kind.value}")
    schema = protocol.message(msg.name)
    if schema is None:
        raise UnknownMessage(msg.name, protocol.name)

    casting = state.casting_map()
    for role, actual in ((schema.sender, msg.sender), (schema.receiver, msg.receiver)):
        if actual is None:
            raise RoleMismatch(msg.name, role, casting.get(role), None)
        expected = casting.get(role)
        if expected is None:
            state = with_casting(state, role, actual)
            casting[role] = actual
        elif expected != actual:
            raise RoleMismatch(msg.name, role, expected, actual)

    given = [name for name, _ in msg.bindings]
    if given != list(schema.params):
        raise BindingArityMismatch(
            msg.name,
            f"expected parameters ({', '.join(schema.params)}), got ({', '.join(given)})",
        )

    state = append_event(state, msg)
    env: dict[str, Literal] = {name: Literal(value) for name, value in msg.bindings}
    for role, principal in state.casting:
        env[role] = Literal(principal)
    assert msg.sender is not None
    for clause in schema.meaning:
        state = _apply_clause(state, clause, env, msg.sender, msg)
    return progress(state)


def _resolve_principal(term: Term, env: dict[str, Literal], msg: Event, role_hint: str) -> str:
    resolved = substitute_term(term, env)
    if isinstance(resolved, Literal) and isinstance(resolved.value, str):
        return resolved.value
    raise RoleMismatch(msg.name, role_hint, None, None)


def _apply_clause(
    state: SocialState,
    clause: MeaningClause,
    env: dict[str, Literal],
    actor: str,
    msg: Event,
) -> SocialState:
    if isinstance(clause, CreateClause):
        debtor = _resolve_principal(clause.debtor, env, msg, _term_name(clause.debtor))
        creditor = _resolve_principal(clause.creditor, env, msg, _term_name(clause.creditor))
        antecedent = substitute(clause.antecedent, env)
        # an antecedent-bound variable shadows any same-named binding
        consequent_env = env
        if isinstance(clause.antecedent, ExistsIn) and clause.antecedent.var in env:
            consequent_env = {k: v for k, v in env.items() if k != clause.antecedent.var}
        consequent = substitute(clause.consequent, consequent_env)
        return create(state, debtor, creditor, antecedent, consequent, msg.seq)

    pattern = _instantiate_pattern(clause.pattern, env)
    matched = _matching_commitments(state, pattern)
    if isinstance(clause, ReleaseClause):
        for cid in matched:
            state = release(state, cid, actor)
        return state
    if isinstance(clause, CancelClause):
        for cid in matched:
            state = cancel(state, cid, actor)
        return state
    if isinstance(clause, DelegateClause):
        target = _resolve_role(clause.target_role, env, msg)
        for cid in matched:
            state = delegate(state, cid, target, actor, msg.seq)
        return state
    if isinstance(clause, AssignClause):
        target = _resolve_role(clause.target_role, env, msg)
        for cid in matched:
            state = assign(state, cid, target, actor, msg.seq)
        return state
    raise TypeError(f"not a meaning clause: {clause!r}")


def _resolve_role(role: str, env: dict[str, Literal], msg: Event) -> str:
    bound = env.get(role)
    if bound is not None and isinstance(bound.value, str):
        return bound.value
    raise RoleMismatch(msg.name, role, None, None)


def _term_name(term: Term) -> str:
    name = getattr(term, "name", None)
    return name if isinstance(name, str) else "debtor"


def _instantiate_pattern(pattern: CommitmentPattern, env: dict[str, Literal]) -> CommitmentPattern:
    return CommitmentPattern(
        substitute_term(pattern.debtor, env),
        substitute_term(pattern.creditor, env),
        substitute(pattern.antecedent, env),
        substitute(pattern.consequent, env),
    )


def _matching_commitments(state: SocialState, pattern: CommitmentPattern) -> list[str]:
    """Ids of active commitments the pattern picks out, in creation order.

    No match is a no-op: referring to a commitment that is not in force
    does nothing rather than failing the whole message."""
    out = []
    for c in sorted(state.commitments.values(), key=lambda c: c.order):
        if not c.active:
            continue
        if not term_matches(pattern.debtor, Literal(c.debtor)):
            continue
        if not term_matches(pattern.creditor, Literal(c.creditor)):
            continue
        if not prop_matches(pattern.antecedent, c.antecedent):
            continue
        if not prop_matches(pattern.consequent, c.consequent):
            continue
        out.append(c.id)
    return out


def observe_domain_event(state: SocialState, ev: Event) -> SocialState:
    """Record a domain event or clock tick and progress the state."""
    if ev.kind not in (EventKind.DOMAIN_EVENT, EventKind.CLOCK_TICK):
        raise ValueError(f"not a domain event: {ev.kind.value}")
    if ev.name == CAST_EVENT:
        for role, principal in ev.bindings:
            state = with_casting(state, role, str(principal))
        return append_event(state, ev)
    if ev.name == SETUP_EVENT:
        fields = ev.binding_map()
        state = append_event(state, ev)
        state = setup_commitment(
            state,
            commitment_id=str(fields["id"]) if "id" in fields else None,
            debtor=str(fields["debtor"]),
            creditor=str(fields["creditor"]),
            antecedent=parse_proposition_text(str(fields["antecedent"])),
            consequent=parse_proposition_text(str(fields["consequent"])),
            cause=ev.seq,
        )
        return progress(state)
    state = append_event(state, ev)
    return progress(state)


def replay_steps(
    events: Iterable[Event], protocol: Protocol
) -> Iterator[tuple[Event, SocialState]]:
    """Rebuild the global social state from a trace, one event at a time.

    Meanings fire when a message is sent; deliveries are recorded but
    change nothing at the global level (the receiver's local view is where
    they matter).  Any mismatch between trace and protocol surfaces as
    ReplayError with the offending seq."""
    state = SocialState()
    in_flight: dict[tuple, int] = {}
    for ev in events:
        try:
            if ev.kind is EventKind.MESSAGE_SENT:
                key = (ev.name, ev.sender, ev.receiver, ev.bindings)
                in_flight[key] = in_flight.get(key, 0) + 1
                state = apply_message(state, protocol, ev)
            elif ev.kind is EventKind.MESSAGE_RECEIVED:
                key = (ev.name, ev.sender, ev.receiver, ev.bindings)
                if in_flight.get(key, 0) <= 0:
                    raise ReplayError(
                        f"delivery of {ev.name!r} without a matching send", seq=ev.seq
                    )
                in_flight[key] -= 1
                state = append_event(state, ev)
            else:
                state = observe_domain_event(state, ev)
        except ReplayError:
            raise
        except (CommitlabError, ValueError, KeyError) as exc:
            raise ReplayError(str(exc), seq=ev.seq) from exc
        yield ev, state


def replay(events: Iterable[Event], protocol: Protocol) -> SocialState:
    """Rebuild the global social state from a full trace."""
    state = SocialState()
    for _, state in replay_steps(events, protocol):
        pass
    return state
