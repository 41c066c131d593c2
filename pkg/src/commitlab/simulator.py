"""Deterministic discrete-event simulation of one scenario.

Principals act according to their policies; the network delivers each
message after a (seeded) delay, optionally keeping per-pair FIFO order.
Every principal maintains a local view: a social state built only from
the events it sent or received (plus domain events, which everyone
observes, and setup commitments, which their parties know).  The global
state is the bird's-eye ledger a trace replay would reconstruct.

Alignment is the question the local views make precise: do the parties of
each commitment agree it exists and where it stands?  While a
commitment-creating message is in flight the answer is legitimately "no";
at quiescence it should be "yes".
"""

from __future__ import annotations

import heapq
import itertools
import random
from dataclasses import dataclass

from .errors import ConfigError, CommitlabError, UnknownPrincipal
from .events import (
    CAST_EVENT,
    SETUP_EVENT,
    Event,
    EventKind,
    clock_tick,
    domain_event,
)
from .meanings import apply_message, observe_domain_event
from .propositions import EventAtom, LiteralValue, event_names, render
from .protocol import Protocol
from .scenario import (
    Policy,
    RandomPolicy,
    ScenarioConfig,
    ScriptedPolicy,
    ScriptRule,
    SilentPolicy,
)
from .state import SocialState, append_event, evaluate
from .propositions import TruthStatus


@dataclass(frozen=True)
class LocalView:
    principal: str
    state: SocialState

    def observed(self) -> tuple[Event, ...]:
        """History without the bookkeeping records."""
        return tuple(ev for ev in self.state.history if not ev.name.startswith("@"))


@dataclass(frozen=True)
class SimulationResult:
    events: tuple[Event, ...]
    state: SocialState
    views: dict[str, LocalView]
    quiescent: bool
    seed: int


def scripted_next(
    policy: ScriptedPolicy, fired: frozenset[int], view: SocialState
) -> tuple[int, ScriptRule] | None:
    """First unfired rule whose trigger holds in the view, if any.

    Pure, so schedulers other than run() can step the same policies."""
    for index, rule in enumerate(policy.rules):
        if index in fired:
            continue
        if rule.trigger_name is None:
            return index, rule
        atom = EventAtom(rule.trigger_name, rule.trigger_args)
        if evaluate(atom, view) is TruthStatus.SATISFIED:
            return index, rule
    return None


def _setup_events(config: ScenarioConfig, seq_start: int) -> list[Event]:
    events = [
        Event(
            seq=seq_start,
            time=0,
            kind=EventKind.DOMAIN_EVENT,
            name=CAST_EVENT,
            bindings=tuple(config.casting),
        )
    ]
    for decl in config.setup:
        events.append(
            Event(
                seq=seq_start + len(events),
                time=0,
                kind=EventKind.DOMAIN_EVENT,
                name=SETUP_EVENT,
                bindings=(
                    ("id", decl.commitment_id),
                    ("debtor", decl.debtor),
                    ("creditor", decl.creditor),
                    ("antecedent", render(decl.antecedent)),
                    ("consequent", render(decl.consequent)),
                ),
            )
        )
    return events


def _uses_clock(config: ScenarioConfig) -> bool:
    if config.protocol.mentions_clock():
        return True
    for decl in config.setup:
        if "tick" in event_names(decl.antecedent) | event_names(decl.consequent):
            return True
    return False


class _RandomRuntime:
    """Mutable counters for one principal's RandomPolicy within a run."""

    def __init__(self, policy: RandomPolicy, rng: random.Random):
        self.policy = policy
        self.rng = rng
        self.sends_left = policy.max_sends

    def next_action(
        self, principal: str, view: SocialState, protocol: Protocol, casting: dict[str, str]
    ) -> tuple[str, tuple[LiteralValue, ...]] | None:
        if self.sends_left <= 0:
            return None
        candidates = _compliant_sends(principal, view, protocol, casting, self.policy.values)
        if not candidates:
            return None
        pick = self.rng.randrange(len(candidates) + 1)
        if pick == 0:
            return None
        self.sends_left -= 1
        return candidates[pick - 1]


def _compliant_sends(
    principal: str,
    view: SocialState,
    protocol: Protocol,
    casting: dict[str, str],
    values: tuple[LiteralValue, ...],
) -> list[tuple[str, tuple[LiteralValue, ...]]]:
    """Messages this principal could send without violating its own
    commitments, judged by speculatively applying each to its view."""
    out: list[tuple[str, tuple[LiteralValue, ...]]] = []
    for schema in protocol.messages:
        if casting.get(schema.sender) != principal:
            continue
        if schema.params and not values:
            continue
        arg_choices = itertools.product(values, repeat=len(schema.params))
        for args in itertools.islice(arg_choices, 16):
            receiver = casting.get(schema.receiver)
            if receiver is None:
                continue
            probe = Event(
                seq=view.last_seq() + 1,
                time=0,
                kind=EventKind.MESSAGE_SENT,
                name=schema.name,
                sender=principal,
                receiver=receiver,
                bindings=tuple(zip(schema.params, args)),
            )
            try:
                after = apply_message(view, protocol, probe)
            except CommitlabError:
                continue
            violated = [
                c
                for c in after.commitments.values()
                if c.debtor == principal and c.state.value == "Violated"
            ]
            already = [
                c
                for c in view.commitments.values()
                if c.debtor == principal and c.state.value == "Violated"
            ]
            if len(violated) > len(already):
                continue
            out.append((schema.name, args))
    return out


def run(config: ScenarioConfig, seed: int | None = None) -> SimulationResult:
    """Simulate the scenario to quiescence or max time, deterministically."""
    if seed is None:
        seed = config.seed if config.seed is not None else 0
    rng = random.Random(seed)
    protocol = config.protocol
    casting = dict(config.casting)
    principals = config.principals()
    if not principals:
        raise ConfigError("scenario casts no principals")

    events: list[Event] = []
    global_state = SocialState()
    views: dict[str, SocialState] = {p: SocialState() for p in principals}

    for ev in _setup_events(config, seq_start=1):
        events.append(ev)
        global_state = observe_domain_event(global_state, ev)
        if ev.name == SETUP_EVENT:
            parties = {str(ev.binding_map()["debtor"]), str(ev.binding_map()["creditor"])}
        else:
            parties = set(principals)
        for p in principals:
            if p in parties:
                views[p] = observe_domain_event(views[p], ev)
    seq = len(events)
    now = 0

    heap: list[tuple[int, int, int, tuple]] = []
    push_order = itertools.count()

    def push(at: int, priority: int, payload: tuple) -> None:
        heapq.heappush(heap, (at, priority, next(push_order), payload))

    for injection in config.injections:
        push(injection.time, 0, ("inject", injection))
    if _uses_clock(config):
        for t in range(1, config.max_time + 1):
            push(t, 1, ("tick",))

    last_delivery: dict[tuple[str, str], int] = {}

    def schedule_delivery(msg: Event) -> None:
        if config.network.delay_kind == "fixed":
            delay = config.network.delay_min
        else:
            delay = rng.randint(config.network.delay_min, config.network.delay_max)
        at = msg.time + max(0, delay)
        pair = (msg.sender or "", msg.receiver or "")
        if config.network.fifo:
            at = max(at, last_delivery.get(pair, 0))
        last_delivery[pair] = at
        push(at, 0, ("deliver", msg))

    scripted_fired: dict[str, set[int]] = {p: set() for p in principals}
    random_runtime: dict[str, _RandomRuntime] = {}
    for index, p in enumerate(principals):
        policy = config.policy_of(p)
        if isinstance(policy, RandomPolicy):
            random_runtime[p] = _RandomRuntime(policy, random.Random(seed * 1000003 + index))

    def activate(principal: str) -> None:
        nonlocal seq, global_state
        policy: Policy = config.policy_of(principal)
        while True:
            action: tuple[str, tuple[LiteralValue, ...]] | None = None
            if isinstance(policy, SilentPolicy):
                return
            if isinstance(policy, ScriptedPolicy):
                step = scripted_next(policy, frozenset(scripted_fired[principal]), views[principal])
                if step is not None:
                    index, rule = step
                    scripted_fired[principal].add(index)
                    action = (rule.message, rule.args)
            else:
                action = random_runtime[principal].next_action(
                    principal, views[principal], protocol, casting
                )
            if action is None:
                return
            name, args = action
            schema = protocol.message(name)
            assert schema is not None
            seq += 1
            msg = Event(
                seq=seq,
                time=now,
                kind=EventKind.MESSAGE_SENT,
                name=name,
                sender=principal,
                receiver=casting[schema.receiver],
                bindings=tuple(zip(schema.params, args)),
            )
            global_state = apply_message(global_state, protocol, msg)
            views[principal] = apply_message(views[principal], protocol, msg)
            events.append(msg)
            schedule_delivery(msg)

    for p in principals:
        activate(p)

    quiescent = True
    while heap:
        at, _, _, payload = heapq.heappop(heap)
        if at > config.max_time:
            quiescent = False
            break
        now = at
        if payload[0] == "deliver":
            sent: Event = payload[1]
            seq += 1
            received = Event(
                seq=seq,
                time=now,
                kind=EventKind.MESSAGE_RECEIVED,
                name=sent.name,
                sender=sent.sender,
                receiver=sent.receiver,
                bindings=sent.bindings,
            )
            # a delivery adds nothing the global ledger has not seen;
            # only the receiver learns something new
            global_state = append_event(global_state, received)
            assert received.receiver is not None
            views[received.receiver] = apply_message(views[received.receiver], protocol, received)
            events.append(received)
            activate(received.receiver)
        elif payload[0] == "inject":
            injection = payload[1]
            seq += 1
            ev = domain_event(seq, now, injection.name, injection.args)
            global_state = observe_domain_event(global_state, ev)
            for p in principals:
                views[p] = observe_domain_event(views[p], ev)
            events.append(ev)
            for p in principals:
                activate(p)
        else:
            seq += 1
            ev = clock_tick(seq, now)
            global_state = observe_domain_event(global_state, ev)
            for p in principals:
                views[p] = observe_domain_event(views[p], ev)
            events.append(ev)
            for p in principals:
                activate(p)

    return SimulationResult(
        events=tuple(events),
        state=global_state,
        views={p: LocalView(p, views[p]) for p in principals},
        quiescent=quiescent,
        seed=seed,
    )


def local_view(events: list[Event] | tuple[Event, ...], protocol: Protocol, principal: str) -> LocalView:
    """Rebuild one principal's view from a trace.

    The projection keeps messages the principal sent or received, domain
    events and ticks (observed by everyone), and setup records whose
    commitment the principal is a party to."""
    known: set[str] = set()
    for ev in events:
        if ev.sender:
            known.add(ev.sender)
        if ev.receiver:
            known.add(ev.receiver)
        if ev.name == CAST_EVENT:
            known.update(str(v) for _, v in ev.bindings)
    if principal not in known:
        raise UnknownPrincipal(principal)
    state = SocialState()
    for ev in events:
        if ev.kind is EventKind.MESSAGE_SENT:
            if ev.sender == principal:
                state = apply_message(state, protocol, ev)
        elif ev.kind is EventKind.MESSAGE_RECEIVED:
            if ev.receiver == principal:
                state = apply_message(state, protocol, ev)
        elif ev.name == SETUP_EVENT:
            fields = ev.binding_map()
            if principal in (str(fields.get("debtor")), str(fields.get("creditor"))):
                state = observe_domain_event(state, ev)
        else:
            state = observe_domain_event(state, ev)
    return LocalView(principal, state)


# ---------------------------------------------------------------------------
# alignment


ContentKey = tuple[str, str, str, str]


@dataclass(frozen=True)
class Misalignment:
    key: ContentKey
    kind: str  # "existence" | "state"
    details: tuple[tuple[str, str], ...]  # principal -> "absent" or state names

    def human(self) -> str:
        debtor, creditor, antecedent, consequent = self.key
        who = "; ".join(f"{p}: {d}" for p, d in self.details)
        return f"{self.kind} disagreement on C({debtor}, {creditor}, {antecedent}, {consequent}): {who}"


@dataclass(frozen=True)
class ExpectationGap:
    key: ContentKey
    creditor: str
    debtor: str

    def human(self) -> str:
        d, c, antecedent, consequent = self.key
        return (
            f"{self.creditor} holds a detached C({d}, {c}, {antecedent}, {consequent}) "
            f"but {self.debtor}'s view has no detached or discharged match"
        )


@dataclass(frozen=True)
class AlignmentReport:
    misalignments: tuple[Misalignment, ...]
    gaps: tuple[ExpectationGap, ...]

    @property
    def aligned(self) -> bool:
        return not self.misalignments and not self.gaps


def _keyed_states(view: LocalView) -> dict[ContentKey, list[str]]:
    out: dict[ContentKey, list[str]] = {}
    for c in sorted(view.state.commitments.values(), key=lambda c: c.order):
        out.setdefault(c.content_key(), []).append(c.state.value)
    return {k: sorted(v) for k, v in out.items()}


def check_alignment(views: list[LocalView]) -> AlignmentReport:
    """Compare the parties' views of every commitment.

    Only the debtor's and creditor's views can disagree about a
    commitment; a view that merely mentions third parties is not consulted
    for it.  Two kinds of findings: plain disagreement on existence or
    state, and the sharper creditor-side gap where the creditor believes
    an unconditional expectation holds and the debtor's view has nothing
    detached or discharged to answer for it.
    """
    by_principal = {v.principal: v for v in views}
    keyed = {p: _keyed_states(v) for p, v in by_principal.items()}

    all_keys: set[ContentKey] = set()
    for states in keyed.values():
        all_keys.update(states.keys())

    misalignments: list[Misalignment] = []
    gaps: list[ExpectationGap] = []
    for key in sorted(all_keys):
        debtor, creditor = key[0], key[1]
        parties = [p for p in (debtor, creditor) if p in by_principal]
        if len(parties) < 2:
            continue
        per_party = {p: keyed[p].get(key, []) for p in parties}
        counts = {p: len(states) for p, states in per_party.items()}
        if len(set(counts.values())) > 1:
            details = tuple(
                (p, "absent" if not per_party[p] else "+".join(per_party[p])) for p in parties
            )
            misalignments.append(Misalignment(key, "existence", details))
        elif len({tuple(states) for states in per_party.values()}) > 1:
            details = tuple((p, "+".join(per_party[p])) for p in parties)
            misalignments.append(Misalignment(key, "state", details))

    for view in views:
        principal = view.principal
        for c in sorted(view.state.commitments.values(), key=lambda c: c.order):
            if c.creditor != principal or c.state.value != "Detached":
                continue
            debtor_view = by_principal.get(c.debtor)
            if debtor_view is None:
                continue
            key = c.content_key()
            answered = any(
                other.content_key() == key and other.state.value in ("Detached", "Discharged")
                for other in debtor_view.state.commitments.values()
            )
            if not answered:
                gaps.append(ExpectationGap(key, creditor=principal, debtor=c.debtor))

    return AlignmentReport(tuple(misalignments), tuple(gaps))
