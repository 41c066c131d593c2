"""Randomised invariants: print/parse identities, substitution closure,
lifecycle legality over replays, and trace file round-trips."""

from hypothesis import given, settings
from hypothesis import strategies as st

from commitlab import (
    And,
    AnyProposition,
    Before,
    CommitmentAtom,
    CommitmentState,
    Event,
    EventAtom,
    EventKind,
    ExistsIn,
    Literal,
    Protocol,
    RoleRef,
    Top,
    Var,
    Wildcard,
    format_event,
    format_protocol,
    parse,
    parse_event,
    read_trace,
    render,
    replay,
    replay_steps,
    substitute,
    write_trace,
)
from commitlab.commitments import can_transition
from commitlab.parser import parse_proposition_text
from commitlab.propositions import free_vars
from commitlab.protocol import (
    AssignClause,
    CancelClause,
    CommitmentPattern,
    CreateClause,
    DelegateClause,
    MessageSchema,
    OrderingConstraint,
    ReleaseClause,
)
from commitlab.state import progress

from samples import TraceBuilder, exercise_protocol

# ---------------------------------------------------------------------------
# name and value strategies

# names that read contextually somewhere in the grammar; generated names
# stay clear of all of them so identity failures mean real printer bugs
KEYWORDS = frozenset(
    {
        "top", "and", "exists", "in", "C", "to",
        "create", "release", "cancel", "delegate", "assign",
        "meaning", "none", "message", "role", "param", "order", "protocol",
        "belief", "desire", "goal", "intention", "internal", "plan",
        "_",
    }
)

idents = st.from_regex(r"[a-z][a-z0-9_]{0,5}", fullmatch=True).filter(
    lambda s: s not in KEYWORDS
)

# source strings cannot contain a raw newline; anything else is fair game
source_text = st.text(alphabet=st.characters(exclude_characters="\n"), max_size=6)

scalars = st.integers(-(10**6), 10**6) | source_text
literal_values = st.recursive(
    scalars, lambda kids: st.lists(kids, max_size=3).map(tuple), max_leaves=4
)


def terms(bound: frozenset, roles: frozenset = frozenset(), wildcard: bool = False):
    opts = [literal_values.map(Literal)]
    if bound:
        opts.append(st.sampled_from(sorted(bound)).map(Var))
    if roles:
        opts.append(st.sampled_from(sorted(roles)).map(RoleRef))
    if wildcard:
        opts.append(st.just(Wildcard()))
    return st.one_of(opts)


# ---------------------------------------------------------------------------
# proposition strategies, scope-correct by construction

@st.composite
def event_atoms(draw, bound, roles=frozenset()):
    name = draw(idents)
    n = draw(st.integers(0, 3))
    args = tuple(draw(terms(bound, roles, wildcard=True)) for _ in range(n))
    return EventAtom(name, args)


@st.composite
def exists_props(draw, bound, depth, roles, pattern):
    var = draw(idents)
    if draw(st.booleans()):
        domain = Var(draw(idents))
    else:
        n = draw(st.integers(0, 3))
        domain = tuple(draw(terms(bound, roles)) for _ in range(n))
    body = draw(propositions(bound | {var}, depth - 1, roles, pattern))
    return ExistsIn(var, domain, body)


@st.composite
def commitment_atoms(draw, bound, depth, roles, pattern):
    debtor = draw(terms(bound, roles, wildcard=pattern))
    creditor = draw(terms(bound, roles, wildcard=pattern))
    antecedent = draw(propositions(bound, depth - 1, roles, pattern))
    inner = bound
    if isinstance(antecedent, ExistsIn):
        inner = bound | {antecedent.var}
    consequent = draw(propositions(inner, depth - 1, roles, pattern))
    return CommitmentAtom(debtor, creditor, antecedent, consequent)


def units(bound, depth, roles, pattern):
    """Propositions that may sit inside a conjunction: no And, no Top."""
    opts = [
        event_atoms(bound, roles),
        st.builds(Before, event_atoms(bound, roles), event_atoms(bound, roles)),
    ]
    if pattern:
        opts.append(st.just(AnyProposition()))
    if depth > 0:
        opts.append(exists_props(bound, depth, roles, pattern))
        opts.append(commitment_atoms(bound, depth, roles, pattern))
    return st.one_of(opts)


def propositions(bound=frozenset(), depth=2, roles=frozenset(), pattern=False):
    opts = [st.just(Top()), units(bound, depth, roles, pattern)]
    if depth > 0:
        opts.append(
            st.lists(units(bound, depth - 1, roles, pattern), min_size=2, max_size=3).map(
                lambda parts: And(tuple(parts))
            )
        )
    return st.one_of(opts)


@given(propositions(depth=3))
@settings(max_examples=200, deadline=None)
def test_render_parse_identity(prop):
    assert parse_proposition_text(render(prop)) == prop


@given(propositions(depth=2))
@settings(max_examples=150, deadline=None)
def test_substituting_free_vars_closes_proposition(prop):
    env = {name: Literal(7) for name in free_vars(prop)}
    closed = substitute(prop, env)
    assert free_vars(closed) == set()
    # substitution is idempotent and the closed form still prints/parses
    assert substitute(closed, env) == closed
    assert parse_proposition_text(render(closed)) == closed


# ---------------------------------------------------------------------------
# protocol print/parse fixpoint

# capitalised pools cannot collide with generated lowercase names
ROLE_POOL = ("Ra", "Rb", "Rc")
PROTO_PARAM_POOL = ("gpa", "gpb")
MSG_PARAM_POOL = ("mpa", "mpb", "mpc")


@st.composite
def meaning_clauses(draw, bound, role_set, roles):
    kind = draw(st.sampled_from(["create", "release", "cancel", "delegate", "assign"]))
    if kind == "create":
        debtor = draw(terms(bound, role_set))
        creditor = draw(terms(bound, role_set))
        antecedent = draw(propositions(bound, 1, role_set))
        inner = bound
        if isinstance(antecedent, ExistsIn):
            inner = bound | {antecedent.var}
        consequent = draw(propositions(inner, 1, role_set))
        return CreateClause(debtor, creditor, antecedent, consequent)
    pattern = CommitmentPattern(
        draw(terms(bound, role_set, wildcard=True)),
        draw(terms(bound, role_set, wildcard=True)),
        draw(propositions(bound, 1, role_set, pattern=True)),
        draw(propositions(bound, 1, role_set, pattern=True)),
    )
    if kind == "release":
        return ReleaseClause(pattern)
    if kind == "cancel":
        return CancelClause(pattern)
    target = draw(st.sampled_from(roles))
    if kind == "delegate":
        return DelegateClause(pattern, target)
    return AssignClause(pattern, target)


@st.composite
def message_schemas(draw, name, roles, proto_params):
    sender = draw(st.sampled_from(roles))
    receiver = draw(st.sampled_from(roles))
    params = tuple(draw(st.lists(st.sampled_from(MSG_PARAM_POOL), unique=True, max_size=2)))
    bound = frozenset(proto_params) | frozenset(params)
    role_set = frozenset(roles)
    style = draw(st.sampled_from(["bare", "none", "clauses"]))
    if style == "clauses":
        n = draw(st.integers(1, 2))
        meaning = tuple(draw(meaning_clauses(bound, role_set, roles)) for _ in range(n))
        return MessageSchema(name, sender, receiver, params, meaning, False)
    return MessageSchema(name, sender, receiver, params, (), style == "none")


@st.composite
def protocols(draw):
    roles = tuple(draw(st.lists(st.sampled_from(ROLE_POOL), unique=True, min_size=2, max_size=3)))
    proto_params = tuple(draw(st.lists(st.sampled_from(PROTO_PARAM_POOL), unique=True, max_size=2)))
    names = draw(st.lists(idents, unique=True, min_size=1, max_size=3))
    messages = tuple(draw(message_schemas(n, roles, proto_params)) for n in names)
    orderings = tuple(
        OrderingConstraint(draw(st.sampled_from(names)), draw(st.sampled_from(names)))
        for _ in range(draw(st.integers(0, 2)))
    )
    return Protocol(draw(idents), roles, proto_params, messages, orderings)


@given(protocols())
@settings(max_examples=100, deadline=None)
def test_format_parse_protocol_identity(p):
    text = format_protocol(p)
    again = parse(text)
    assert isinstance(again, Protocol), [d.human() for d in again]
    assert again == p
    assert format_protocol(again) == text


# ---------------------------------------------------------------------------
# replay invariants over arbitrary well-formed enactments

CAST = {"SUP": "sam", "CUS": "carla", "ALT": "ana"}
DIRECTIONS = {
    "offer": ("sam", "carla"),
    "order": ("carla", "sam"),
    "forgive": ("sam", "carla"),
    "withdraw": ("sam", "carla"),
    "handoff": ("sam", "carla"),
    "reassign": ("carla", "sam"),
    "promiseByTick": ("sam", "carla"),
}
ITEMS = ("lamp", "rug")

send_actions = st.tuples(
    st.just("send"),
    st.sampled_from(sorted(DIRECTIONS)),
    st.sampled_from(ITEMS),
    st.integers(2, 9),
    st.booleans(),
)
happen_actions = st.tuples(
    st.just("happen"),
    st.sampled_from([("deliver", "sam"), ("pay", "carla"), ("pay", "sam")]),
    st.sampled_from(ITEMS),
)
enactments = st.lists(
    st.one_of(send_actions, happen_actions, st.just(("tick",))), max_size=10
)

BIRTH_STATES = {CommitmentState.CONDITIONAL, CommitmentState.DETACHED}


def build_trace(actions):
    b = TraceBuilder().cast(**CAST)
    for action in actions:
        if action[0] == "send":
            _, name, item, deadline, deliver_too = action
            sender, receiver = DIRECTIONS[name]
            if name == "promiseByTick":
                b.send(name, sender, receiver, item=item, t=deadline)
            else:
                b.send(name, sender, receiver, item=item)
            if deliver_too:
                b.deliver_last()
        elif action[0] == "happen":
            _, (event, party), item = action
            b.happen(event, party, item)
        else:
            b.tick()
    return b.events


STABLE_FIELDS = (
    "debtor",
    "creditor",
    "antecedent",
    "initial_consequent",
    "order",
    "created_by",
    "derived_from",
)


@given(enactments)
@settings(max_examples=75, deadline=None)
def test_replay_lifecycle_invariants(actions):
    trace = build_trace(actions)
    protocol = exercise_protocol()
    prev = None
    last = None
    for ev, state in replay_steps(trace, protocol):
        # every intermediate state is already at its progression fixpoint
        assert progress(state) == state
        for c in state.commitments.values():
            assert c.history[0] == (c.created_by, c.history[0][1])
            assert c.history[0][1] in BIRTH_STATES
            assert c.history[-1][1] is c.state
            seqs = [seq for seq, _ in c.history]
            assert seqs == sorted(seqs)
            for (_, src), (_, dst) in zip(c.history, c.history[1:]):
                assert can_transition(src, dst), (c.id, c.history)
        orders = sorted(c.order for c in state.commitments.values())
        assert orders == list(range(len(orders)))
        if prev is not None:
            # the past is append-only: nothing vanishes, nothing rewrites
            for cid, old in prev.commitments.items():
                new = state.commitments[cid]
                assert new.history[: len(old.history)] == old.history
                assert old.content_key() == new.content_key()
                for field in STABLE_FIELDS:
                    assert getattr(old, field) == getattr(new, field)
            if ev.kind is EventKind.MESSAGE_RECEIVED:
                assert state.commitments == prev.commitments
        prev = state
        last = state
    assert last == replay(trace, protocol)


# ---------------------------------------------------------------------------
# trace file round-trips

binding_values = st.recursive(
    st.integers(-(2**40), 2**40) | st.text(max_size=6),
    lambda kids: st.lists(kids, max_size=3).map(tuple),
    max_leaves=4,
)
binding_lists = st.lists(
    st.tuples(st.text(min_size=1, max_size=5), binding_values),
    unique_by=lambda kv: kv[0],
    max_size=3,
).map(tuple)


@st.composite
def trace_events(draw):
    events = []
    time = 0
    for seq in range(1, draw(st.integers(1, 7)) + 1):
        kind = draw(st.sampled_from(list(EventKind)))
        time += draw(st.integers(0, 5))
        sender = receiver = None
        if kind in (EventKind.MESSAGE_SENT, EventKind.MESSAGE_RECEIVED):
            sender = draw(st.text(min_size=1, max_size=6))
            receiver = draw(st.text(min_size=1, max_size=6))
        events.append(
            Event(
                seq=seq,
                time=time,
                kind=kind,
                name=draw(st.text(min_size=1, max_size=8)),
                sender=sender,
                receiver=receiver,
                bindings=draw(binding_lists),
            )
        )
    return events


@given(trace_events())
@settings(max_examples=150, deadline=None)
def test_trace_text_round_trip(events):
    text = write_trace(events)
    assert read_trace(text) == events
    for ev in events:
        line = format_event(ev)
        assert line.isascii() and "\n" not in line
        assert parse_event(line) == ev
