"""End-to-end correctness gates, one per criterion, each printing a
single pass/fail line (visible with pytest -s; the test outcome itself
carries the same verdict either way)."""

from __future__ import annotations

import dataclasses
import random as random_module
import time

import pytest

from commitlab import (
    Before,
    CommitmentState,
    EventAtom,
    NetworkModel,
    Protocol,
    SocialState,
    Top,
    build_config,
    can_transition,
    check,
    check_alignment,
    domain_event,
    format_protocol,
    lint,
    local_view,
    observe_domain_event,
    parse,
    parse_scenario_text,
    parse_with_diagnostics,
    render,
    replay_steps,
    run,
    setup_commitment,
    validate,
)
from commitlab.commitments import TRANSITIONS
from commitlab.errors import OperationError
from commitlab.protocol import CreateClause
from commitlab.state import assign, cancel, delegate, release

from oracles import LIFECYCLE, exhaustive_outcomes, oracle_verdicts, state_outcome
from samples import EXERCISE_CP, appointment_protocol, bundled_text, fig3_trace


def _verdict(number: int, label: str, failures: list) -> None:
    status = "PASS" if not failures else "FAIL"
    print(f"criterion {number} ({label}): {status}")
    assert not failures, failures[:5]


def _config(scenario_text: str, protocol_text: str, protocol_name: str):
    decl, diagnostics = parse_scenario_text(scenario_text)
    assert decl is not None, [d.human() for d in diagnostics]
    return build_config(decl, protocol_text, protocol_name)


# ---------------------------------------------------------------------------
# 1. golden progression


def _active_contents(state: SocialState) -> set:
    out = set()
    for c in state.commitments.values():
        if c.active:
            debtor, creditor, antecedent, consequent = c.display_content()
            out.add(f"C({debtor}, {creditor}, {antecedent}, {consequent})")
    return out


C0 = "C(alessia, bianca, requestAppointment(bianca, alessia), availableSlots(alessia, bianca, _))"
C1 = "C(alessia, bianca, top, availableSlots(alessia, bianca, _))"
C2 = (
    "C(alessia, bianca, "
    "exists s in [1400, 1600]: C(bianca, alessia, top, showUp(bianca, s)), "
    "C(alessia, bianca, top, showUp(alessia, s)))"
)
C3 = "C(alessia, bianca, top, C(alessia, bianca, top, showUp(alessia, 1400)))"
C4 = "C(bianca, alessia, top, showUp(bianca, 1400))"
C5 = "C(alessia, bianca, top, showUp(alessia, 1400))"

GOLDEN_BOXES = [{C0}, {C1}, {C2}, {C3, C4}, {C4, C5}]


def test_criterion_1_golden_progression():
    started = time.perf_counter()
    protocol = appointment_protocol()
    boxes = []
    for ev, state in replay_steps(fig3_trace(), protocol):
        if ev.name == "@setup" or ev.kind.value == "MessageSent":
            boxes.append(_active_contents(state))
    elapsed = time.perf_counter() - started

    failures = []
    if boxes != GOLDEN_BOXES:
        for i, (got, want) in enumerate(zip(boxes, GOLDEN_BOXES)):
            if got != want:
                failures.append(f"box {i}: got {sorted(got)}, want {sorted(want)}")
        if len(boxes) != len(GOLDEN_BOXES):
            failures.append(f"{len(boxes)} boxes, want {len(GOLDEN_BOXES)}")

    # the final actives carry the scenario's last two labels
    config = _config(
        bundled_text("appointment.scn"), bundled_text("appointment.cp"), "appointment.cp"
    )
    by_content = {
        f"C({l.debtor}, {l.creditor}, {render(l.antecedent)}, {render(l.consequent)})": l.name
        for l in config.labels
    }
    final_labels = {by_content.get(content, "?") for content in boxes[-1]}
    if final_labels != {"c4", "c5"}:
        failures.append(f"final active labels {sorted(final_labels)}")
    if elapsed >= 1.0:
        failures.append(f"took {elapsed:.2f}s, budget 1s")
    _verdict(1, "golden progression", failures)


# ---------------------------------------------------------------------------
# 2. lifecycle totality


DEBTOR, CREDITOR, THIRD = "dora", "carl", "tess"

USER_OPS = ("release", "cancel", "delegate", "assign")
ENGINE_OPS = ("detach", "discharge", "expire", "violate")
OP_TARGET = {
    "detach": "Detached",
    "discharge": "Discharged",
    "expire": "Expired",
    "violate": "Violated",
    "release": "Released",
    "delegate": "Delegated",
    "assign": "Assigned",
}


def _in_state(source: str) -> SocialState:
    """A one-commitment state with commitment `k` in the given state."""
    top, go, done = Top(), EventAtom("go"), EventAtom("done")
    s = SocialState()
    if source == "Conditional":
        return setup_commitment(s, "k", DEBTOR, CREDITOR, go, done, 1)
    if source == "Expired":
        s = setup_commitment(s, "k", DEBTOR, CREDITOR, Before(go, EventAtom("gone")), done, 1)
        return observe_domain_event(s, domain_event(2, 1, "gone", ()))
    s = setup_commitment(s, "k", DEBTOR, CREDITOR, top, done, 1)
    if source == "Detached":
        return s
    if source == "Discharged":
        return observe_domain_event(s, domain_event(2, 1, "done", ()))
    if source == "Released":
        return release(s, "k", CREDITOR)
    if source == "Cancelled":
        conditional = setup_commitment(SocialState(), "k", DEBTOR, CREDITOR, go, done, 1)
        return cancel(conditional, "k", DEBTOR)
    if source == "Violated":
        return cancel(s, "k", DEBTOR)
    if source in ("Delegated", "Assigned"):
        s = observe_domain_event(s, domain_event(2, 1, "nudge", ()))
        if source == "Delegated":
            return delegate(s, "k", THIRD, DEBTOR, 2)
        return assign(s, "k", THIRD, CREDITOR, 2)
    raise AssertionError(source)


def _apply_user_op(state: SocialState, op: str) -> SocialState:
    if op == "release":
        return release(state, "k", CREDITOR)
    if op == "cancel":
        return cancel(state, "k", DEBTOR)
    # delegate and assign cite a causing event, so give them one to cite
    seq = state.last_seq() + 1
    state = observe_domain_event(state, domain_event(seq, 9, "nudge", ()))
    if op == "delegate":
        return delegate(state, "k", THIRD, DEBTOR, seq)
    return assign(state, "k", THIRD, CREDITOR, seq)


def test_criterion_2_lifecycle_totality():
    failures = []
    covered = 0
    # the engine's table is the hand-transcribed one, wholesale
    engine_table = {src.value: {dst.value for dst in outs} for src, outs in TRANSITIONS.items()}
    if engine_table != LIFECYCLE:
        failures.append(f"transition tables differ: {engine_table} vs {LIFECYCLE}")

    for source in sorted(LIFECYCLE):
        base = _in_state(source)
        if base.commitments["k"].state.value != source:
            failures.append(f"builder for {source} landed in {base.commitments['k'].state.value}")
            continue
        for op in USER_OPS + ENGINE_OPS:
            covered += 1
            if op == "cancel":
                legal = source in ("Conditional", "Detached")
                target = "Cancelled" if source == "Conditional" else "Violated"
            else:
                target = OP_TARGET[op]
                legal = target in LIFECYCLE[source]
            if op in USER_OPS:
                if legal:
                    after = _apply_user_op(base, op)
                    got = after.commitments["k"].state.value
                    if got != target:
                        failures.append(f"{source} --{op}--> {got}, want {target}")
                else:
                    try:
                        _apply_user_op(base, op)
                        failures.append(f"{source} --{op}--> accepted, want rejection")
                    except OperationError:
                        pass
            else:
                src_state = CommitmentState(source)
                dst_state = CommitmentState(target)
                if can_transition(src_state, dst_state) != legal:
                    failures.append(f"can_transition({source}, {target}) != {legal}")

    # behavioural probes for the engine-driven moves
    top, go, done = Top(), EventAtom("go"), EventAtom("done")
    probes = []
    s = setup_commitment(SocialState(), "k", DEBTOR, CREDITOR, go, done, 1)
    probes.append(("Conditional detach", observe_domain_event(s, domain_event(2, 1, "go", ())), "Detached"))
    probes.append(("Conditional discharge", observe_domain_event(s, domain_event(2, 1, "done", ())), "Discharged"))
    probes.append(("Conditional expire", _in_state("Expired"), "Expired"))
    probes.append(("Detached discharge", _in_state("Discharged"), "Discharged"))
    dying = setup_commitment(SocialState(), "k", DEBTOR, CREDITOR, top, Before(done, EventAtom("gone")), 1)
    probes.append(("Detached violate", observe_domain_event(dying, domain_event(2, 1, "gone", ())), "Violated"))
    for label, state, want in probes:
        if state.commitments["k"].state.value != want:
            failures.append(f"{label}: landed in {state.commitments['k'].state.value}")

    if covered != 9 * 8:
        failures.append(f"covered {covered} pairs, want 72")
    _verdict(2, f"lifecycle totality, {covered}/72 pairs", failures)


# ---------------------------------------------------------------------------
# 3. interleaving coverage


RANDOM_APPOINTMENT_SCN = """
scenario appointmentRandom {
  protocol "appointment.cp"

  cast PHY as alessia
  cast PAT as bianca

  setup c0 = C(alessia, bianca,
               requestAppointment(bianca, alessia),
               availableSlots(alessia, bianca, _))

  network {
    fifo off
    delay uniform 0 3
  }
  maxtime 100

  principal bianca { random { sends 3 values [1400] } }
  principal alessia { random { sends 3 values [1400] } }
}
"""


def _random_appointment_config():
    return _config(RANDOM_APPOINTMENT_SCN, bundled_text("appointment.cp"), "appointment.cp")


def test_criterion_3_interleaving_coverage():
    started = time.perf_counter()
    config = _random_appointment_config()
    oracle = exhaustive_outcomes(config, max_messages=6)
    sampled = set()
    failures = []
    for seed in range(10_000):
        result = run(config, seed=seed)
        if not result.quiescent:
            failures.append(f"seed {seed} not quiescent")
            break
        sampled.add(state_outcome(result.state))
    elapsed = time.perf_counter() - started

    missing = oracle - sampled
    extra = sampled - oracle
    if missing:
        failures.append(f"{len(missing)} oracle outcomes never sampled")
    if extra:
        failures.append(f"{len(extra)} sampled outcomes outside the oracle set")
    if elapsed >= 60.0:
        failures.append(f"took {elapsed:.1f}s, budget 60s")
    _verdict(3, f"interleaving coverage, {len(sampled)}/{len(oracle)} outcomes", failures)


# ---------------------------------------------------------------------------
# 4. quiescent alignment


def test_criterion_4_quiescent_alignment():
    base = _config(
        bundled_text("appointment.scn"), bundled_text("appointment.cp"), "appointment.cp"
    )
    config = dataclasses.replace(
        base,
        network=NetworkModel(fifo=False, delay_kind="uniform", delay_min=0, delay_max=5),
        max_time=100,
        seed=None,
    )
    protocol = config.protocol
    creating = {
        schema.name
        for schema in protocol.messages
        if any(isinstance(c, CreateClause) for c in schema.meaning)
    }
    principals = config.principals()

    failures = []
    cuts = 0
    for seed in range(1000):
        result = run(config, seed=seed)
        if not result.quiescent:
            failures.append(f"seed {seed}: never quiescent")
            continue
        report = check_alignment(list(result.views.values()))
        if not report.aligned:
            failures.append(f"seed {seed}: misaligned at quiescence")
        for index, ev in enumerate(result.events):
            if ev.kind.value != "MessageSent" or ev.name not in creating:
                continue
            cuts += 1
            prefix = result.events[: index + 1]
            views = [local_view(prefix, protocol, p) for p in principals]
            if check_alignment(views).aligned:
                failures.append(f"seed {seed}: in-flight cut after {ev.name} reads aligned")
        if failures:
            break
    _verdict(4, f"quiescent alignment, 1000 schedules, {cuts} cuts", failures)


# ---------------------------------------------------------------------------
# 5. ordering lint discrimination


def test_criterion_5_ordering_lint_discrimination():
    failures = []
    bare = parse(bundled_text("ordering_bare.cp"))
    wrapped = parse(bundled_text("ordering_commitment.cp"))
    if not isinstance(bare, Protocol) or not isinstance(wrapped, Protocol):
        failures.append("bundled ordering protocols must parse")
    else:
        bare_rules = [d.rule for d in lint(bare)]
        wrapped_rules = [d.rule for d in lint(wrapped)]
        if "L-SOLELY" not in bare_rules:
            failures.append(f"bare ordering missed L-SOLELY: {bare_rules}")
        if "L-SOLELY" in wrapped_rules:
            failures.append(f"commitment form flagged L-SOLELY: {wrapped_rules}")

    # the wrapped form has teeth: answering before being asked violates it
    request = EventAtom("requestAppointment", ())
    offer = EventAtom("availableSlots", ())
    ordered = Before(request, offer)
    out_of_order = setup_commitment(
        SocialState(), "g", "alessia", "bianca", Top(), ordered, 1
    )
    out_of_order = observe_domain_event(
        out_of_order, domain_event(2, 1, "availableSlots", ("alessia", "bianca", (1400,)))
    )
    if out_of_order.commitments["g"].state is not CommitmentState.VIOLATED:
        failures.append(
            f"early availableSlots left g {out_of_order.commitments['g'].state.value}"
        )
    in_order = setup_commitment(SocialState(), "g", "alessia", "bianca", Top(), ordered, 1)
    in_order = observe_domain_event(in_order, domain_event(2, 1, "requestAppointment", ()))
    in_order = observe_domain_event(
        in_order, domain_event(3, 2, "availableSlots", ("alessia", "bianca", (1400,)))
    )
    if in_order.commitments["g"].state is not CommitmentState.DISCHARGED:
        failures.append(f"ordered trace left g {in_order.commitments['g'].state.value}")
    _verdict(5, "ordering lint discrimination", failures)


# ---------------------------------------------------------------------------
# 6. compliance soundness


RANDOM_EXERCISE_SCN = """
scenario exerciseRandom {
  protocol "exercise.cp"

  cast SUP as sam
  cast CUS as carla
  cast ALT as ana

  network {
    fifo off
    delay uniform 0 2
  }
  maxtime 10

  principal sam { random { sends 2 values [lamp, 2] } }
  principal carla { random { sends 2 values [lamp, 2] } }
}
"""

HORIZONS = (None, 0, 1, 2, 3, 5, 8)


def test_criterion_6_compliance_soundness():
    failures = []
    scenarios = [
        _random_appointment_config(),
        _config(RANDOM_EXERCISE_SCN, EXERCISE_CP, "exercise.cp"),
    ]
    checked = 0
    for config in scenarios:
        protocol = config.protocol
        for seed in range(100):
            events = run(config, seed=seed).events
            horizon = HORIZONS[seed % len(HORIZONS)]
            report = check(events, protocol, horizon)
            want_verdicts, want_accountable = oracle_verdicts(events, protocol, horizon)
            if report.verdict_map() != want_verdicts:
                failures.append(
                    f"seed {seed} horizon {horizon}: {report.verdict_map()} != {want_verdicts}"
                )
            got_accountable = {v.commitment_id: v.accountable for v in report.violations}
            if got_accountable != want_accountable:
                failures.append(f"seed {seed}: accountable {got_accountable} != {want_accountable}")
            for violation in report.violations:
                debtor = report.state.commitments[violation.commitment_id].debtor
                if violation.accountable != debtor:
                    failures.append(
                        f"seed {seed}: {violation.commitment_id} blames "
                        f"{violation.accountable}, debtor is {debtor}"
                    )
            checked += 1
            if failures:
                break
        if failures:
            break
    if checked != 200 and not failures:
        failures.append(f"checked {checked} scenarios, want 200")
    _verdict(6, f"compliance soundness, {checked} scenarios", failures)


# ---------------------------------------------------------------------------
# 7. parser robustness


FUZZ_TOKENS = (
    "{", "}", "(", ")", "[", "]", ",", "->", "<", ":", ".", "_",
    '"', "\\", "#", "\n", " ",
    "protocol", "role", "message", "meaning", "none", "order", "param",
    "create", "release", "cancel", "delegate", "assign", "to",
    "C(", "top", "exists", "in", "and", "x", "1400", "-3", '"a b"',
)


def _mutate(rng: random_module.Random, text: str) -> str:
    for _ in range(rng.randint(1, 3)):
        kind = rng.randrange(5)
        if not text:
            text = rng.choice(FUZZ_TOKENS)
            continue
        i = rng.randrange(len(text))
        j = min(len(text), i + rng.randint(1, 12))
        if kind == 0:
            text = text[:i] + text[j:]
        elif kind == 1:
            text = text[:i] + rng.choice(FUZZ_TOKENS) + text[i:]
        elif kind == 2:
            text = text[:i] + chr(rng.randrange(32, 127)) + text[i + 1 :]
        elif kind == 3:
            text = text[:i] + text[i:j] + text[i:]
        else:
            text = text[:j]
    return text


def test_criterion_7_parser_robustness():
    failures = []
    corpus = [
        bundled_text("appointment.cp"),
        bundled_text("ordering_bare.cp"),
        bundled_text("ordering_commitment.cp"),
        EXERCISE_CP,
    ]
    for index, source in enumerate(corpus):
        first = parse(source)
        if not isinstance(first, Protocol):
            failures.append(f"corpus item {index} does not parse")
            continue
        text = format_protocol(first)
        again = parse(text)
        if not (isinstance(again, Protocol) and again == first and format_protocol(again) == text):
            failures.append(f"corpus item {index} does not round-trip")

    rng = random_module.Random(2026)
    crashes = 0
    mutants = 4000
    for _ in range(mutants):
        mutant = _mutate(rng, rng.choice(corpus))
        try:
            result = parse_with_diagnostics(mutant)
            if result.protocol is not None:
                validate(result.protocol)
                lint(result.protocol)
        except Exception as exc:  # noqa: BLE001 - any escape is the finding
            crashes += 1
            if crashes <= 3:
                failures.append(f"crash {type(exc).__name__}: {exc} on {mutant[:80]!r}")
    if crashes:
        failures.append(f"{crashes}/{mutants} mutants crashed")
    _verdict(7, f"parser robustness, {mutants} mutants", failures)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
