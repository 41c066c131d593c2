"""Command-line front end.

Everything here is thin plumbing around the library: parse, lint,
simulate, replay, judge, explain.  Output is deterministic given the
inputs and seed (plain ASCII, no timestamps, no absolute paths), so the
commands are safe to pin in golden files.

Exit codes: 0 success, 1 findings (diagnostics or violations), 2 usage or
input errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path

from .compliance import check as compliance_check
from .compliance import explain as explain_chain
from .compliance import render_report, report_records
from .diagnostics import Diagnostic, has_errors
from .errors import ConfigError, ReplayError, UnknownCommitment
from .linter import lint as lint_protocol
from .meanings import replay, replay_steps
from .parser import parse_with_diagnostics
from .propositions import Literal, render, render_term
from .protocol import Protocol
from .scenario import ScenarioConfig, build_config, load_scenario, parse_scenario_text
from .simulator import run
from .state import SocialState
from .tracefile import read_trace, write_trace
from .validator import validate

SEED_ENV = "COMMITLAB_SEED"


class _Fail(Exception):
    def __init__(self, code: int):
        self.code = code


def _read_file(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise _Fail(2) from exc


def _emit_diagnostics(diagnostics: list[Diagnostic], filename: str, machine: bool) -> None:
    ordered = sorted(diagnostics, key=lambda d: (d.span.line, d.span.col, d.rule))
    for d in ordered:
        print(d.record() if machine else d.human(filename))


def _load_protocol(path: str, machine: bool) -> Protocol:
    text = _read_file(path)
    result = parse_with_diagnostics(text)
    if result.protocol is None:
        _emit_diagnostics(result.diagnostics, path, machine)
        raise _Fail(1)
    errors = [d for d in validate(result.protocol) if d.is_error]
    if errors:
        _emit_diagnostics(errors, path, machine)
        raise _Fail(1)
    return result.protocol


def _resolve_seed(flag: int | None, scenario_seed: int | None) -> int:
    if flag is not None:
        return flag
    if scenario_seed is not None:
        return scenario_seed
    raw = os.environ.get(SEED_ENV, "").strip()
    if raw:
        try:
            return int(raw)
        except ValueError as exc:
            print(f"error: {SEED_ENV} must be an integer, got {raw!r}", file=sys.stderr)
            raise _Fail(2) from exc
    return 0


def _config_exit(exc: ConfigError) -> int:
    # unreadable input is an IO failure, not a finding
    return 2 if isinstance(exc.__cause__, OSError) else 1


def _load_trace(path: str) -> list:
    text = _read_file(path)
    try:
        return read_trace(text)
    except ReplayError as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        raise _Fail(2) from exc


# ---------------------------------------------------------------------------
# subcommands


def _cmd_check_syntax(args: argparse.Namespace) -> int:
    text = _read_file(args.path)
    result = parse_with_diagnostics(text)
    _emit_diagnostics(result.diagnostics, args.path, args.machine)
    return 1 if has_errors(result.diagnostics) else 0


def _cmd_lint(args: argparse.Namespace) -> int:
    text = _read_file(args.path)
    result = parse_with_diagnostics(text)
    findings = list(result.diagnostics)
    if result.protocol is not None:
        findings.extend(validate(result.protocol))
        findings.extend(lint_protocol(result.protocol))
    _emit_diagnostics(findings, args.path, args.machine)
    return 1 if findings else 0


def _simulate_one(path: Path, out: Path | None, args: argparse.Namespace) -> None:
    config = load_scenario(str(path))
    seed = _resolve_seed(args.seed, config.seed)
    result = run(config, seed=seed)
    text = write_trace(result.events)
    if out is None:
        sys.stdout.write(text)
        return
    out.write_text(text, encoding="utf-8")
    ending = "quiescent" if result.quiescent else "cut at max time"
    if args.machine:
        print(
            json.dumps(
                {
                    "record": "simulation",
                    "scenario": path.name,
                    "seed": result.seed,
                    "events": len(result.events),
                    "quiescent": result.quiescent,
                    "out": out.name,
                }
            )
        )
    else:
        print(f"{path.name}: {len(result.events)} events, seed {result.seed}, {ending} -> {out.name}")


def _cmd_simulate(args: argparse.Namespace) -> int:
    source = Path(args.scenario)
    try:
        if source.is_dir():
            files = sorted(source.glob("*.scn"), key=lambda p: p.name)
            if not files:
                print(f"error: no .scn files in {args.scenario}", file=sys.stderr)
                return 2
            if args.out is None:
                print("error: simulating a directory requires --out DIR", file=sys.stderr)
                return 2
            outdir = Path(args.out)
            outdir.mkdir(parents=True, exist_ok=True)
            for f in files:
                _simulate_one(f, outdir / (f.stem + ".trace"), args)
            return 0
        out = Path(args.out) if args.out is not None else None
        _simulate_one(source, out, args)
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _config_exit(exc)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _dump_state(state: SocialState, machine: bool) -> None:
    if machine:
        for role, principal in state.casting:
            print(json.dumps({"record": "casting", "role": role, "principal": principal}))
        for c in sorted(state.commitments.values(), key=lambda c: c.order):
            print(
                json.dumps(
                    {
                        "record": "commitment",
                        "id": c.id,
                        "state": c.state.value,
                        "debtor": c.debtor,
                        "creditor": c.creditor,
                        "antecedent": render(c.antecedent),
                        "consequent": render(c.consequent),
                    }
                )
            )
        return
    print(f"events: {len(state.history)}")
    if state.casting:
        pairs = ", ".join(f"{role}={principal}" for role, principal in state.casting)
        print(f"casting: {pairs}")
    for c in sorted(state.commitments.values(), key=lambda c: c.order):
        print(f"{c.id} {c.state.value}: {c.render()}")


def _cmd_replay(args: argparse.Namespace) -> int:
    protocol = _load_protocol(args.protocol, args.machine)
    events = _load_trace(args.trace)
    try:
        state = replay(events, protocol)
    except ReplayError as exc:
        print(f"error: {args.trace}: {exc}", file=sys.stderr)
        return 2
    _dump_state(state, args.machine)
    return 0


def _cmd_comply(args: argparse.Namespace) -> int:
    protocol = _load_protocol(args.protocol, args.machine)
    events = _load_trace(args.trace)
    try:
        report = compliance_check(events, protocol, horizon=args.horizon)
    except ReplayError as exc:
        print(f"error: {args.trace}: {exc}", file=sys.stderr)
        return 2
    if args.machine:
        for record in report_records(report):
            print(json.dumps(record))
    else:
        print(render_report(report))
        if report.all_compliant:
            print("all principals compliant")
    return 0 if report.all_compliant else 1


def _cmd_explain(args: argparse.Namespace) -> int:
    protocol = _load_protocol(args.protocol, args.machine)
    events = _load_trace(args.trace)
    try:
        state = replay(events, protocol)
        steps = explain_chain(state, args.commitment)
    except ReplayError as exc:
        print(f"error: {args.trace}: {exc}", file=sys.stderr)
        return 2
    except UnknownCommitment as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.machine:
        for step in steps:
            print(
                json.dumps(
                    {
                        "record": "step",
                        "commitment": step.commitment_id,
                        "seq": step.seq,
                        "state": step.state,
                        "event": None if step.event is None else step.event.name,
                        "time": None if step.event is None else step.event.time,
                    }
                )
            )
    else:
        for step in steps:
            print(step.human())
    return 0


def _bundled(name: str) -> str:
    return (resources.files("commitlab") / "data" / name).read_text(encoding="utf-8")


def _demo_config() -> ScenarioConfig:
    decl, diagnostics = parse_scenario_text(_bundled("appointment.scn"))
    if decl is None:
        details = "\n".join(d.human("appointment.scn") for d in diagnostics)
        raise ConfigError(f"bundled scenario does not parse:\n{details}")
    return build_config(decl, _bundled("appointment.cp"), "appointment.cp")


def _label_names(config: ScenarioConfig) -> dict[tuple[str, str, str, str], str]:
    names: dict[tuple[str, str, str, str], str] = {}
    for decl in config.setup:
        key = (decl.debtor, decl.creditor, render(decl.antecedent), render(decl.consequent))
        names.setdefault(key, decl.commitment_id)
    for label in config.labels:
        key = (label.debtor, label.creditor, render(label.antecedent), render(label.consequent))
        names.setdefault(key, label.name)
    return names


def _box_lines(state: SocialState, names: dict[tuple[str, str, str, str], str]) -> list[str]:
    seen: set[tuple[str, str]] = set()
    lines: list[tuple[str, str]] = []
    for c in sorted(state.commitments.values(), key=lambda c: c.order):
        if not c.active:
            continue
        debtor, creditor, antecedent, consequent = c.display_content()
        content = f"C({debtor}, {creditor}, {antecedent}, {consequent})"
        label = names.get((debtor, creditor, antecedent, consequent), c.id)
        if (label, content) in seen:
            continue
        seen.add((label, content))
        lines.append((label, content))
    lines.sort()
    return [f"  {label}: {content}" for label, content in lines]


def _cmd_demo(args: argparse.Namespace) -> int:
    config = _demo_config()
    result = run(config, seed=args.seed if args.seed is not None else 0)
    if args.machine:
        sys.stdout.write(write_trace(result.events))
        return 0
    names = _label_names(config)
    cast = ", ".join(f"{principal} as {role}" for role, principal in config.casting)
    print(f"protocol {config.protocol.name}, enacted by {cast}")
    print()
    setup_done = sum(1 for ev in result.events if ev.name.startswith("@"))
    shown_initial = False
    final_state: SocialState | None = None
    for ev, state in replay_steps(result.events, config.protocol):
        final_state = state
        if not shown_initial and ev.seq == setup_done:
            print("initially:")
            for line in _box_lines(state, names):
                print(line)
            print()
            shown_initial = True
        if ev.kind.value == "MessageSent":
            rendered = ", ".join(render_term(Literal(v)) for v in ev.atom_args())
            print(f"after {ev.name}({rendered}):")
            for line in _box_lines(state, names):
                print(line)
            print()
    assert final_state is not None
    active = _box_lines(final_state, names)
    labels = ", ".join(line.strip().split(":")[0] for line in active)
    print(f"active at the end: {labels}")
    return 0


# ---------------------------------------------------------------------------
# wiring


def build_arg_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="commitlab",
        description="Specify, enact and check commitment protocols.",
    )
    sub = top.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("check-syntax", help="parse a protocol and report syntax errors")
    p.add_argument("path", help="protocol file (.cp)")
    p.add_argument("--machine", action="store_true", help="one JSON record per line")
    p.set_defaults(func=_cmd_check_syntax)

    p = sub.add_parser("lint", help="validate and lint a protocol")
    p.add_argument("path", help="protocol file (.cp)")
    p.add_argument("--machine", action="store_true")
    p.set_defaults(func=_cmd_lint)

    p = sub.add_parser("simulate", help="run a scenario (or a directory of them)")
    p.add_argument("scenario", help="scenario file (.scn) or directory")
    p.add_argument("--seed", type=int, default=None, help=f"overrides scenario seed and {SEED_ENV}")
    p.add_argument("--out", default=None, help="trace file (or directory when simulating one)")
    p.add_argument("--machine", action="store_true")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("replay", help="rebuild the social state from a trace")
    p.add_argument("trace", help="trace file (JSON lines)")
    p.add_argument("--protocol", required=True, help="protocol file (.cp)")
    p.add_argument("--machine", action="store_true")
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("comply", help="judge compliance and accountability over a trace")
    p.add_argument("trace")
    p.add_argument("--protocol", required=True)
    p.add_argument("--horizon", type=int, default=None, help="judge the trace up to this time")
    p.add_argument("--machine", action="store_true")
    p.set_defaults(func=_cmd_comply)

    p = sub.add_parser("explain", help="trace one commitment's states back to events")
    p.add_argument("trace")
    p.add_argument("commitment", help="commitment id, e.g. k3")
    p.add_argument("--protocol", required=True)
    p.add_argument("--machine", action="store_true")
    p.set_defaults(func=_cmd_explain)

    p = sub.add_parser("demo", help="run the bundled appointment scenario")
    p.add_argument("--seed", type=int, default=None, help="accepted for symmetry; the demo is scripted")
    p.add_argument("--machine", action="store_true", help="emit the trace records instead of boxes")
    p.set_defaults(func=_cmd_demo)

    return top


def main(argv: list[str] | None = None) -> int:
    parser = build_arg_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _Fail as fail:
        return fail.code
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _config_exit(exc)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
