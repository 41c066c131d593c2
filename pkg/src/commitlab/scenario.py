"""Scenario files: who plays which role, over what network, doing what.

A scenario binds a protocol to concrete principals and describes one
enactment to simulate: pre-existing commitments, the network's delivery
behaviour, domain-event injections, and a policy per principal.  Policies
are deliberately small (scripts, silence, or seeded random choice among
compliant sends): the protocol never gets to see why a principal acts.

    scenario appointment {
      protocol "appointment.cp"
      cast PHY as alessia
      cast PAT as bianca
      setup c0 = C(alessia, bianca, requestAppointment(bianca, alessia),
                   availableSlots(alessia, bianca, _))
      network { fifo on  delay fixed 1 }
      maxtime 20
      principal bianca {
        script {
          on start send requestAppointment
          on availableSlots send selectSlot(1400)
        }
      }
    }

`label` declarations give display names to expected commitment contents;
the demo uses them to print the progression the way a reader expects.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Union

from .diagnostics import Diagnostic, Severity, Span, has_errors
from .errors import ConfigError
from .parser import PropParser, Token, _Bail, parse_with_diagnostics, tokenize
from .propositions import Literal, LiteralValue, Proposition, Term, render_term
from .protocol import Protocol
from .validator import validate


@dataclass(frozen=True)
class SetupDecl:
    commitment_id: str
    debtor: str
    creditor: str
    antecedent: Proposition
    consequent: Proposition


@dataclass(frozen=True)
class LabelDecl:
    name: str
    debtor: str
    creditor: str
    antecedent: Proposition
    consequent: Proposition


@dataclass(frozen=True)
class Injection:
    time: int
    name: str
    args: tuple[LiteralValue, ...]


@dataclass(frozen=True)
class ScriptRule:
    """Send `message(args)` once, when the trigger holds in the own view.

    A None trigger name means "at the start"."""

    trigger_name: str | None
    trigger_args: tuple[Term, ...]
    message: str
    args: tuple[LiteralValue, ...]


@dataclass(frozen=True)
class ScriptedPolicy:
    rules: tuple[ScriptRule, ...]


@dataclass(frozen=True)
class SilentPolicy:
    pass


@dataclass(frozen=True)
class RandomPolicy:
    """Seeded random choice among sends that keep the sender compliant.

    At each activation the principal either stays quiet or emits one of
    the messages it could send without putting any commitment of its own
    into Violated, judged against its local view.  `values` feeds message
    parameters; `max_sends` caps its chattiness."""

    max_sends: int = 2
    values: tuple[LiteralValue, ...] = ()


Policy = Union[ScriptedPolicy, SilentPolicy, RandomPolicy]


@dataclass(frozen=True)
class NetworkModel:
    fifo: bool = True
    delay_kind: str = "fixed"  # fixed | uniform
    delay_min: int = 1
    delay_max: int = 1


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    protocol_path: str
    protocol: Protocol
    casting: tuple[tuple[str, str], ...]
    setup: tuple[SetupDecl, ...] = ()
    labels: tuple[LabelDecl, ...] = ()
    network: NetworkModel = field(default_factory=NetworkModel)
    seed: int | None = None
    max_time: int = 100
    injections: tuple[Injection, ...] = ()
    policies: tuple[tuple[str, Policy], ...] = ()

    def principals(self) -> list[str]:
        """All principals, in activation order: cast first, then extras."""
        out: list[str] = []
        for _, principal in self.casting:
            if principal not in out:
                out.append(principal)
        for principal, _ in self.policies:
            if principal not in out:
                out.append(principal)
        return out

    def policy_of(self, principal: str) -> Policy:
        for name, policy in self.policies:
            if name == principal:
                return policy
        return SilentPolicy()


@dataclass
class ScenarioDecl:
    """Parsed scenario source, before the protocol file is resolved."""

    name: str = "scenario"
    protocol_path: str | None = None
    casting: list[tuple[str, str]] = field(default_factory=list)
    setup: list[SetupDecl] = field(default_factory=list)
    labels: list[LabelDecl] = field(default_factory=list)
    network: NetworkModel = field(default_factory=NetworkModel)
    seed: int | None = None
    max_time: int = 100
    injections: list[Injection] = field(default_factory=list)
    policies: list[tuple[str, Policy]] = field(default_factory=list)


_SYNC = frozenset(
    {"protocol", "cast", "setup", "label", "network", "seed", "maxtime", "inject", "principal"}
)


class _ScenarioParser(PropParser):
    def __init__(self, tokens: list[Token], diagnostics: list[Diagnostic]):
        super().__init__(tokens, diagnostics, literal_idents=True)

    def sync(self) -> None:
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                return
            if tok.kind == "ident" and tok.text in _SYNC:
                return
            if tok.kind == "punct" and tok.text == "}":
                return
            self.next()

    def parse_scenario(self) -> ScenarioDecl:
        decl = ScenarioDecl()
        if not self.at_ident("scenario"):
            self.bail(self.peek(), "expected scenario header")
        self.next()
        decl.name = self.expect_ident("scenario name").text
        self.expect_punct("{")
        while not self.at_punct("}"):
            tok = self.peek()
            if tok.kind == "eof":
                self.bail(tok, "unexpected end of input, expected '}'")
            try:
                self.parse_decl(decl)
            except _Bail:
                self.sync()
        self.expect_punct("}")
        return decl

    def parse_decl(self, decl: ScenarioDecl) -> None:
        tok = self.peek()
        if tok.kind != "ident":
            self.bail(tok, "expected a scenario declaration")
        if tok.text == "protocol":
            self.next()
            path = self.peek()
            if path.kind not in ("string", "ident"):
                self.bail(path, "expected a protocol file path")
            self.next()
            decl.protocol_path = path.text
        elif tok.text == "cast":
            self.next()
            role = self.expect_ident("role name")
            if not self.at_ident("as"):
                self.bail(self.peek(), "expected 'as'")
            self.next()
            principal = self.expect_ident("principal name")
            decl.casting.append((role.text, principal.text))
        elif tok.text in ("setup", "label"):
            self.next()
            name = self.expect_ident("name")
            self.expect_punct("=")
            atom = self.parse_commitment_atom(pattern=False)
            debtor = self._principal_term(atom.debtor, tok)
            creditor = self._principal_term(atom.creditor, tok)
            if tok.text == "setup":
                decl.setup.append(
                    SetupDecl(name.text, debtor, creditor, atom.antecedent, atom.consequent)
                )
            else:
                decl.labels.append(
                    LabelDecl(name.text, debtor, creditor, atom.antecedent, atom.consequent)
                )
        elif tok.text == "network":
            self.next()
            self.expect_punct("{")
            network = decl.network
            while not self.at_punct("}"):
                inner = self.peek()
                if inner.kind != "ident":
                    self.bail(inner, "expected a network setting")
                if inner.text == "fifo":
                    self.next()
                    mode = self.expect_ident("'on' or 'off'")
                    if mode.text not in ("on", "off"):
                        self.bail(mode, "expected 'on' or 'off'")
                    network = NetworkModel(
                        mode.text == "on", network.delay_kind, network.delay_min, network.delay_max
                    )
                elif inner.text == "delay":
                    self.next()
                    kind = self.expect_ident("'fixed' or 'uniform'")
                    if kind.text == "fixed":
                        value = self._int("delay")
                        network = NetworkModel(network.fifo, "fixed", value, value)
                    elif kind.text == "uniform":
                        lo = self._int("minimum delay")
                        hi = self._int("maximum delay")
                        if lo > hi or lo < 0:
                            self.bail(kind, "uniform delay needs 0 <= min <= max")
                        network = NetworkModel(network.fifo, "uniform", lo, hi)
                    else:
                        self.bail(kind, "expected 'fixed' or 'uniform'")
                else:
                    self.bail(inner, f"unknown network setting {inner.text!r}")
            self.expect_punct("}")
            decl.network = network
        elif tok.text == "seed":
            self.next()
            decl.seed = self._int("seed")
        elif tok.text == "maxtime":
            self.next()
            decl.max_time = self._int("maximum time")
        elif tok.text == "inject":
            self.next()
            if not self.at_ident("at"):
                self.bail(self.peek(), "expected 'at'")
            self.next()
            time = self._int("time")
            name = self.expect_ident("event name")
            args = self._literal_args()
            decl.injections.append(Injection(time, name.text, args))
        elif tok.text == "principal":
            self.next()
            principal = self.expect_ident("principal name")
            self.expect_punct("{")
            policy = self.parse_policy()
            self.expect_punct("}")
            decl.policies.append((principal.text, policy))
        else:
            self.bail(tok, f"unknown declaration {tok.text!r}")

    def parse_policy(self) -> Policy:
        tok = self.peek()
        if tok.kind != "ident":
            self.bail(tok, "expected a policy")
        if tok.text == "silent":
            self.next()
            return SilentPolicy()
        if tok.text == "random":
            self.next()
            max_sends = 2
            values: tuple[LiteralValue, ...] = ()
            if self.at_punct("{"):
                self.next()
                while not self.at_punct("}"):
                    inner = self.peek()
                    if self.at_ident("sends"):
                        self.next()
                        max_sends = self._int("send budget")
                    elif self.at_ident("values"):
                        self.next()
                        values = self.parse_list_literal().value  # type: ignore[assignment]
                    else:
                        self.bail(inner, f"unknown random setting {inner.text!r}")
                self.expect_punct("}")
            return RandomPolicy(max_sends=max_sends, values=values)
        if tok.text == "script":
            self.next()
            self.expect_punct("{")
            rules: list[ScriptRule] = []
            while not self.at_punct("}"):
                if not self.at_ident("on"):
                    self.bail(self.peek(), "expected 'on'")
                self.next()
                trigger_name: str | None
                trigger_args: tuple[Term, ...] = ()
                if self.at_ident("start"):
                    self.next()
                    trigger_name = None
                else:
                    trig = self.expect_ident("trigger event name")
                    trigger_name = trig.text
                    if self.at_punct("("):
                        self.next()
                        items: list[Term] = []
                        if not self.at_punct(")"):
                            while True:
                                items.append(self.parse_term(allow_wildcard=True))
                                if self.at_punct(","):
                                    self.next()
                                    continue
                                break
                        self.expect_punct(")")
                        trigger_args = tuple(items)
                if not self.at_ident("send"):
                    self.bail(self.peek(), "expected 'send'")
                self.next()
                message = self.expect_ident("message name")
                args = self._literal_args()
                rules.append(ScriptRule(trigger_name, trigger_args, message.text, args))
            self.expect_punct("}")
            return ScriptedPolicy(tuple(rules))
        self.bail(tok, f"unknown policy {tok.text!r}")
        raise AssertionError("unreachable")

    def _literal_args(self) -> tuple[LiteralValue, ...]:
        if not self.at_punct("("):
            return ()
        self.next()
        values: list[LiteralValue] = []
        if not self.at_punct(")"):
            while True:
                tok = self.peek()
                term = self.parse_term(allow_wildcard=False)
                if not isinstance(term, Literal):
                    self.error(tok, f"expected a literal value, got {render_term(term)}")
                    term = Literal(render_term(term))
                values.append(term.value)
                if self.at_punct(","):
                    self.next()
                    continue
                break
        self.expect_punct(")")
        return tuple(values)

    def _int(self, what: str) -> int:
        tok = self.peek()
        if tok.kind != "int":
            self.bail(tok, f"expected {what} (an integer)")
        self.next()
        return int(tok.text)

    def _principal_term(self, term: Term, at: Token) -> str:
        if isinstance(term, Literal) and isinstance(term.value, str):
            return term.value
        self.error(at, "commitment parties must be concrete principal names")
        return "?"


def parse_scenario_text(text: str) -> tuple[ScenarioDecl | None, list[Diagnostic]]:
    tokens, diagnostics = tokenize(text)
    parser = _ScenarioParser(tokens, diagnostics)
    decl: ScenarioDecl | None = None
    try:
        decl = parser.parse_scenario()
    except _Bail:
        decl = None
    if has_errors(diagnostics):
        decl = None
    return decl, diagnostics


def load_scenario(path: str) -> ScenarioConfig:
    """Read and check a scenario and its protocol; ConfigError on any problem."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path!r}: {exc}") from exc
    decl, diagnostics = parse_scenario_text(text)
    if decl is None:
        details = "\n".join(d.human(path) for d in diagnostics if d.is_error)
        raise ConfigError(f"scenario {path!r} does not parse:\n{details}")
    if decl.protocol_path is None:
        raise ConfigError(f"scenario {path!r} names no protocol file")

    protocol_file = os.path.join(os.path.dirname(path) or ".", decl.protocol_path)
    try:
        with open(protocol_file, "r", encoding="utf-8") as fh:
            protocol_text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read protocol {protocol_file!r}: {exc}") from exc
    return build_config(decl, protocol_text, protocol_file)


def build_config(decl: ScenarioDecl, protocol_text: str, protocol_file: str) -> ScenarioConfig:
    result = parse_with_diagnostics(protocol_text)
    if result.protocol is None:
        details = "\n".join(d.human(protocol_file) for d in result.diagnostics if d.is_error)
        raise ConfigError(f"protocol {protocol_file!r} does not parse:\n{details}")
    protocol = result.protocol
    structural = [d for d in validate(protocol) if d.is_error]
    if structural:
        details = "\n".join(d.human(protocol_file) for d in structural)
        raise ConfigError(f"protocol {protocol_file!r} is not valid:\n{details}")

    cast_roles = {role for role, _ in decl.casting}
    for role in protocol.roles:
        if role not in cast_roles:
            raise ConfigError(f"role {role!r} is not cast to any principal")
    for role in cast_roles:
        if role not in protocol.roles:
            raise ConfigError(f"cast names unknown role {role!r}")
    casting_map = dict(decl.casting)

    for principal, policy in decl.policies:
        if isinstance(policy, ScriptedPolicy):
            for rule in policy.rules:
                schema = protocol.message(rule.message)
                if schema is None:
                    raise ConfigError(
                        f"policy of {principal!r} sends unknown message {rule.message!r}"
                    )
                expected_sender = casting_map.get(schema.sender)
                if expected_sender != principal:
                    raise ConfigError(
                        f"policy of {principal!r} sends {rule.message!r}, but its "
                        f"sender role {schema.sender} is cast as {expected_sender!r}"
                    )
                if len(rule.args) != len(schema.params):
                    raise ConfigError(
                        f"policy of {principal!r} sends {rule.message!r} with "
                        f"{len(rule.args)} argument(s); schema has {len(schema.params)}"
                    )

    return ScenarioConfig(
        name=decl.name,
        protocol_path=decl.protocol_path or "",
        protocol=protocol,
        casting=tuple(decl.casting),
        setup=tuple(decl.setup),
        labels=tuple(decl.labels),
        network=decl.network,
        seed=decl.seed,
        max_time=decl.max_time,
        injections=tuple(decl.injections),
        policies=tuple(decl.policies),
    )
