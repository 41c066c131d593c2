"""Conditions that commitments are about.

A proposition describes something observable in an interaction: an event
having occurred, one event having occurred before another, a commitment
holding between two principals, a conjunction, or an existential choice
over a finite list of values.  Propositions are immutable trees; terms at
the leaves are literals, named variables, role placeholders, or the
wildcard `_` which matches any value.

Truth is three-valued.  Against a given history a proposition is Satisfied,
Violated, or still Pending; evaluation itself lives with the social state,
since commitment conditions can refer back to other commitments.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Union

LiteralValue = Union[int, str, tuple["LiteralValue", ...]]


class TruthStatus(enum.Enum):
    SATISFIED = "satisfied"
    PENDING = "pending"
    VIOLATED = "violated"


@dataclass(frozen=True)
class Literal:
    value: LiteralValue


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class RoleRef:
    """A protocol role used as a term; cast to a principal at enactment."""

    name: str


@dataclass(frozen=True)
class Wildcard:
    pass


WILDCARD = Wildcard()

Term = Union[Literal, Var, RoleRef, Wildcard]


@dataclass(frozen=True)
class Top:
    """The trivially satisfied condition."""


@dataclass(frozen=True)
class EventAtom:
    """Occurrence of a named event.

    With no args the atom matches any occurrence of the name; with args it
    matches positionally, wildcards matching anything.  For message events
    the first two positions are the sending and receiving principals.
    """

    name: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True)
class CommitmentAtom:
    """A commitment with this exact content holding between two principals."""

    debtor: Term
    creditor: Term
    antecedent: "Proposition"
    consequent: "Proposition"


@dataclass(frozen=True)
class And:
    parts: tuple["Proposition", ...]


@dataclass(frozen=True)
class ExistsIn:
    """Existential choice of `var` from a finite domain.

    The domain is either a concrete tuple of terms or a variable that a
    message binding will replace with one.  When an ExistsIn forms a
    commitment's antecedent, its variable also scopes over the consequent;
    the chosen witness is substituted there when the commitment detaches.
    """

    var: str
    domain: Union[tuple[Term, ...], Var]
    body: "Proposition"


@dataclass(frozen=True)
class Before:
    """`first . second`: some occurrence of `first` precedes the first
    occurrence of `second`."""

    first: EventAtom
    second: EventAtom


@dataclass(frozen=True)
class AnyProposition:
    """Pattern-only wildcard standing for any proposition."""


Proposition = Union[Top, EventAtom, CommitmentAtom, And, ExistsIn, Before, AnyProposition]


def conjoin(parts: list[Proposition]) -> Proposition:
    """Build a conjunction, flattening nested Ands and dropping Tops."""
    flat: list[Proposition] = []
    for p in parts:
        if isinstance(p, And):
            flat.extend(p.parts)
        elif not isinstance(p, Top):
            flat.append(p)
    if not flat:
        return Top()
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def substitute_term(term: Term, env: dict[str, Literal]) -> Term:
    if isinstance(term, Var) and term.name in env:
        return env[term.name]
    if isinstance(term, RoleRef) and term.name in env:
        return env[term.name]
    return term


def substitute(prop: Proposition, env: dict[str, Literal]) -> Proposition:
    """Replace variables and role placeholders by literals, capture-aware."""
    if isinstance(prop, (Top, AnyProposition)):
        return prop
    if isinstance(prop, EventAtom):
        return EventAtom(prop.name, tuple(substitute_term(t, env) for t in prop.args))
    if isinstance(prop, CommitmentAtom):
        # an antecedent-bound variable shadows env inside the consequent
        inner_env = env
        if isinstance(prop.antecedent, ExistsIn) and prop.antecedent.var in env:
            inner_env = {k: v for k, v in env.items() if k != prop.antecedent.var}
        return CommitmentAtom(
            substitute_term(prop.debtor, env),
            substitute_term(prop.creditor, env),
            substitute(prop.antecedent, env),
            substitute(prop.consequent, inner_env),
        )
    if isinstance(prop, And):
        return And(tuple(substitute(p, env) for p in prop.parts))
    if isinstance(prop, ExistsIn):
        domain = prop.domain
        if isinstance(domain, Var):
            replacement = env.get(domain.name)
            if replacement is not None:
                value = replacement.value
                # list-valued binding becomes the concrete domain
                if isinstance(value, tuple):
                    domain = tuple(Literal(v) for v in value)
                else:
                    domain = (replacement,)
        else:
            domain = tuple(substitute_term(t, env) for t in domain)
        inner_env = {k: v for k, v in env.items() if k != prop.var}
        return ExistsIn(prop.var, domain, substitute(prop.body, inner_env))
    if isinstance(prop, Before):
        return Before(
            EventAtom(prop.first.name, tuple(substitute_term(t, env) for t in prop.first.args)),
            EventAtom(prop.second.name, tuple(substitute_term(t, env) for t in prop.second.args)),
        )
    raise TypeError(f"not a proposition: {prop!r}")


def _term_vars(term: Term) -> set[str]:
    if isinstance(term, Var):
        return {term.name}
    return set()


def free_vars(prop: Proposition) -> set[str]:
    """Names of variables not bound by an enclosing ExistsIn.

    Role placeholders are not variables; they are resolved by casting."""
    if isinstance(prop, (Top, AnyProposition)):
        return set()
    if isinstance(prop, EventAtom):
        out: set[str] = set()
        for t in prop.args:
            out |= _term_vars(t)
        return out
    if isinstance(prop, CommitmentAtom):
        out = _term_vars(prop.debtor) | _term_vars(prop.creditor)
        out |= free_vars(prop.antecedent)
        consequent_free = free_vars(prop.consequent)
        # an existential antecedent extends its scope over the consequent
        if isinstance(prop.antecedent, ExistsIn):
            consequent_free -= {prop.antecedent.var}
        return out | consequent_free
    if isinstance(prop, And):
        out = set()
        for p in prop.parts:
            out |= free_vars(p)
        return out
    if isinstance(prop, ExistsIn):
        out = set()
        if isinstance(prop.domain, Var):
            out.add(prop.domain.name)
        else:
            for t in prop.domain:
                out |= _term_vars(t)
        return out | (free_vars(prop.body) - {prop.var})
    if isinstance(prop, Before):
        return free_vars(prop.first) | free_vars(prop.second)
    raise TypeError(f"not a proposition: {prop!r}")


def role_refs(prop: Proposition) -> set[str]:
    """Names of role placeholders still awaiting a casting."""
    if isinstance(prop, (Top, AnyProposition)):
        return set()
    if isinstance(prop, EventAtom):
        return {t.name for t in prop.args if isinstance(t, RoleRef)}
    if isinstance(prop, CommitmentAtom):
        out = {t.name for t in (prop.debtor, prop.creditor) if isinstance(t, RoleRef)}
        return out | role_refs(prop.antecedent) | role_refs(prop.consequent)
    if isinstance(prop, And):
        out = set()
        for p in prop.parts:
            out |= role_refs(p)
        return out
    if isinstance(prop, ExistsIn):
        out = set()
        if not isinstance(prop.domain, Var):
            out |= {t.name for t in prop.domain if isinstance(t, RoleRef)}
        return out | role_refs(prop.body)
    if isinstance(prop, Before):
        return role_refs(prop.first) | role_refs(prop.second)
    raise TypeError(f"not a proposition: {prop!r}")


def contains_commitment(prop: Proposition) -> bool:
    if isinstance(prop, CommitmentAtom):
        return True
    if isinstance(prop, And):
        return any(contains_commitment(p) for p in prop.parts)
    if isinstance(prop, ExistsIn):
        return contains_commitment(prop.body)
    return False


def _ident_safe(s: str) -> bool:
    # a bare `_` would read back as a wildcard
    return s.isidentifier() and s != "_"


def render_term(term: Term, *, quote_strings: bool = False) -> str:
    if isinstance(term, Literal):
        v = term.value
        if isinstance(v, int):
            return str(v)
        if isinstance(v, tuple):
            return "[" + ", ".join(render_term(Literal(x), quote_strings=quote_strings) for x in v) + "]"
        if _ident_safe(v) and not quote_strings:
            return v
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(term, (Var, RoleRef)):
        return term.name
    if isinstance(term, Wildcard):
        return "_"
    raise TypeError(f"not a term: {term!r}")


def render(prop: Proposition, *, quote_strings: bool = False) -> str:
    """Canonical text form; the parser reads this back.

    With quote_strings, string literals always render quoted: protocol
    sources read bare identifiers as variables or roles, never literals."""
    return _render(prop, frozenset(), quote_strings)


def _shadow_safe(term: Term, bound: frozenset[str], quote: bool) -> str:
    # a string literal that spells a bound variable must stay a literal
    if isinstance(term, Literal) and isinstance(term.value, str) and term.value in bound:
        return render_term(term, quote_strings=True)
    return render_term(term, quote_strings=quote)


def _render(prop: Proposition, bound: frozenset[str], quote: bool) -> str:
    if isinstance(prop, Top):
        return "top"
    if isinstance(prop, AnyProposition):
        return "_"
    if isinstance(prop, EventAtom):
        if not prop.args:
            return prop.name
        return prop.name + "(" + ", ".join(_shadow_safe(t, bound, quote) for t in prop.args) + ")"
    if isinstance(prop, CommitmentAtom):
        inner = bound
        if isinstance(prop.antecedent, ExistsIn):
            inner = bound | {prop.antecedent.var}
        return "C({}, {}, {}, {})".format(
            _shadow_safe(prop.debtor, bound, quote),
            _shadow_safe(prop.creditor, bound, quote),
            _render(prop.antecedent, bound, quote),
            _render(prop.consequent, inner, quote),
        )
    if isinstance(prop, And):
        rendered = []
        for p in prop.parts:
            text = _render(p, bound, quote)
            if isinstance(p, ExistsIn):
                text = "(" + text + ")"
            rendered.append(text)
        return " and ".join(rendered)
    if isinstance(prop, ExistsIn):
        if isinstance(prop.domain, Var):
            domain = prop.domain.name
        else:
            domain = "[" + ", ".join(_shadow_safe(t, bound, quote) for t in prop.domain) + "]"
        return f"exists {prop.var} in {domain}: {_render(prop.body, bound | {prop.var}, quote)}"
    if isinstance(prop, Before):
        return f"{_render(prop.first, bound, quote)} . {_render(prop.second, bound, quote)}"
    raise TypeError(f"not a proposition: {prop!r}")


def term_matches(pattern: Term, value: Term) -> bool:
    if isinstance(pattern, Wildcard):
        return True
    return pattern == value


def prop_matches(pattern: Proposition, value: Proposition) -> bool:
    """Structural match where Wildcard/AnyProposition stand for anything.

    Used to pick out the commitments a release, cancel, delegate, or
    assign refers to."""
    if isinstance(pattern, AnyProposition):
        return True
    if type(pattern) is not type(value):
        return False
    if isinstance(pattern, Top):
        return True
    if isinstance(pattern, EventAtom):
        assert isinstance(value, EventAtom)
        if pattern.name != value.name:
            return False
        if not pattern.args:
            return True
        if len(pattern.args) != len(value.args):
            return False
        return all(term_matches(p, v) for p, v in zip(pattern.args, value.args))
    if isinstance(pattern, CommitmentAtom):
        assert isinstance(value, CommitmentAtom)
        return (
            term_matches(pattern.debtor, value.debtor)
            and term_matches(pattern.creditor, value.creditor)
            and prop_matches(pattern.antecedent, value.antecedent)
            and prop_matches(pattern.consequent, value.consequent)
        )
    if isinstance(pattern, And):
        assert isinstance(value, And)
        if len(pattern.parts) != len(value.parts):
            return False
        return all(prop_matches(p, v) for p, v in zip(pattern.parts, value.parts))
    if isinstance(pattern, ExistsIn):
        assert isinstance(value, ExistsIn)
        if pattern.var != value.var:
            return False
        if isinstance(pattern.domain, Var) or isinstance(value.domain, Var):
            if pattern.domain != value.domain:
                return False
        else:
            if len(pattern.domain) != len(value.domain):
                return False
            if not all(term_matches(p, v) for p, v in zip(pattern.domain, value.domain)):
                return False
        return prop_matches(pattern.body, value.body)
    if isinstance(pattern, Before):
        assert isinstance(value, Before)
        return prop_matches(pattern.first, value.first) and prop_matches(
            pattern.second, value.second
        )
    raise TypeError(f"not a proposition: {pattern!r}")


def event_names(prop: Proposition) -> set[str]:
    """All event names the proposition can observe."""
    if isinstance(prop, EventAtom):
        return {prop.name}
    if isinstance(prop, CommitmentAtom):
        return event_names(prop.antecedent) | event_names(prop.consequent)
    if isinstance(prop, And):
        out: set[str] = set()
        for p in prop.parts:
            out |= event_names(p)
        return out
    if isinstance(prop, ExistsIn):
        return event_names(prop.body)
    if isinstance(prop, Before):
        return {prop.first.name, prop.second.name}
    return set()
