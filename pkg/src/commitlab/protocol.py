"""Protocol definitions: roles, messages, and their social meanings.

A protocol says nothing about when principals choose to act; it only fixes
which messages exist and what each one counts as, stated entirely in terms
of commitment operations between the roles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .diagnostics import Span
from .propositions import Proposition, Term, event_names


@dataclass(frozen=True)
class CreateClause:
    debtor: Term
    creditor: Term
    antecedent: Proposition
    consequent: Proposition
    span: Span = field(default=Span(1, 1, 1, 1), compare=False)


@dataclass(frozen=True)
class CommitmentPattern:
    """Shape picking out existing commitments; `_` matches anything."""

    debtor: Term
    creditor: Term
    antecedent: Proposition
    consequent: Proposition


@dataclass(frozen=True)
class ReleaseClause:
    pattern: CommitmentPattern
    span: Span = field(default=Span(1, 1, 1, 1), compare=False)


@dataclass(frozen=True)
class CancelClause:
    pattern: CommitmentPattern
    span: Span = field(default=Span(1, 1, 1, 1), compare=False)


@dataclass(frozen=True)
class DelegateClause:
    pattern: CommitmentPattern
    target_role: str
    span: Span = field(default=Span(1, 1, 1, 1), compare=False)


@dataclass(frozen=True)
class AssignClause:
    pattern: CommitmentPattern
    target_role: str
    span: Span = field(default=Span(1, 1, 1, 1), compare=False)


MeaningClause = Union[CreateClause, ReleaseClause, CancelClause, DelegateClause, AssignClause]


@dataclass(frozen=True)
class MessageSchema:
    name: str
    sender: str
    receiver: str
    params: tuple[str, ...]
    meaning: tuple[MeaningClause, ...]
    # True when the source said `meaning none`: deliberately no effect,
    # as opposed to a meaning the author forgot to state
    meaning_none: bool
    span: Span = field(default=Span(1, 1, 1, 1), compare=False)


@dataclass(frozen=True)
class OrderingConstraint:
    """A bare `order a < b` clause.

    Parseable so the lint has something to flag: an ordering nobody is
    accountable for should instead be a commitment wrapping `a . b`."""

    first: str
    second: str
    span: Span = field(default=Span(1, 1, 1, 1), compare=False)


@dataclass(frozen=True)
class Protocol:
    name: str
    roles: tuple[str, ...]
    params: tuple[str, ...]
    messages: tuple[MessageSchema, ...]
    orderings: tuple[OrderingConstraint, ...] = ()
    span: Span = field(default=Span(1, 1, 1, 1), compare=False)

    def message(self, name: str) -> MessageSchema | None:
        for m in self.messages:
            if m.name == name:
                return m
        return None

    def mentions_clock(self) -> bool:
        """Whether any meaning observes the tick event (deadlines)."""
        for m in self.messages:
            for clause in m.meaning:
                if isinstance(clause, CreateClause):
                    names = event_names(clause.antecedent) | event_names(clause.consequent)
                    if "tick" in names:
                        return True
        return False
