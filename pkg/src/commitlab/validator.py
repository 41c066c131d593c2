"""Structural validation of parsed protocols.

Validation is about well-formedness a parser cannot see: role arity,
name clashes, variable boundness, and the rule that only the sender of a
message can become a debtor through it.  All findings are errors; design
advice lives in the linter.
"""

from __future__ import annotations

from .diagnostics import Diagnostic, Severity, Span
from .propositions import ExistsIn, RoleRef, Term, Var, free_vars, role_refs
from .protocol import (
    AssignClause,
    CancelClause,
    CommitmentPattern,
    CreateClause,
    DelegateClause,
    MessageSchema,
    Protocol,
    ReleaseClause,
)


def _error(rule: str, span: Span, message: str, principle: str = "syntax") -> Diagnostic:
    return Diagnostic(Severity.ERROR, rule, span, message, principle)


def _pattern_names(pattern: CommitmentPattern) -> tuple[set[str], set[str]]:
    variables = free_vars(pattern.antecedent) | free_vars(pattern.consequent)
    roles = role_refs(pattern.antecedent) | role_refs(pattern.consequent)
    for term in (pattern.debtor, pattern.creditor):
        if isinstance(term, Var):
            variables.add(term.name)
        if isinstance(term, RoleRef):
            roles.add(term.name)
    return variables, roles


def validate(protocol: Protocol) -> list[Diagnostic]:
    diagnostics: list[Diagnostic] = []
    span = protocol.span

    if len(protocol.roles) < 2:
        diagnostics.append(
            _error(
                "D-ROLES",
                span,
                f"protocol {protocol.name!r} declares {len(protocol.roles)} role(s); "
                "an interaction needs at least two",
            )
        )
    seen_roles: set[str] = set()
    for role in protocol.roles:
        if role in seen_roles:
            diagnostics.append(_error("D-DUP", span, f"duplicate role {role!r}"))
        seen_roles.add(role)
    seen_params: set[str] = set()
    for param in protocol.params:
        if param in seen_params:
            diagnostics.append(_error("D-DUP", span, f"duplicate parameter {param!r}"))
        seen_params.add(param)

    seen_messages: set[str] = set()
    known_messages = {m.name for m in protocol.messages}
    for schema in protocol.messages:
        if schema.name in seen_messages:
            diagnostics.append(
                _error("D-DUP", schema.span, f"duplicate message {schema.name!r}")
            )
        seen_messages.add(schema.name)
        diagnostics.extend(_validate_message(protocol, schema))

    for ordering in protocol.orderings:
        for name in (ordering.first, ordering.second):
            if name not in known_messages:
                diagnostics.append(
                    _error(
                        "D-FREEVAR",
                        ordering.span,
                        f"ordering refers to unknown message {name!r}",
                    )
                )
    return diagnostics


def _validate_message(protocol: Protocol, schema: MessageSchema) -> list[Diagnostic]:
    diagnostics: list[Diagnostic] = []
    roles = set(protocol.roles)
    bound = set(protocol.params) | set(schema.params)

    for role_field, value in (("sender", schema.sender), ("receiver", schema.receiver)):
        if value not in roles:
            diagnostics.append(
                _error(
                    "D-FREEVAR",
                    schema.span,
                    f"message {schema.name!r} names unknown {role_field} role {value!r}",
                )
            )
    if schema.sender == schema.receiver:
        diagnostics.append(
            _error(
                "D-SELF",
                schema.span,
                f"message {schema.name!r} sends {schema.sender!r} to itself",
            )
        )

    for clause in schema.meaning:
        if isinstance(clause, CreateClause):
            # the sender must be the one who ends up owing: a message can
            # only put its own author on the hook
            debtor_ok = isinstance(clause.debtor, RoleRef) and clause.debtor.name == schema.sender
            if not debtor_ok:
                diagnostics.append(
                    _error(
                        "D-DEBTOR",
                        clause.span,
                        f"create in message {schema.name!r} names debtor "
                        f"{_term_text(clause.debtor)} but the sender is {schema.sender!r}; "
                        "a principal becomes a debtor only through its own messages",
                        principle="accountability-modularity",
                    )
                )
            unbound = free_vars(clause.antecedent)
            consequent_free = free_vars(clause.consequent)
            if isinstance(clause.antecedent, ExistsIn):
                consequent_free -= {clause.antecedent.var}
            unbound |= consequent_free
            unbound -= bound
            if unbound:
                pretty = ", ".join(sorted(unbound))
                diagnostics.append(
                    _error(
                        "D-FREEVAR",
                        clause.span,
                        f"create in message {schema.name!r} uses unbound variable(s): {pretty}",
                    )
                )
            for name in role_refs(clause.antecedent) | role_refs(clause.consequent):
                if name not in roles:
                    diagnostics.append(
                        _error("D-FREEVAR", clause.span, f"unknown role {name!r}")
                    )
        elif isinstance(clause, (ReleaseClause, CancelClause, DelegateClause, AssignClause)):
            variables, clause_roles = _pattern_names(clause.pattern)
            unbound = variables - bound
            if unbound:
                pretty = ", ".join(sorted(unbound))
                diagnostics.append(
                    _error(
                        "D-FREEVAR",
                        clause.span,
                        f"pattern in message {schema.name!r} uses unbound variable(s): {pretty}",
                    )
                )
            for name in clause_roles:
                if name not in roles:
                    diagnostics.append(
                        _error("D-FREEVAR", clause.span, f"unknown role {name!r}")
                    )
            if isinstance(clause, (DelegateClause, AssignClause)):
                if clause.target_role not in roles:
                    diagnostics.append(
                        _error(
                            "D-FREEVAR",
                            clause.span,
                            f"unknown role {clause.target_role!r}",
                        )
                    )
    return diagnostics


def _term_text(term: Term) -> str:
    from .propositions import render_term

    return render_term(term)
