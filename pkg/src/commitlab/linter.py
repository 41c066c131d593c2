"""Design lint for protocols.

Where the validator rejects ill-formed protocols, the lint flags
well-formed ones that undermine their own point.  Each rule protects one
design principle:

L-SOLELY   solely-social-meaning      A bare ordering constraint binds
                                      nobody: no principal is accountable
                                      for it, and no principal can check
                                      any other against it.  Wrap the
                                      ordering in a commitment so someone
                                      owes it to someone.
L-MEANING  explicit-social-meaning    A message without a stated meaning
                                      moves bytes but no expectations;
                                      either give it one or declare
                                      `meaning none` on purpose.
L-INTERNAL no-principal-internals     Emitted while parsing: constructs
                                      for goals, beliefs, plans and the
                                      like have no grammar here, because
                                      a protocol may constrain only what
                                      principals say to each other.

L-INTERNAL is listed for completeness; it is produced at parse time since
the offending construct never reaches a Protocol value.
"""

from __future__ import annotations

from .diagnostics import Diagnostic, Severity
from .protocol import Protocol

LINT_RULES = {
    "L-SOLELY": "solely-social-meaning",
    "L-MEANING": "explicit-social-meaning",
    "L-INTERNAL": "no-principal-internals",
}


def lint(protocol: Protocol) -> list[Diagnostic]:
    diagnostics: list[Diagnostic] = []
    for ordering in protocol.orderings:
        diagnostics.append(
            Diagnostic(
                Severity.WARNING,
                "L-SOLELY",
                ordering.span,
                f"ordering {ordering.first} < {ordering.second} is not part of any "
                "commitment: no principal is accountable for upholding it; "
                f"state it as C(r1, r2, top, {ordering.first} . {ordering.second}) instead",
                LINT_RULES["L-SOLELY"],
            )
        )
    for schema in protocol.messages:
        if not schema.meaning and not schema.meaning_none:
            diagnostics.append(
                Diagnostic(
                    Severity.WARNING,
                    "L-MEANING",
                    schema.span,
                    f"message {schema.name!r} has no social meaning: it changes no "
                    "commitments, so sending it counts for nothing; declare "
                    "`meaning none` if that is intended",
                    LINT_RULES["L-MEANING"],
                )
            )
    return diagnostics
