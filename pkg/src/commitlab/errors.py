"""Exception types raised by the commitment engine.

Every error deliberately carries enough context (ids, names, states) to be
reported to a user without access to the engine internals.  Operations on
social state either return a new state or raise one of these; they never
return a partially updated state.
"""

from __future__ import annotations


class CommitlabError(Exception):
    """Base class for all engine errors."""


class ProtocolError(CommitlabError):
    """Base class for errors arising from protocol definitions or their use."""


class OperationError(CommitlabError):
    """Base class for illegal commitment operations."""


class SelfCommitment(OperationError):
    def __init__(self, principal: str):
        super().__init__(f"principal {principal!r} cannot commit to itself")
        self.principal = principal


class DebtorNotSender(OperationError):
    """A create was attempted on behalf of a principal who did not act.

    Commitments enter the social state only through the debtor's own
    communications (or through a prior commitment of the same debtor), so
    a create whose cause was sent by someone else is rejected.
    """

    def __init__(self, debtor: str, sender: str | None):
        super().__init__(
            f"commitment debtor {debtor!r} is not the acting principal {sender!r}"
        )
        self.debtor = debtor
        self.sender = sender


class NotCreditor(OperationError):
    def __init__(self, commitment_id: str, actor: str):
        super().__init__(
            f"only the creditor may release commitment {commitment_id}; "
            f"{actor!r} is not the creditor"
        )
        self.commitment_id = commitment_id
        self.actor = actor


class NotDebtor(OperationError):
    def __init__(self, commitment_id: str, actor: str, operation: str):
        super().__init__(
            f"only the debtor may {operation} commitment {commitment_id}; "
            f"{actor!r} is not the debtor"
        )
        self.commitment_id = commitment_id
        self.actor = actor
        self.operation = operation


class TerminalState(OperationError):
    def __init__(self, commitment_id: str, state_name: str, operation: str):
        super().__init__(
            f"cannot {operation} commitment {commitment_id}: "
            f"state {state_name} is terminal"
        )
        self.commitment_id = commitment_id
        self.state_name = state_name
        self.operation = operation


class UnknownCommitment(CommitlabError):
    def __init__(self, commitment_id: str):
        super().__init__(f"no commitment with id {commitment_id!r}")
        self.commitment_id = commitment_id


class FreeVariable(CommitlabError):
    """A proposition with an unbound variable reached evaluation."""

    def __init__(self, names: set[str]):
        pretty = ", ".join(sorted(names))
        super().__init__(f"proposition has unbound variables: {pretty}")
        self.names = frozenset(names)


class FixpointOverflow(CommitlabError):
    """Progression failed to stabilise within its sweep budget.

    The progression rules only ever move commitments toward terminal
    states, so hitting this indicates an engine bug, not bad input.
    """

    def __init__(self, sweeps: int):
        super().__init__(f"progression did not stabilise after {sweeps} sweeps")
        self.sweeps = sweeps


class UnknownMessage(ProtocolError):
    def __init__(self, name: str, protocol: str):
        super().__init__(f"protocol {protocol!r} declares no message {name!r}")
        self.name = name
        self.protocol = protocol


class RoleMismatch(ProtocolError):
    def __init__(self, message: str, role: str, expected: str | None, actual: str | None):
        super().__init__(
            f"message {message!r}: role {role} is cast as {expected!r} "
            f"but the event names {actual!r}"
        )
        self.message = message
        self.role = role
        self.expected = expected
        self.actual = actual


class BindingArityMismatch(ProtocolError):
    def __init__(self, message: str, detail: str):
        super().__init__(f"message {message!r}: {detail}")
        self.message = message
        self.detail = detail


class UnknownPrincipal(CommitlabError):
    def __init__(self, principal: str):
        super().__init__(f"principal {principal!r} does not appear in the enactment")
        self.principal = principal


class ReplayError(CommitlabError):
    """A trace could not be replayed against a protocol."""

    def __init__(self, detail: str, seq: int | None = None):
        where = f" (event {seq})" if seq is not None else ""
        super().__init__(f"replay failed{where}: {detail}")
        self.detail = detail
        self.seq = seq


class ConfigError(CommitlabError):
    """A scenario or CLI configuration is unusable."""
