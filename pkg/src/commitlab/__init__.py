"""commitlab: specify, enact and check commitment protocols.

Protocols give messages social meanings as commitment operations; enacting
a protocol over an unreliable network progresses each principal's view of
who owes what to whom; compliance judgements say how every commitment
ended up and who is accountable for the violated ones.
"""

from __future__ import annotations

from .commitments import (
    ACTIVE_STATES,
    HOLDING_STATES,
    TERMINAL_STATES,
    TRANSITIONS,
    Commitment,
    CommitmentState,
    can_transition,
)
from .compliance import (
    ComplianceReport,
    ExplainStep,
    PrincipalSummary,
    Violation,
    category_of,
    check,
    explain,
    judge,
    render_report,
    report_records,
)
from .diagnostics import Diagnostic, Severity, Span, has_errors
from .errors import (
    BindingArityMismatch,
    CommitlabError,
    ConfigError,
    DebtorNotSender,
    FixpointOverflow,
    FreeVariable,
    NotCreditor,
    NotDebtor,
    OperationError,
    ProtocolError,
    ReplayError,
    RoleMismatch,
    SelfCommitment,
    TerminalState,
    UnknownCommitment,
    UnknownMessage,
    UnknownPrincipal,
)
from .events import Event, EventKind, clock_tick, domain_event
from .linter import lint
from .meanings import apply_message, observe_domain_event, replay, replay_steps
from .parser import (
    ParseResult,
    format_protocol,
    parse,
    parse_proposition_text,
    parse_with_diagnostics,
)
from .propositions import (
    And,
    AnyProposition,
    Before,
    CommitmentAtom,
    EventAtom,
    ExistsIn,
    Literal,
    Proposition,
    RoleRef,
    Term,
    Top,
    TruthStatus,
    Var,
    Wildcard,
    conjoin,
    render,
    substitute,
)
from .protocol import (
    AssignClause,
    CancelClause,
    CommitmentPattern,
    CreateClause,
    DelegateClause,
    MessageSchema,
    OrderingConstraint,
    Protocol,
    ReleaseClause,
)
from .scenario import (
    Injection,
    LabelDecl,
    NetworkModel,
    RandomPolicy,
    ScenarioConfig,
    ScriptRule,
    ScriptedPolicy,
    SetupDecl,
    SilentPolicy,
    build_config,
    load_scenario,
    parse_scenario_text,
)
from .simulator import (
    AlignmentReport,
    ExpectationGap,
    LocalView,
    Misalignment,
    SimulationResult,
    check_alignment,
    local_view,
    run,
    scripted_next,
)
from .state import (
    SocialState,
    append_event,
    assign,
    cancel,
    create,
    delegate,
    evaluate,
    progress,
    query,
    release,
    setup_commitment,
    with_casting,
)
from .tracefile import format_event, parse_event, read_trace, write_trace
from .validator import validate

__version__ = "0.1.0"

__all__ = [
    "ACTIVE_STATES",
    "HOLDING_STATES",
    "TERMINAL_STATES",
    "TRANSITIONS",
    "AlignmentReport",
    "And",
    "AnyProposition",
    "AssignClause",
    "Before",
    "BindingArityMismatch",
    "CancelClause",
    "Commitment",
    "CommitmentAtom",
    "CommitmentPattern",
    "CommitmentState",
    "CommitlabError",
    "ComplianceReport",
    "ConfigError",
    "CreateClause",
    "DebtorNotSender",
    "DelegateClause",
    "Diagnostic",
    "Event",
    "EventAtom",
    "EventKind",
    "ExistsIn",
    "ExpectationGap",
    "ExplainStep",
    "FixpointOverflow",
    "FreeVariable",
    "Injection",
    "LabelDecl",
    "Literal",
    "LocalView",
    "MessageSchema",
    "Misalignment",
    "NetworkModel",
    "NotCreditor",
    "NotDebtor",
    "OperationError",
    "OrderingConstraint",
    "ParseResult",
    "PrincipalSummary",
    "Proposition",
    "Protocol",
    "ProtocolError",
    "RandomPolicy",
    "ReleaseClause",
    "ReplayError",
    "RoleMismatch",
    "RoleRef",
    "ScenarioConfig",
    "ScriptRule",
    "ScriptedPolicy",
    "SelfCommitment",
    "SetupDecl",
    "Severity",
    "SilentPolicy",
    "SimulationResult",
    "SocialState",
    "Span",
    "Term",
    "TerminalState",
    "Top",
    "TruthStatus",
    "UnknownCommitment",
    "UnknownMessage",
    "UnknownPrincipal",
    "Var",
    "Violation",
    "Wildcard",
    "append_event",
    "apply_message",
    "assign",
    "build_config",
    "can_transition",
    "cancel",
    "category_of",
    "check",
    "check_alignment",
    "clock_tick",
    "conjoin",
    "create",
    "delegate",
    "domain_event",
    "evaluate",
    "explain",
    "format_event",
    "format_protocol",
    "has_errors",
    "judge",
    "lint",
    "load_scenario",
    "local_view",
    "observe_domain_event",
    "parse",
    "parse_event",
    "parse_proposition_text",
    "parse_scenario_text",
    "parse_with_diagnostics",
    "progress",
    "query",
    "read_trace",
    "release",
    "render",
    "render_report",
    "replay",
    "replay_steps",
    "report_records",
    "run",
    "scripted_next",
    "setup_commitment",
    "substitute",
    "validate",
    "with_casting",
    "write_trace",
]
