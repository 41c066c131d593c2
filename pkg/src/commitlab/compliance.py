"""Compliance and accountability judgements over a trace.

Replaying a trace yields a social state; this module turns that state into
verdicts.  Each commitment gets a category describing how it ended up (or
where it currently stands), each violated commitment names exactly one
accountable principal (its debtor at the time of violation), and each
principal gets a summary saying whether it is in good standing.

A cancelled-while-conditional commitment is categorised "withdrawn": the
debtor backed out before anything was owed unconditionally, which is
lawful and does not count against compliance.  Cancelling after detach is
a violation and is categorised as such by the transition rules themselves.
"""

from __future__ import annotations

from dataclasses import dataclass

from .commitments import Commitment, CommitmentState
from .errors import UnknownCommitment
from .events import Event
from .meanings import replay
from .protocol import Protocol
from .state import SocialState

_CATEGORY: dict[CommitmentState, str] = {
    CommitmentState.CONDITIONAL: "conditional",
    CommitmentState.DETACHED: "outstanding",
    CommitmentState.DISCHARGED: "discharged",
    CommitmentState.RELEASED: "released",
    CommitmentState.CANCELLED: "withdrawn",
    CommitmentState.VIOLATED: "violated",
    CommitmentState.EXPIRED: "expired",
    CommitmentState.DELEGATED: "delegated",
    CommitmentState.ASSIGNED: "assigned",
}

# categories that leave the debtor with nothing further to answer for
SETTLED = frozenset(
    {"discharged", "released", "withdrawn", "expired", "delegated", "assigned", "conditional"}
)


def category_of(state: CommitmentState) -> str:
    return _CATEGORY[state]


@dataclass(frozen=True)
class Violation:
    commitment_id: str
    accountable: str
    owed_to: str
    content: str

    def human(self) -> str:
        return f"{self.commitment_id}: {self.accountable} violated {self.content} owed to {self.owed_to}"


@dataclass(frozen=True)
class PrincipalSummary:
    principal: str
    compliant: bool
    counts: tuple[tuple[str, int], ...]  # category -> number of commitments as debtor

    def count_map(self) -> dict[str, int]:
        return dict(self.counts)


@dataclass(frozen=True)
class ComplianceReport:
    state: SocialState
    horizon: int | None
    verdicts: tuple[tuple[str, str], ...]  # commitment id -> category
    violations: tuple[Violation, ...]
    principals: tuple[PrincipalSummary, ...]

    def verdict_map(self) -> dict[str, str]:
        return dict(self.verdicts)

    @property
    def all_compliant(self) -> bool:
        return not self.violations

    def summary_of(self, principal: str) -> PrincipalSummary | None:
        for s in self.principals:
            if s.principal == principal:
                return s
        return None


def _known_principals(state: SocialState) -> list[str]:
    seen: list[str] = []

    def note(p: str | None) -> None:
        if p and p not in seen:
            seen.append(p)

    for _, principal in state.casting:
        note(principal)
    for c in sorted(state.commitments.values(), key=lambda c: c.order):
        note(c.debtor)
        note(c.creditor)
    for ev in state.history:
        note(ev.sender)
        note(ev.receiver)
    return seen


def judge(state: SocialState, horizon: int | None = None) -> ComplianceReport:
    """Turn a social state into verdicts, violations and summaries."""
    ordered = sorted(state.commitments.values(), key=lambda c: c.order)
    verdicts = tuple((c.id, category_of(c.state)) for c in ordered)
    violations = tuple(
        Violation(c.id, accountable=c.debtor, owed_to=c.creditor, content=c.render())
        for c in ordered
        if c.state is CommitmentState.VIOLATED
    )
    summaries: list[PrincipalSummary] = []
    for principal in _known_principals(state):
        counts: dict[str, int] = {}
        for c in ordered:
            if c.debtor != principal:
                continue
            cat = category_of(c.state)
            counts[cat] = counts.get(cat, 0) + 1
        compliant = counts.get("violated", 0) == 0
        summaries.append(
            PrincipalSummary(principal, compliant, tuple(sorted(counts.items())))
        )
    return ComplianceReport(
        state=state,
        horizon=horizon,
        verdicts=verdicts,
        violations=violations,
        principals=tuple(summaries),
    )


def check(
    events: list[Event] | tuple[Event, ...],
    protocol: Protocol,
    horizon: int | None = None,
) -> ComplianceReport:
    """Replay a trace (up to and including `horizon`, if given) and judge it."""
    if horizon is not None:
        events = [ev for ev in events if ev.time <= horizon]
    state = replay(events, protocol)
    return judge(state, horizon)


@dataclass(frozen=True)
class ExplainStep:
    commitment_id: str
    seq: int
    state: str
    event: Event | None

    def human(self) -> str:
        if self.event is None:
            cause = "pre-existing"
        elif self.event.kind.value in ("MessageSent", "MessageReceived"):
            cause = f"{self.event.kind.value} {self.event.name} ({self.event.sender} -> {self.event.receiver}) at t={self.event.time}"
        else:
            cause = f"{self.event.name} at t={self.event.time}"
        return f"{self.commitment_id} -> {self.state}: {cause}"


def explain(state: SocialState, commitment_id: str) -> tuple[ExplainStep, ...]:
    """The full causal story of one commitment.

    Walks derivation links back to the root commitment, then lists every
    state the chain passed through together with the event that caused it.
    """
    if commitment_id not in state.commitments:
        raise UnknownCommitment(commitment_id)
    chain: list[Commitment] = []
    cursor: str | None = commitment_id
    while cursor is not None:
        c = state.commitments[cursor]
        chain.append(c)
        cursor = c.derived_from if c.derived_from in state.commitments else None
    chain.reverse()

    events_by_seq = {ev.seq: ev for ev in state.history}
    steps: list[ExplainStep] = []
    for c in chain:
        for seq, st in c.history:
            steps.append(ExplainStep(c.id, seq, st.value, events_by_seq.get(seq)))
    return tuple(steps)


def render_report(report: ComplianceReport) -> str:
    lines: list[str] = []
    verdicts = report.verdict_map()
    for c in sorted(report.state.commitments.values(), key=lambda c: c.order):
        lines.append(f"{c.id} {verdicts[c.id]}: {c.render()}")
    if report.violations:
        lines.append("violations:")
        for v in report.violations:
            lines.append(f"  {v.human()}")
    else:
        lines.append("violations: none")
    for s in report.principals:
        standing = "compliant" if s.compliant else "non-compliant"
        owned = ", ".join(f"{k}={v}" for k, v in s.counts) or "no commitments as debtor"
        lines.append(f"{s.principal}: {standing} ({owned})")
    return "\n".join(lines)


def report_records(report: ComplianceReport) -> list[dict]:
    """Machine form: one record per commitment, violation and principal."""
    records: list[dict] = []
    verdicts = report.verdict_map()
    for c in sorted(report.state.commitments.values(), key=lambda c: c.order):
        records.append(
            {
                "record": "verdict",
                "commitment": c.id,
                "category": verdicts[c.id],
                "debtor": c.debtor,
                "creditor": c.creditor,
                "content": c.render(),
            }
        )
    for v in report.violations:
        records.append(
            {
                "record": "violation",
                "commitment": v.commitment_id,
                "accountable": v.accountable,
                "owed_to": v.owed_to,
            }
        )
    for s in report.principals:
        records.append(
            {
                "record": "principal",
                "principal": s.principal,
                "compliant": s.compliant,
                "counts": dict(s.counts),
            }
        )
    return records
