"""Events: the things that happen during an enactment.

An event is a message being sent, a message being delivered, a domain
happening such as a patient showing up, or a clock tick.  Events carry a
global sequence number (total order of observation) and an integer logical
time.  Bindings map parameter names to literal values; they are stored as
an ordered tuple of pairs so events stay hashable and serialise stably.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .propositions import LiteralValue


class EventKind(enum.Enum):
    MESSAGE_SENT = "MessageSent"
    MESSAGE_RECEIVED = "MessageReceived"
    DOMAIN_EVENT = "DomainEvent"
    CLOCK_TICK = "ClockTick"


# reserved names for bookkeeping records inside traces
CAST_EVENT = "@cast"
SETUP_EVENT = "@setup"


@dataclass(frozen=True)
class Event:
    seq: int
    time: int
    kind: EventKind
    name: str
    sender: str | None = None
    receiver: str | None = None
    bindings: tuple[tuple[str, LiteralValue], ...] = ()

    def binding_map(self) -> dict[str, LiteralValue]:
        return dict(self.bindings)

    def atom_args(self) -> tuple[LiteralValue, ...]:
        """Argument vector seen by event atoms.

        Messages expose (sender, receiver, *parameters); domain events and
        ticks expose their raw values."""
        values = tuple(v for _, v in self.bindings)
        if self.kind in (EventKind.MESSAGE_SENT, EventKind.MESSAGE_RECEIVED):
            sender = self.sender if self.sender is not None else "?"
            receiver = self.receiver if self.receiver is not None else "?"
            return (sender, receiver) + values
        return values


def domain_event(seq: int, time: int, name: str, args: tuple[LiteralValue, ...]) -> Event:
    bindings = tuple((f"arg{i}", v) for i, v in enumerate(args))
    return Event(seq=seq, time=time, kind=EventKind.DOMAIN_EVENT, name=name, bindings=bindings)


def clock_tick(seq: int, time: int) -> Event:
    return Event(
        seq=seq, time=time, kind=EventKind.CLOCK_TICK, name="tick", bindings=(("t", time),)
    )
