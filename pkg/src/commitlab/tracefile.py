"""Trace files: one event per line, canonical field order.

The field order (seq, kind, name, sender, receiver, bindings, time) and
plain ASCII keep identical runs byte-identical, so golden files and
`diff` both work.  List values round-trip as JSON arrays; tuples are the
in-memory form.
"""

from __future__ import annotations

import json
from typing import Iterable

from .errors import ReplayError
from .events import Event, EventKind
from .propositions import LiteralValue


def _plain(value: LiteralValue):
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    return value


def _value(raw) -> LiteralValue:
    if isinstance(raw, list):
        return tuple(_value(v) for v in raw)
    if isinstance(raw, bool) or not isinstance(raw, (int, str)):
        raise ValueError(f"unsupported binding value {raw!r}")
    return raw


def format_event(ev: Event) -> str:
    record = {
        "seq": ev.seq,
        "kind": ev.kind.value,
        "name": ev.name,
        "sender": ev.sender,
        "receiver": ev.receiver,
        "bindings": {name: _plain(value) for name, value in ev.bindings},
        "time": ev.time,
    }
    return json.dumps(record, separators=(", ", ": "), ensure_ascii=True)


def write_trace(events: Iterable[Event]) -> str:
    return "".join(format_event(ev) + "\n" for ev in events)


def parse_event(line: str, lineno: int = 0) -> Event:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ReplayError(f"line {lineno}: not a valid record: {exc.msg}") from exc
    if not isinstance(record, dict):
        raise ReplayError(f"line {lineno}: not a valid record")
    try:
        kind = EventKind(record["kind"])
        bindings = record.get("bindings", {})
        if not isinstance(bindings, dict):
            raise ValueError("bindings must be an object")
        sender = record.get("sender")
        receiver = record.get("receiver")
        return Event(
            seq=int(record["seq"]),
            time=int(record.get("time", 0)),
            kind=kind,
            name=str(record["name"]),
            sender=None if sender is None else str(sender),
            receiver=None if receiver is None else str(receiver),
            bindings=tuple((str(k), _value(v)) for k, v in bindings.items()),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ReplayError(f"line {lineno}: {exc}") from exc


def read_trace(text: str) -> list[Event]:
    events = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        events.append(parse_event(line, lineno))
    return events
