"""Trace emission and parsing.

One JSON object per line. Key order is fixed: t, seq, type, comp, then the
payload keys in alphabetical order. Times are integers (microseconds), so a
run is reproducible byte for byte: same scenario text, same master seed,
same trace bytes.

The first line is a header carrying the effective canonical scenario and
the master seed; that makes any trace file self-contained for replay.
"""

from __future__ import annotations

import json
from typing import Callable, Iterable, Iterator

from .errors import MalformedTrace
from .ids import SimTime

HEADER = "header"
TRACE_VERSION = "1"

_FIXED_KEYS = ("t", "seq", "type", "comp")


def _key_sorted(value):
    if isinstance(value, dict):
        return {k: _key_sorted(value[k]) for k in sorted(value)}
    if isinstance(value, (list, tuple)):
        return [_key_sorted(v) for v in value]
    return value


def format_line(t: SimTime, seq: int, type_: str, comp: str, payload: dict) -> str:
    obj = {"t": t, "seq": seq, "type": type_, "comp": comp}
    for key in sorted(payload):
        obj[key] = _key_sorted(payload[key])
    return json.dumps(obj, separators=(",", ":"))


class TraceWriter:
    """Collects trace lines in order, assigning the per-line sequence."""

    def __init__(self, sink: Callable[[str], None] | None = None):
        self._seq = 0
        self._last_t: SimTime = 0
        self._sink = sink
        self.lines: list[str] = []

    def emit(self, t: SimTime, type_: str, comp: str, payload: dict) -> None:
        if t < self._last_t:
            raise MalformedTrace(f"trace time went backwards: {t} after {self._last_t}")
        self._last_t = t
        line = format_line(t, self._seq, type_, comp, payload)
        self._seq += 1
        self.lines.append(line)
        if self._sink is not None:
            self._sink(line)


def parse_line(line: str, line_no: int) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedTrace(f"line {line_no}: not valid JSON ({exc.msg})") from exc
    if not isinstance(obj, dict):
        raise MalformedTrace(f"line {line_no}: not an object")
    for key in _FIXED_KEYS:
        if key not in obj:
            raise MalformedTrace(f"line {line_no}: missing {key!r}")
    if not isinstance(obj["t"], int) or isinstance(obj["t"], bool):
        raise MalformedTrace(f"line {line_no}: t must be an integer")
    return obj


def parse_lines(lines: Iterable[str]) -> Iterator[dict]:
    for i, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line:
            continue
        yield parse_line(line, i)


def read_trace(path: str) -> list[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        return list(parse_lines(fh))
