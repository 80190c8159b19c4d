"""Re-derive a trace from its own header and confirm the bytes match.

A trace is self-contained: the header carries the effective scenario and
the master seed, and control lines carry the queue position (eseq) at which
each conductor command entered the run. Replay reconstructs the engine,
re-injects each control when the queue's sequence counter reaches the
recorded position, and compares every emitted line against the original.
The first difference is reported with its 1-based line number.
"""

from __future__ import annotations

import json

from .engine import Engine
from .errors import MalformedTrace, ReplayDivergence
from .scenario import parse_scenario
from .trace import HEADER, parse_line


def replay_lines(original: list[str]) -> int:
    """Re-run the run described by `original`; returns the verified line count."""
    expected = [line.rstrip("\n") for line in original if line.strip()]
    if not expected:
        raise MalformedTrace("empty trace")
    header = parse_line(expected[0], 1)
    if header["type"] != HEADER or "scenario" not in header:
        raise MalformedTrace("line 1: expected the run header")
    scenario = parse_scenario(json.dumps(header["scenario"]))

    controls = sorted(
        (
            parsed
            for parsed in (parse_line(line, i + 1) for i, line in enumerate(expected))
            if parsed["type"] == "control"
        ),
        key=lambda c: c["eseq"],
    )

    pos = 0

    def check(line: str) -> None:
        nonlocal pos
        if pos >= len(expected):
            raise ReplayDivergence(len(expected) + 1, "replay produced lines past the end")
        if line != expected[pos]:
            raise ReplayDivergence(pos + 1, f"expected {expected[pos]}, got {line}")
        pos += 1

    eng = Engine(scenario, sink=check)
    i = 0
    while True:
        while i < len(controls) and eng.queue.next_seq == controls[i]["eseq"]:
            eng.schedule_control(controls[i]["cmd"], controls[i]["id"], at=controls[i]["t"])
            i += 1
        nxt = eng.queue.peek_time()
        if nxt is None or nxt > scenario.duration_us:
            break
        eng.step()

    if pos != len(expected):
        raise ReplayDivergence(pos + 1, "original has lines the replay never produced")
    return pos


def replay_file(path: str) -> int:
    with open(path, "r", encoding="utf-8") as fh:
        return replay_lines(fh.readlines())
