"""Event queue and event payloads.

The queue is a binary heap over (time, seq). seq increases strictly in
scheduling order, which makes the processing order a total order: ties in
virtual time resolve to whoever was scheduled first. Cancellation is lazy:
a cancelled handle stays in the heap and is skipped on pop.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Any, Optional

from .errors import SchedulingInPast
from .ids import ComponentId, SimTime
from .messages import Message


@dataclass(frozen=True, slots=True)
class Deliver:
    msg: Message
    sender: ComponentId


@dataclass(frozen=True, slots=True)
class Timer:
    tag: str
    data: Any = None


@dataclass(frozen=True, slots=True)
class FaultCmd:
    kind: str  # crash | restart | set_silent_drop
    target_name: str
    on: bool = True


@dataclass(frozen=True, slots=True)
class ControlCmd:
    cmd: dict
    cmd_id: str


Payload = Deliver | Timer | FaultCmd | ControlCmd


@dataclass(slots=True)
class SimEvent:
    time: SimTime
    seq: int
    target: Optional[ComponentId]  # None for engine-level events
    payload: Payload
    cancelled: bool = False

    def cancel(self) -> None:
        self.cancelled = True


class EventQueue:
    """Min-heap of SimEvents ordered by (time, seq)."""

    def __init__(self) -> None:
        self._heap: list[tuple[SimTime, int, SimEvent]] = []
        self._next_seq = 0

    def __len__(self) -> int:
        return sum(1 for _, _, ev in self._heap if not ev.cancelled)

    @property
    def next_seq(self) -> int:
        return self._next_seq

    def push(self, time: SimTime, now: SimTime, target: Optional[ComponentId], payload: Payload) -> SimEvent:
        if time < now:
            raise SchedulingInPast(f"cannot schedule at t={time} when now={now}")
        ev = SimEvent(time=time, seq=self._next_seq, target=target, payload=payload)
        self._next_seq += 1
        heapq.heappush(self._heap, (time, ev.seq, ev))
        return ev

    def peek_time(self) -> Optional[SimTime]:
        self._drop_cancelled()
        if not self._heap:
            return None
        return self._heap[0][0]

    def pop(self) -> Optional[SimEvent]:
        self._drop_cancelled()
        if not self._heap:
            return None
        return heapq.heappop(self._heap)[2]

    def _drop_cancelled(self) -> None:
        while self._heap and self._heap[0][2].cancelled:
            heapq.heappop(self._heap)
