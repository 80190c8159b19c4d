"""Behavior protocol and the actions behaviors hand back to the engine.

A behavior is a state machine for one component. The engine calls exactly
one handler per event (on_start, on_message, on_timer) and the handler
returns a list of actions; the engine interprets them in order. Behaviors
never touch the queue, the clock, or each other, which keeps every handler
a plain (state, input) -> (state, actions) step and keeps runs replayable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional, Protocol

from ..ids import ComponentId, SimTime
from ..messages import Message
from ..rng import Pcg32


# -- actions -----------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Send:
    to_ordinal: int
    msg: Message
    extra_delay: SimTime = 0


@dataclass(frozen=True, slots=True)
class SetTimer:
    delay: SimTime
    tag: str
    data: Any = None


@dataclass(frozen=True, slots=True)
class Trace:
    type: str
    payload: dict = field(default_factory=dict)


@dataclass(frozen=True, slots=True)
class Spawn:
    ordinal: int
    name: str
    role: str
    config: Any
    delay: SimTime = 0


@dataclass(frozen=True, slots=True)
class Stop:
    ordinal: int
    reason: str


@dataclass(frozen=True, slots=True)
class LinkNeighbours:
    a: int
    b: int


@dataclass(frozen=True, slots=True)
class UnlinkNeighbours:
    a: int
    b: int


Action = Send | SetTimer | Trace | Spawn | Stop | LinkNeighbours | UnlinkNeighbours


class Ctx(Protocol):
    """What a behavior may observe while handling one event."""

    now: SimTime
    self_id: ComponentId
    rng: Pcg32

    def label(self, ordinal: int) -> str: ...

    def role_of(self, ordinal: int) -> Optional[str]: ...

    def is_alive(self, ordinal: int) -> bool: ...

    def live_ordinals(self, role: str) -> list[int]: ...

    def reserve_ordinal(self, name_prefix: str) -> tuple[int, str]: ...

    def next_request_id(self) -> int: ...


class Behavior:
    role: str = "?"

    def on_start(self, ctx: Ctx) -> list[Action]:
        return []

    def on_message(self, msg: Message, sender: ComponentId, ctx: Ctx) -> list[Action]:
        raise NotImplementedError

    def on_timer(self, tag: str, data: Any, ctx: Ctx) -> list[Action]:
        return []

    def snapshot(self) -> dict:
        """Small dict describing live state, for topology frames."""
        return {}


def violation(reason: str, msg: Message, sender_label: str) -> Trace:
    return Trace(
        "protocol_violation",
        {"from": sender_label, "kind": msg.kind, "reason": reason, "req": msg.request_id},
    )
