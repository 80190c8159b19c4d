"""Filter and output sink roles.

A filter transforms requests and passes them strictly forward; the moment
one request has been passed along, the next is taken from the FIFO. Nothing
ever flows backwards through a filter, so a whole pipeline of n stages can
hold n requests in flight at once. The final stage hands its output to the
sink, which delivers the finished result to the requester.

When a stage is replicated, each sender distributes round-robin across the
replicas of the next stage.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Any, Optional

from ..distributions import DurationDistribution
from ..ids import ComponentId
from ..messages import REQUEST, Message
from .base import Behavior, Ctx, Send, SetTimer, Trace, violation

IDLE = "idle"
PROCESSING = "processing"


@dataclass(frozen=True, slots=True)
class FilterConfig:
    next: tuple[int, ...]  # successor replicas, or the sink alone
    proc: DurationDistribution


@dataclass(frozen=True, slots=True)
class SinkConfig:
    pass


class FilterStage(Behavior):
    role = "filter"

    def __init__(self, cfg: FilterConfig):
        self.cfg = cfg
        self.mode = IDLE
        self.current: Optional[Message] = None
        self.deferred: deque[Message] = deque()
        self.cursor = 0

    def on_message(self, msg: Message, sender: ComponentId, ctx: Ctx):
        if msg.kind != REQUEST:
            return [violation("nothing flows backwards through a filter", msg, ctx.label(sender.ordinal))]
        if self.mode == PROCESSING:
            self.deferred.append(msg)
            return [Trace("defer", {"req": msg.request_id})]
        return self._accept(msg, ctx)

    def _accept(self, msg: Message, ctx: Ctx):
        self.current = msg
        self.mode = PROCESSING
        return [
            Trace("proc_start", {"req": msg.request_id}),
            SetTimer(self.cfg.proc.sample(ctx.rng), "proc"),
        ]

    def on_timer(self, tag: str, data: Any, ctx: Ctx):
        if tag != "proc":
            return []
        assert self.current is not None
        target = self.cfg.next[self.cursor % len(self.cfg.next)]
        self.cursor += 1
        actions = [
            Trace("proc_end", {"req": self.current.request_id}),
            Send(target, self.current),
        ]
        self.current = None
        self.mode = IDLE
        if self.deferred:
            actions.extend(self._accept(self.deferred.popleft(), ctx))
        return actions

    def snapshot(self) -> dict:
        return {"mode": self.mode, "queued": len(self.deferred)}


class OutputSink(Behavior):
    """Terminal consumer: turns a finished pipeline item into the reply."""

    role = "sink"

    def __init__(self, cfg: SinkConfig):
        self.cfg = cfg
        self.delivered = 0

    def on_message(self, msg: Message, sender: ComponentId, ctx: Ctx):
        if msg.kind != REQUEST:
            return [violation("sink only consumes pipeline output", msg, ctx.label(sender.ordinal))]
        self.delivered += 1
        return [Send(msg.origin_client.ordinal, msg.reply())]

    def snapshot(self) -> dict:
        return {"delivered": self.delivered}
