"""Layer role.

A layer takes requests only from the component directly above it (or from
clients, for the top layer), never starts a second request while one is in
flight, and hands replies back only to where the request came from. Work
costs proc_in on the way down and proc_out on the way up; arrivals during
either go to a FIFO.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Any, Optional

from ..distributions import DurationDistribution
from ..ids import ComponentId
from ..messages import FAILURE, REPLY, REQUEST, Message
from .base import Behavior, Ctx, Send, SetTimer, Trace, violation

IDLE = "idle"
PROC_IN = "proc_in"
AWAIT_REPLY = "await_reply"
PROC_OUT = "proc_out"


@dataclass(frozen=True, slots=True)
class LayerConfig:
    prev: Optional[int]  # ordinal above; None for the top layer
    next: Optional[int]  # ordinal below; None for the bottom layer
    proc_in: DurationDistribution
    proc_out: DurationDistribution


class Layer(Behavior):
    role = "layer"

    def __init__(self, cfg: LayerConfig):
        self.cfg = cfg
        self.mode = IDLE
        self.current: Optional[Message] = None
        self.outgoing: Optional[Message] = None
        self.deferred: deque[Message] = deque()

    def _valid_request_source(self, sender: ComponentId, ctx: Ctx) -> bool:
        if self.cfg.prev is None:
            return ctx.role_of(sender.ordinal) == "client"
        return sender.ordinal == self.cfg.prev

    def on_message(self, msg: Message, sender: ComponentId, ctx: Ctx):
        if msg.kind == REQUEST:
            if not self._valid_request_source(sender, ctx):
                return [violation("request from wrong source", msg, ctx.label(sender.ordinal))]
            if self.mode != IDLE:
                self.deferred.append(msg)
                return [Trace("defer", {"req": msg.request_id})]
            return self._accept(msg, ctx)
        # reply or failure coming back up
        if (
            self.mode != AWAIT_REPLY
            or self.cfg.next is None
            or sender.ordinal != self.cfg.next
            or self.current is None
            or msg.request_id != self.current.request_id
        ):
            return [violation("unexpected reply", msg, ctx.label(sender.ordinal))]
        self.outgoing = msg
        self.mode = PROC_OUT
        return [
            Trace("proc_start", {"req": msg.request_id}),
            SetTimer(self.cfg.proc_out.sample(ctx.rng), "proc_out"),
        ]

    def _accept(self, msg: Message, ctx: Ctx):
        self.current = msg
        self.mode = PROC_IN
        return [
            Trace("proc_start", {"req": msg.request_id}),
            SetTimer(self.cfg.proc_in.sample(ctx.rng), "proc_in"),
        ]

    def on_timer(self, tag: str, data: Any, ctx: Ctx):
        if tag == "proc_in":
            assert self.current is not None
            actions = [Trace("proc_end", {"req": self.current.request_id})]
            if self.cfg.next is not None:
                self.mode = AWAIT_REPLY
                actions.append(Send(self.cfg.next, self.current))
                return actions
            # bottom layer: the work turns around here
            self.outgoing = self.current.reply()
            self.mode = PROC_OUT
            actions.append(Trace("proc_start", {"req": self.current.request_id}))
            actions.append(SetTimer(self.cfg.proc_out.sample(ctx.rng), "proc_out"))
            return actions
        if tag == "proc_out":
            assert self.current is not None and self.outgoing is not None
            out = self.outgoing
            actions = [Trace("proc_end", {"req": out.request_id})]
            target = self.cfg.prev if self.cfg.prev is not None else out.origin_client.ordinal
            actions.append(Send(target, out))
            self.current = None
            self.outgoing = None
            self.mode = IDLE
            if self.deferred:
                actions.extend(self._accept(self.deferred.popleft(), ctx))
            return actions
        return []

    def snapshot(self) -> dict:
        return {"mode": self.mode, "queued": len(self.deferred)}
