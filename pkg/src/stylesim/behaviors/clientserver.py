"""Directory and service roles.

The directory is the only component clients may talk to. It never does the
work itself and is never busy: each request is routed on to an instance of
the named service, rotating across the live instances. Services accept work
only via a directory, do one request at a time, and reply straight to the
requester.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Any, Optional

from ..distributions import DurationDistribution
from ..ids import ComponentId
from ..messages import REQUEST, Message
from .base import Behavior, Ctx, Send, SetTimer, Trace, violation


@dataclass(frozen=True, slots=True)
class DirectoryConfig:
    catalogue: dict[str, tuple[int, ...]]  # service name -> instance ordinals
    route_delay: DurationDistribution


@dataclass(frozen=True, slots=True)
class ServiceConfig:
    proc: DurationDistribution


class Directory(Behavior):
    role = "directory"

    def __init__(self, cfg: DirectoryConfig):
        self.cfg = cfg
        self.cursors = {name: 0 for name in cfg.catalogue}
        self.routed = 0

    def on_message(self, msg: Message, sender: ComponentId, ctx: Ctx):
        if msg.kind != REQUEST or ctx.role_of(sender.ordinal) != "client":
            return [violation("directory only routes client requests", msg, ctx.label(sender.ordinal))]
        instances = self.cfg.catalogue.get(msg.service)
        if not instances:
            return [Send(msg.origin_client.ordinal, msg.failure("no_route"))]
        # rotate, skipping instances that are down
        cursor = self.cursors[msg.service]
        target = None
        for i in range(len(instances)):
            candidate = instances[(cursor + i) % len(instances)]
            if ctx.is_alive(candidate):
                target = candidate
                self.cursors[msg.service] = (cursor + i + 1) % len(instances)
                break
        if target is None:
            return [Send(msg.origin_client.ordinal, msg.failure("no_route"))]
        self.routed += 1
        return [Send(target, msg, extra_delay=self.cfg.route_delay.sample(ctx.rng))]

    def snapshot(self) -> dict:
        return {"routed": self.routed}


class Service(Behavior):
    role = "service"

    def __init__(self, cfg: ServiceConfig):
        self.cfg = cfg
        self.busy = False
        self.current: Optional[Message] = None
        self.deferred: deque[Message] = deque()

    def on_message(self, msg: Message, sender: ComponentId, ctx: Ctx):
        if msg.kind != REQUEST:
            return [violation("unexpected reply at service", msg, ctx.label(sender.ordinal))]
        if ctx.role_of(sender.ordinal) != "directory":
            return [violation("services take requests via a directory only", msg, ctx.label(sender.ordinal))]
        if self.busy:
            self.deferred.append(msg)
            return [Trace("defer", {"req": msg.request_id})]
        return self._accept(msg, ctx)

    def _accept(self, msg: Message, ctx: Ctx):
        self.current = msg
        self.busy = True
        return [
            Trace("proc_start", {"req": msg.request_id}),
            SetTimer(self.cfg.proc.sample(ctx.rng), "proc"),
        ]

    def on_timer(self, tag: str, data: Any, ctx: Ctx):
        if tag != "proc":
            return []
        assert self.current is not None
        msg = self.current
        actions = [
            Trace("proc_end", {"req": msg.request_id}),
            Send(msg.origin_client.ordinal, msg.reply()),
        ]
        self.current = None
        self.busy = False
        if self.deferred:
            actions.extend(self._accept(self.deferred.popleft(), ctx))
        return actions

    def snapshot(self) -> dict:
        return {"busy": self.busy, "queued": len(self.deferred)}
