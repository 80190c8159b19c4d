"""Client role.

Clients drive the workload. An open-loop client submits on its interarrival
clock no matter what came back; a closed-loop client keeps one request in
flight, thinks, and submits again. Entry points rotate per submission.

Resolution rules:

* a Reply resolves the request as Success immediately;
* a Failure is held as a candidate: flooded styles can race a fast failure
  branch against a slower success, so the client gives success until the
  timeout boundary to show up. If only failures arrived by then, the
  outcome is that Failure (resolved at the failure's arrival time);
* nothing at all by the timeout is a Timeout, and the entry point that ate
  the request is quarantined out of the rotation (never below one entry) —
  a client is free to use whichever entries still answer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional

from ..distributions import Constant, DurationDistribution, Exponential
from ..ids import ComponentId, SimTime
from ..messages import FAILURE, REPLY, REQUEST, Message
from .base import Behavior, Ctx, Send, SetTimer, Trace, violation

OPEN = "open"
CLOSED = "closed"


@dataclass(frozen=True, slots=True)
class ClientConfig:
    loop: str  # open | closed
    delay: DurationDistribution  # interarrival (open) or think time (closed)
    timeout: SimTime
    entries: tuple[int, ...]
    service: str = "work"
    ttl_hops: Optional[int] = None
    active_from: SimTime = 0
    active_until: Optional[SimTime] = None  # None = whole run


@dataclass(slots=True)
class _Outstanding:
    entry: int
    submitted_at: SimTime
    failure_reason: Optional[str] = None
    failure_at: Optional[SimTime] = None


class Client(Behavior):
    role = "client"

    def __init__(self, cfg: ClientConfig):
        self.cfg = cfg
        self.delay = cfg.delay
        self.rotation: list[int] = list(cfg.entries)
        self.cursor = 0
        self.outstanding: dict[int, _Outstanding] = {}
        self.submitted = 0

    # -- loop drive --------------------------------------------------------

    def on_start(self, ctx: Ctx):
        if self.cfg.loop == OPEN:
            first = self.cfg.active_from + self.delay.sample(ctx.rng)
            return [SetTimer(max(0, first - ctx.now), "arrival")]
        return [SetTimer(max(0, self.cfg.active_from - ctx.now), "think_done")]

    def _within_window(self, t: SimTime) -> bool:
        if t < self.cfg.active_from:
            return False
        return self.cfg.active_until is None or t <= self.cfg.active_until

    def _submit(self, ctx: Ctx, service: Optional[str] = None) -> list:
        req_id = ctx.next_request_id()
        entry = self.rotation[self.cursor % len(self.rotation)]
        self.cursor += 1
        msg = Message(
            request_id=req_id,
            kind=REQUEST,
            service=service or self.cfg.service,
            origin_client=ctx.self_id,
            created_at=ctx.now,
            hop_path=(ctx.self_id,),
            ttl_hops=self.cfg.ttl_hops,
        )
        self.outstanding[req_id] = _Outstanding(entry=entry, submitted_at=ctx.now)
        self.submitted += 1
        return [
            Trace("submit", {"entry": ctx.label(entry), "req": req_id, "service": msg.service}),
            Send(entry, msg),
            SetTimer(self.cfg.timeout, "req_timeout", data=req_id),
        ]

    def on_timer(self, tag: str, data: Any, ctx: Ctx):
        if tag == "arrival":
            actions = []
            if self._within_window(ctx.now):
                actions = self._submit(ctx)
            nxt = self.delay.sample(ctx.rng)
            if self.cfg.active_until is None or ctx.now + nxt <= self.cfg.active_until:
                actions.append(SetTimer(nxt, "arrival"))
            return actions
        if tag == "think_done":
            if self._within_window(ctx.now):
                return self._submit(ctx)
            return []
        if tag == "req_timeout":
            return self._expire(data, ctx)
        return []

    # -- resolution ----------------------------------------------------------

    def on_message(self, msg: Message, sender: ComponentId, ctx: Ctx):
        out = self.outstanding.get(msg.request_id)
        if out is None or msg.kind == REQUEST:
            return [Trace("late_reply", {"kind": msg.kind, "req": msg.request_id})]
        if msg.kind == REPLY:
            del self.outstanding[msg.request_id]
            actions = [
                Trace(
                    "resolve",
                    {
                        "latency_us": ctx.now - out.submitted_at,
                        "outcome": "success",
                        "req": msg.request_id,
                    },
                )
            ]
            actions.extend(self._next_closed_step(ctx))
            return actions
        # failure: keep the candidate, wait for a possible success
        if out.failure_reason is None:
            out.failure_reason = msg.reason or "failed"
            out.failure_at = ctx.now
        return []

    def _expire(self, req_id: int, ctx: Ctx):
        out = self.outstanding.pop(req_id, None)
        if out is None:
            return []
        if out.failure_reason is not None:
            actions = [
                Trace(
                    "resolve",
                    {
                        "latency_us": (out.failure_at or ctx.now) - out.submitted_at,
                        "outcome": "failure",
                        "reason": out.failure_reason,
                        "req": req_id,
                    },
                )
            ]
        else:
            actions = [
                Trace(
                    "resolve",
                    {
                        "latency_us": ctx.now - out.submitted_at,
                        "outcome": "timeout",
                        "req": req_id,
                    },
                )
            ]
            if len(self.rotation) > 1 and out.entry in self.rotation:
                self.rotation.remove(out.entry)
                actions.append(Trace("entry_quarantined", {"entry": ctx.label(out.entry)}))
        actions.extend(self._next_closed_step(ctx))
        return actions

    def _next_closed_step(self, ctx: Ctx):
        if self.cfg.loop != CLOSED:
            return []
        think = self.delay.sample(ctx.rng)
        if self.cfg.active_until is not None and ctx.now + think > self.cfg.active_until:
            return []
        return [SetTimer(think, "think_done")]

    # -- conductor hooks -------------------------------------------------------

    def inject(self, service: str, count: int, ctx: Ctx) -> list:
        actions = []
        for _ in range(count):
            actions.extend(self._submit(ctx, service=service))
        return actions

    def set_rate(self, rps: float) -> None:
        mean = max(1, round(1_000_000 / rps))
        if isinstance(self.delay, Exponential):
            self.delay = Exponential(mean)
        else:
            self.delay = Constant(mean)

    def snapshot(self) -> dict:
        return {"outstanding": len(self.outstanding), "submitted": self.submitted}
