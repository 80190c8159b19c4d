"""Peer role.

Every peer is client and server at once. A request it can handle is
processed and answered to whoever sent it; anything else is passed along to
a few neighbours. Three mechanisms keep request life bounded and the
network healthy:

* ttl_hops decrements per forwarding peer; at zero the peer answers
  Failure("ttl_expired") back along the hop path instead of forwarding.
  The expiry check runs before duplicate suppression on purpose: it is the
  guarantee that a request whose flood dies out still produces an answer.
* a seen set per peer suppresses duplicate copies arriving via other paths
  (traced dup_suppressed, no forward, no second reply).
* a periodic maintenance round dismisses dead neighbours, churns live ones
  with a configured probability, and recruits new live peers up to the
  target degree. Neighbour links stay symmetric.

Peers handle concurrently: processing one request never blocks receiving
the next. A peer flagged silent_drop receives everything and emits nothing,
which makes it indistinguishable from a crashed one to the rest of the
overlay.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from ..distributions import DurationDistribution
from ..ids import ComponentId, SimTime
from ..messages import REQUEST, Message
from .base import Behavior, Ctx, LinkNeighbours, Send, SetTimer, Trace, UnlinkNeighbours, violation


@dataclass(frozen=True, slots=True)
class PeerConfig:
    initial_neighbours: tuple[int, ...]
    can_handle: frozenset[str]
    proc: DurationDistribution
    forward_fanout: int = 2
    maintenance_period: SimTime = 1_000_000
    churn_probability: float = 0.0
    target_degree: int = 2


class Peer(Behavior):
    role = "peer"

    def __init__(self, cfg: PeerConfig):
        self.cfg = cfg
        self.neighbours: set[int] = set(cfg.initial_neighbours)
        self.seen: set[int] = set()
        self.silent_drop = False
        self.handled = 0

    def _reply_back(self, msg: Message) -> Send:
        target, rest = msg.pop_hop()
        return Send(target.ordinal, rest)

    def on_start(self, ctx: Ctx):
        return [SetTimer(self.cfg.maintenance_period, "maintenance")]

    def on_message(self, msg: Message, sender: ComponentId, ctx: Ctx):
        if self.silent_drop:
            return []
        if msg.kind != REQUEST:
            # answers ride the hop path back toward the origin, one hop at a time
            if not msg.hop_path:
                return [violation("answer with no return path", msg, ctx.label(sender.ordinal))]
            return [self._reply_back(msg)]

        if msg.service in self.cfg.can_handle:
            if msg.request_id in self.seen:
                return [Trace("dup_suppressed", {"req": msg.request_id})]
            self.seen.add(msg.request_id)
            return [
                Trace("proc_start", {"req": msg.request_id}),
                SetTimer(self.cfg.proc.sample(ctx.rng), "handle", data=msg),
            ]

        ttl = msg.ttl_hops
        if ttl is not None:
            ttl -= 1
            if ttl <= 0:
                return [
                    Trace("ttl_expired", {"req": msg.request_id}),
                    self._reply_back(msg.failure("ttl_expired")),
                ]
        if msg.request_id in self.seen:
            return [Trace("dup_suppressed", {"req": msg.request_id})]
        self.seen.add(msg.request_id)

        candidates = sorted(self.neighbours - {sender.ordinal})
        if not candidates:
            # nowhere left to pass it: the hop budget is unusable
            return [
                Trace("ttl_expired", {"req": msg.request_id}),
                self._reply_back(msg.failure("ttl_expired")),
            ]
        fanout = min(self.cfg.forward_fanout, len(candidates))
        targets = ctx.rng.sample_without_replacement(candidates, fanout)
        fwd = msg.forwarded(via=ctx.self_id, ttl_hops=ttl)
        return [Send(t, fwd) for t in targets]

    def on_timer(self, tag: str, data: Any, ctx: Ctx):
        if tag == "handle":
            if self.silent_drop:
                return []
            msg: Message = data
            self.handled += 1
            return [
                Trace("proc_end", {"req": msg.request_id}),
                self._reply_back(msg.reply()),
            ]
        if tag == "maintenance":
            return self._maintain(ctx)
        return []

    def _maintain(self, ctx: Ctx):
        actions: list = [SetTimer(self.cfg.maintenance_period, "maintenance")]
        me = ctx.self_id.ordinal
        removed: list[int] = []
        added: list[int] = []

        for n in sorted(self.neighbours):
            if not ctx.is_alive(n):
                removed.append(n)
            elif self.cfg.churn_probability > 0 and ctx.rng.next_unit() < self.cfg.churn_probability:
                removed.append(n)
        for n in removed:
            actions.append(UnlinkNeighbours(me, n))

        keep = self.neighbours - set(removed)
        pool = [p for p in ctx.live_ordinals("peer") if p != me and p not in keep]
        want = self.cfg.target_degree - len(keep)
        if want > 0 and pool:
            for n in ctx.rng.sample_without_replacement(pool, want):
                added.append(n)
                actions.append(LinkNeighbours(me, n))

        if removed or added:
            actions.append(
                Trace(
                    "maintenance",
                    {
                        "added": [ctx.label(n) for n in added],
                        "removed": [ctx.label(n) for n in removed],
                    },
                )
            )
        return actions

    def snapshot(self) -> dict:
        return {
            "degree": len(self.neighbours),
            "handled": self.handled,
            "silent_drop": self.silent_drop,
        }
