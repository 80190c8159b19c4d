"""Leader and worker roles.

The leader fronts a pool of workers. Every client request is dispatched per
the configured policy (round-robin, random, or least-busy) and fanout mode:

* single     - one worker gets the request
* replicate  - k workers get identical copies; first answer wins, the rest
               are discarded (traced dup_discard)
* split      - the request is cut into k fragments, one per worker; the
               leader recombines (free) and answers once all are in

If every chosen worker is busy the leader may grow the pool, up to
max_workers; past that the request waits in the leader's own queue
(traced capacity_exhausted). A periodic idle check stops workers that have
been idle long enough, never dropping below min_workers.

Workers talk to nobody but their leader.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace as dc_replace
from typing import Any, Optional

from ..distributions import DurationDistribution
from ..ids import ComponentId, SimTime
from ..messages import FAILURE, REPLY, REQUEST, Message
from .base import Behavior, Ctx, Send, SetTimer, Spawn, Stop, Trace, violation

SINGLE = "single"
REPLICATE = "replicate"
SPLIT = "split"

ROUND_ROBIN = "round_robin"
RANDOM = "random"
LEAST_BUSY = "least_busy"


@dataclass(frozen=True, slots=True)
class WorkerConfig:
    leader: int
    proc: DurationDistribution


@dataclass(frozen=True, slots=True)
class LeaderConfig:
    initial_workers: tuple[int, ...]
    worker_proc: DurationDistribution
    policy: str = ROUND_ROBIN
    fanout_mode: str = SINGLE
    fanout_k: int = 1
    min_workers: int = 1
    max_workers: int = 8
    idle_check_period: SimTime = 1_000_000
    idle_stop_threshold: SimTime = 500_000
    spawn_delay: SimTime = 0


@dataclass(slots=True)
class _Pending:
    origin: Message
    want: int
    got: int = 0
    fragments_seen: int = 0
    replied: bool = False


class Leader(Behavior):
    role = "leader"

    def __init__(self, cfg: LeaderConfig):
        self.cfg = cfg
        self.workers: list[int] = list(cfg.initial_workers)
        self.rr_cursor = 0
        self.outstanding: dict[int, int] = {w: 0 for w in self.workers}
        self.idle_since: dict[int, SimTime] = {w: 0 for w in self.workers}
        self.pending: dict[int, _Pending] = {}
        self.deferred: deque[Message] = deque()

    # -- pool plumbing ---------------------------------------------------

    def _live_workers(self, ctx: Ctx) -> list[int]:
        return [w for w in self.workers if ctx.is_alive(w)]

    def _pick(self, pool: list[int], k: int, ctx: Ctx) -> list[int]:
        """Up to k distinct picks from pool, honoring the policy."""
        if not pool or k <= 0 or not self.workers:
            return []
        if self.cfg.policy == LEAST_BUSY:
            ranked = sorted(pool, key=lambda w: (self.outstanding.get(w, 0), w))
            return ranked[:k]
        if self.cfg.policy == RANDOM:
            return ctx.rng.sample_without_replacement(sorted(pool), min(k, len(pool)))
        # round-robin over the join-order list, skipping entries not in pool
        picked: list[int] = []
        pool_set = set(pool)
        n = len(self.workers)
        scanned = 0
        while len(picked) < k and scanned < n:
            w = self.workers[self.rr_cursor % n]
            self.rr_cursor += 1
            scanned += 1
            if w in pool_set and w not in picked:
                picked.append(w)
        return picked

    def _spawn(self, ctx: Ctx) -> tuple[int, list]:
        ordinal, name = ctx.reserve_ordinal("worker_")
        cfg = WorkerConfig(leader=ctx.self_id.ordinal, proc=self.cfg.worker_proc)
        self.workers.append(ordinal)
        self.outstanding[ordinal] = 0
        self.idle_since[ordinal] = ctx.now + self.cfg.spawn_delay
        return ordinal, [Spawn(ordinal, name, "worker", cfg, delay=self.cfg.spawn_delay)]

    def _dispatch_to(self, worker: int, msg: Message) -> Send:
        self.outstanding[worker] = self.outstanding.get(worker, 0) + 1
        return Send(worker, msg)

    # -- request path ----------------------------------------------------

    def _dispatch(self, msg: Message, ctx: Ctx) -> list:
        k = self.cfg.fanout_k if self.cfg.fanout_mode != SINGLE else 1
        live = self._live_workers(ctx)
        idle = [w for w in live if self.outstanding.get(w, 0) == 0]
        actions: list = []

        if not idle and len(live) < self.cfg.max_workers:
            fresh, spawn_actions = self._spawn(ctx)
            actions.extend(spawn_actions)
            live.append(fresh)
            idle = [fresh]
        if not idle:
            self.deferred.append(msg)
            actions.append(Trace("capacity_exhausted", {"req": msg.request_id}))
            return actions

        # idle workers first; only a fanout wider than the idle set
        # spills copies onto busy workers' queues
        chosen = self._pick(idle, k, ctx)
        if len(chosen) < k:
            busy = [w for w in live if w not in chosen and self.outstanding.get(w, 0) > 0]
            chosen.extend(self._pick(busy, k - len(chosen), ctx))

        if self.cfg.fanout_mode == SPLIT and len(chosen) > 1:
            total = len(chosen)
            self.pending[msg.request_id] = _Pending(origin=msg, want=total)
            for i, w in enumerate(chosen):
                frag = dc_replace(msg, fragment=(i, total))
                actions.append(self._dispatch_to(w, frag))
        elif self.cfg.fanout_mode == REPLICATE and len(chosen) > 1:
            self.pending[msg.request_id] = _Pending(origin=msg, want=len(chosen))
            for w in chosen:
                actions.append(self._dispatch_to(w, msg))
        else:
            self.pending[msg.request_id] = _Pending(origin=msg, want=1)
            actions.append(self._dispatch_to(chosen[0], msg))
        return actions

    def on_start(self, ctx: Ctx):
        return [SetTimer(self.cfg.idle_check_period, "idle_check")]

    def on_message(self, msg: Message, sender: ComponentId, ctx: Ctx):
        if msg.kind == REQUEST:
            if ctx.role_of(sender.ordinal) != "client":
                return [violation("leader fronts clients only", msg, ctx.label(sender.ordinal))]
            return self._dispatch(msg, ctx)
        return self._worker_answer(msg, sender, ctx)

    def _worker_answer(self, msg: Message, sender: ComponentId, ctx: Ctx):
        w = sender.ordinal
        if w not in self.outstanding:
            return [violation("answer from unknown worker", msg, ctx.label(w))]
        if self.outstanding[w] > 0:
            self.outstanding[w] -= 1
            if self.outstanding[w] == 0:
                self.idle_since[w] = ctx.now

        actions: list = []
        entry = self.pending.get(msg.request_id)
        if entry is None:
            actions.append(Trace("dup_discard", {"req": msg.request_id}))
        else:
            entry.got += 1
            if self.cfg.fanout_mode == SPLIT and entry.want > 1:
                if msg.kind == FAILURE and not entry.replied:
                    entry.replied = True
                    actions.append(Send(msg.origin_client.ordinal, dc_replace(msg, fragment=None)))
                elif entry.got == entry.want and not entry.replied:
                    entry.replied = True
                    whole = dc_replace(entry.origin.reply(), fragment=None)
                    actions.append(Send(whole.origin_client.ordinal, whole))
            else:
                if not entry.replied:
                    entry.replied = True
                    actions.append(Send(msg.origin_client.ordinal, msg))
                else:
                    actions.append(Trace("dup_discard", {"req": msg.request_id}))
            if entry.got >= entry.want:
                del self.pending[msg.request_id]

        actions.extend(self._drain_deferred(ctx))
        return actions

    def _has_idle_live_worker(self, ctx: Ctx) -> bool:
        return any(self.outstanding.get(w, 0) == 0 for w in self._live_workers(ctx))

    def _drain_deferred(self, ctx: Ctx) -> list:
        actions: list = []
        while self.deferred and self._has_idle_live_worker(ctx):
            actions.extend(self._dispatch(self.deferred.popleft(), ctx))
        return actions

    def on_timer(self, tag: str, data: Any, ctx: Ctx):
        if tag != "idle_check":
            return []
        actions: list = [SetTimer(self.cfg.idle_check_period, "idle_check")]
        live = self._live_workers(ctx)
        stoppable = [
            w
            for w in live
            if self.outstanding.get(w, 0) == 0
            and ctx.now - self.idle_since.get(w, 0) >= self.cfg.idle_stop_threshold
        ]
        can_stop = max(0, len(live) - self.cfg.min_workers)
        stoppable.sort(key=lambda w: (self.idle_since.get(w, 0), w))
        for w in stoppable[:can_stop]:
            self._forget(w)
            actions.append(Stop(w, "idle"))
        return actions

    def _forget(self, w: int) -> None:
        if w in self.workers:
            self.workers.remove(w)
        self.outstanding.pop(w, None)
        self.idle_since.pop(w, None)

    # -- conductor hooks ---------------------------------------------------

    def conductor_spawn(self, ctx: Ctx):
        if len(self._live_workers(ctx)) >= self.cfg.max_workers:
            return None, "worker pool already at max_workers"
        _, spawn_actions = self._spawn(ctx)
        spawn_actions.extend(self._drain_deferred(ctx))
        return spawn_actions, None

    def conductor_stop(self, worker: int, ctx: Ctx):
        live = self._live_workers(ctx)
        if worker not in live:
            return None, "not a live worker of this leader"
        if len(live) <= self.cfg.min_workers:
            return None, "stopping would drop below min_workers"
        self._forget(worker)
        return [Stop(worker, "conductor")], None

    def snapshot(self) -> dict:
        return {
            "workers": len(self.workers),
            "queued": len(self.deferred),
            "pending": len(self.pending),
        }


class Worker(Behavior):
    role = "worker"

    def __init__(self, cfg: WorkerConfig):
        self.cfg = cfg
        self.busy = False
        self.current: Optional[Message] = None
        self.deferred: deque[Message] = deque()

    def on_message(self, msg: Message, sender: ComponentId, ctx: Ctx):
        if msg.kind != REQUEST or sender.ordinal != self.cfg.leader:
            return [violation("workers take work from their leader only", msg, ctx.label(sender.ordinal))]
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
            Send(self.cfg.leader, msg.reply()),
        ]
        self.current = None
        self.busy = False
        if self.deferred:
            actions.extend(self._accept(self.deferred.popleft(), ctx))
        return actions

    def snapshot(self) -> dict:
        return {"busy": self.busy, "queued": len(self.deferred)}
