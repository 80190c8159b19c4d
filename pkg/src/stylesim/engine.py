"""The discrete-event engine.

One engine owns one run: the event queue, the virtual clock, the component
registry, the per-component RNG streams, and the append-only trace. Behaviors
return actions; the engine is the only thing that interprets them, so all
side effects (sends, timers, spawns, fault handling) happen in one place and
in one deterministic order.

Addressing: messages are sent to ordinals, and an ordinal always resolves to
the current incarnation of that component. A crashed component's ordinal
still exists, so anything addressed to it is dropped with a trace record
until a restart brings up the next generation.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .behaviors import make_behavior
from .behaviors.base import (
    Behavior,
    LinkNeighbours,
    Send,
    SetTimer,
    Spawn,
    Stop,
    Trace,
    UnlinkNeighbours,
)
from .errors import InvariantViolation, RestartOfLiveComponent, UnknownComponent
from .events import ControlCmd, Deliver, EventQueue, FaultCmd, SimEvent, Timer
from .ids import ComponentId, SimTime
from .messages import Message
from .rng import StreamRegistry
from .scenario import Scenario, build_topology
from .topology import Topology
from .trace import TRACE_VERSION, TraceWriter

_START_TAG = "__start__"


@dataclass(slots=True)
class Node:
    cid: ComponentId
    name: str  # base name; the trace label appends @generation past gen 0
    role: str
    config: Any
    behavior: Behavior
    alive: bool = True
    alive_at: SimTime = 0
    timers: dict[int, SimEvent] = field(default_factory=dict)  # keyed by event seq


class _Ctx:
    """Behavior-facing view of the engine, scoped to one dispatch."""

    __slots__ = ("_engine", "_node")

    def __init__(self, engine: "Engine", node: Node):
        self._engine = engine
        self._node = node

    @property
    def now(self) -> SimTime:
        return self._engine.now

    @property
    def self_id(self) -> ComponentId:
        return self._node.cid

    @property
    def rng(self):
        return self._engine.streams.stream(self._node.cid.ordinal)

    def label(self, ordinal: int) -> str:
        return self._engine.label(ordinal)

    def role_of(self, ordinal: int) -> Optional[str]:
        node = self._engine.nodes.get(ordinal)
        return node.role if node else None

    def is_alive(self, ordinal: int) -> bool:
        return self._engine.is_alive(ordinal)

    def live_ordinals(self, role: str) -> list[int]:
        return [
            o
            for o in sorted(self._engine.nodes)
            if self._engine.nodes[o].role == role and self._engine.is_alive(o)
        ]

    def reserve_ordinal(self, name_prefix: str) -> tuple[int, str]:
        return self._engine.reserve_ordinal(name_prefix)

    def next_request_id(self) -> int:
        self._engine.request_counter += 1
        return self._engine.request_counter


class Engine:
    def __init__(
        self,
        scenario: Scenario,
        sink: Callable[[str], None] | None = None,
        topology: Optional["Topology"] = None,
    ):
        self.scenario = scenario
        self.topology = build_topology(scenario) if topology is None else topology
        self.queue = EventQueue()
        self.writer = TraceWriter(sink)
        self.streams = StreamRegistry(scenario.seed)
        self.link_latency = scenario.link_latency()
        self.now: SimTime = 0
        self.request_counter = 0
        self.events_processed = 0
        self.nodes: dict[int, Node] = {}
        self.control_results: list[tuple[str, Optional[str]]] = []
        self._by_name: dict[int, str] = {}
        self._name_to_ordinal: dict[str, int] = {}
        self._next_ordinal = len(self.topology.specs)
        self._name_counters: dict[str, int] = {}

        self.writer.emit(
            0,
            "header",
            "engine",
            {
                "scenario": self.scenario.effective,
                "seed": self.scenario.seed,
                "version": TRACE_VERSION,
            },
        )
        for ordinal, spec in enumerate(self.topology.specs):
            self._register(ordinal, spec.name, spec.role, spec.config, alive_at=0)
        for ordinal in range(len(self.topology.specs)):
            self._bring_up(self.nodes[ordinal])
        for fault in self.scenario.faults():
            kind, on = {
                "crash": ("crash", True),
                "restart": ("restart", True),
                "silent_drop_on": ("set_silent_drop", True),
                "silent_drop_off": ("set_silent_drop", False),
            }[fault.kind]
            self.queue.push(fault.at_us, 0, None, FaultCmd(kind, fault.target, on))

    # -- registry ----------------------------------------------------------

    def _register(self, ordinal: int, name: str, role: str, config: Any, alive_at: SimTime) -> Node:
        node = Node(
            cid=ComponentId(ordinal, 0),
            name=name,
            role=role,
            config=config,
            behavior=make_behavior(role, config),
            alive_at=alive_at,
        )
        self.nodes[ordinal] = node
        self._name_to_ordinal[name] = ordinal
        return node

    def label(self, ordinal: int) -> str:
        node = self.nodes[ordinal]
        return self._label_for(node.name, node.cid.generation)

    @staticmethod
    def _label_for(name: str, generation: int) -> str:
        return name if generation == 0 else f"{name}@{generation}"

    def _label_cid(self, cid: ComponentId) -> str:
        node = self.nodes.get(cid.ordinal)
        name = node.name if node else f"#{cid.ordinal}"
        return self._label_for(name, cid.generation)

    def is_alive(self, ordinal: int) -> bool:
        node = self.nodes.get(ordinal)
        return bool(node and node.alive and self.now >= node.alive_at)

    def ordinal_of(self, name: str) -> int:
        try:
            return self._name_to_ordinal[name]
        except KeyError:
            raise UnknownComponent(name) from None

    def reserve_ordinal(self, name_prefix: str) -> tuple[int, str]:
        if name_prefix not in self._name_counters:
            pattern = re.compile(re.escape(name_prefix) + r"(\d+)$")
            taken = [-1]
            for name in self._name_to_ordinal:
                m = pattern.match(name)
                if m:
                    taken.append(int(m.group(1)))
            self._name_counters[name_prefix] = max(taken) + 1
        n = self._name_counters[name_prefix]
        self._name_counters[name_prefix] = n + 1
        ordinal = self._next_ordinal
        self._next_ordinal += 1
        return ordinal, f"{name_prefix}{n}"

    # -- lifecycle ---------------------------------------------------------

    def _bring_up(self, node: Node) -> None:
        self.writer.emit(
            self.now,
            "spawn",
            self.label(node.cid.ordinal),
            {"gen": node.cid.generation, "ordinal": node.cid.ordinal, "role": node.role},
        )
        self._apply_actions(node, node.behavior.on_start(_Ctx(self, node)))

    def _cancel_timers(self, node: Node) -> None:
        for handle in node.timers.values():
            handle.cancel()
        node.timers.clear()

    def _crash(self, node: Node, trace_type: str = "crash", reason: str | None = None) -> None:
        node.alive = False
        self._cancel_timers(node)
        payload: dict = {"gen": node.cid.generation}
        if reason is not None:
            payload["reason"] = reason
        self.writer.emit(self.now, trace_type, self.label(node.cid.ordinal), payload)

    def _restart(self, node: Node) -> None:
        if node.alive:
            raise RestartOfLiveComponent(node.name)
        config = node.config
        if node.role == "peer":
            # a rejoining peer knows nobody until its next maintenance round
            config = dataclasses.replace(config, initial_neighbours=())
        node.cid = node.cid.next_generation()
        node.config = config
        node.behavior = make_behavior(node.role, config)
        node.alive = True
        node.alive_at = self.now
        self.writer.emit(
            self.now,
            "restart",
            self.label(node.cid.ordinal),
            {"gen": node.cid.generation, "ordinal": node.cid.ordinal, "role": node.role},
        )
        self._apply_actions(node, node.behavior.on_start(_Ctx(self, node)))

    def _apply_fault(self, cmd: FaultCmd) -> Optional[str]:
        ordinal = self._name_to_ordinal.get(cmd.target_name)
        if ordinal is None:
            return f"unknown component {cmd.target_name!r}"
        node = self.nodes[ordinal]
        if cmd.kind == "crash":
            if not node.alive:
                return f"{cmd.target_name} is already down"
            self._crash(node)
            return None
        if cmd.kind == "restart":
            if node.alive:
                raise RestartOfLiveComponent(cmd.target_name)
            self._restart(node)
            return None
        if cmd.kind == "set_silent_drop":
            if node.role != "peer":
                return "silent drop only applies to peers"
            node.behavior.silent_drop = cmd.on
            self.writer.emit(self.now, "silentdrop", self.label(ordinal), {"on": cmd.on})
            return None
        return f"unknown fault kind {cmd.kind!r}"

    # -- control -----------------------------------------------------------

    def schedule_control(self, cmd: dict, cmd_id: str, at: SimTime | None = None) -> None:
        self.queue.push(self.now if at is None else at, self.now, None, ControlCmd(cmd, cmd_id))

    def _apply_control(self, ev: SimEvent) -> None:
        assert isinstance(ev.payload, ControlCmd)
        cmd, cmd_id = ev.payload.cmd, ev.payload.cmd_id
        self.writer.emit(self.now, "control", "conductor", {"cmd": cmd, "eseq": ev.seq, "id": cmd_id})
        error = self._run_control(cmd)
        self.control_results.append((cmd_id, error))

    def _client_named(self, name: Optional[str]) -> Node | str:
        if name is None:
            clients = [n for n in self.nodes.values() if n.role == "client" and n.alive]
            if not clients:
                return "no live client"
            return min(clients, key=lambda n: n.cid.ordinal)
        ordinal = self._name_to_ordinal.get(name)
        if ordinal is None:
            return f"unknown component {name!r}"
        node = self.nodes[ordinal]
        if node.role != "client":
            return f"{name} is not a client"
        return node

    def _run_control(self, cmd: dict) -> Optional[str]:
        op = cmd.get("op")
        if op in ("pause", "resume", "step", "set_pace"):
            return None  # session pacing; no effect on the virtual timeline
        if op == "inject":
            node = self._client_named(cmd.get("client"))
            if isinstance(node, str):
                return node
            service = cmd.get("service") or node.behavior.cfg.service
            count = int(cmd.get("count", 1))
            self._apply_actions(node, node.behavior.inject(service, count, _Ctx(self, node)))
            return None
        if op == "set_rate":
            node = self._client_named(cmd.get("client"))
            if isinstance(node, str):
                return node
            rps = cmd.get("rps")
            if not isinstance(rps, (int, float)) or rps <= 0:
                return "rps must be positive"
            node.behavior.set_rate(float(rps))
            return None
        if op in ("crash", "restart"):
            target = cmd.get("target")
            if target is None:
                return "missing target"
            try:
                return self._apply_fault(FaultCmd(op, target, True))
            except RestartOfLiveComponent:
                return f"{target} is not down"
        if op == "toggle_silent_drop":
            target = cmd.get("target")
            if target is None:
                return "missing target"
            ordinal = self._name_to_ordinal.get(target)
            if ordinal is None:
                return f"unknown component {target!r}"
            node = self.nodes[ordinal]
            if node.role != "peer":
                return "silent drop only applies to peers"
            return self._apply_fault(
                FaultCmd("set_silent_drop", target, not node.behavior.silent_drop)
            )
        if op == "spawn_worker":
            return self._leader_call(lambda leader, ctx: leader.behavior.conductor_spawn(ctx))
        if op == "stop_worker":
            target = cmd.get("target")
            if target is None:
                return "missing target"
            ordinal = self._name_to_ordinal.get(target)
            if ordinal is None:
                return f"unknown component {target!r}"
            return self._leader_call(
                lambda leader, ctx: leader.behavior.conductor_stop(ordinal, ctx)
            )
        return f"unknown command {op!r}"

    def _leader_call(self, call) -> Optional[str]:
        leaders = [n for n in self.nodes.values() if n.role == "leader"]
        if not leaders:
            return "this style has no leader"
        leader = leaders[0]
        if not leader.alive:
            return "the leader is down"
        actions, error = call(leader, _Ctx(self, leader))
        if actions:
            self._apply_actions(leader, actions)
        return error

    # -- event loop ----------------------------------------------------------

    def step(self) -> bool:
        ev = self.queue.pop()
        if ev is None:
            return False
        if ev.time < self.now:
            raise InvariantViolation(f"clock would go backwards: {ev.time} < {self.now}")
        self.now = ev.time
        self.events_processed += 1
        payload = ev.payload
        if isinstance(payload, FaultCmd):
            self._apply_fault(payload)
            return True
        if isinstance(payload, ControlCmd):
            self._apply_control(ev)
            return True
        node = self.nodes.get(ev.target.ordinal)
        if node is None:
            return True
        if isinstance(payload, Timer):
            if node.cid.generation != ev.target.generation or not node.alive:
                return True
            node.timers.pop(ev.seq, None)
            if payload.tag == _START_TAG:
                self._bring_up(node)
                return True
            self._apply_actions(node, node.behavior.on_timer(payload.tag, payload.data, _Ctx(self, node)))
            return True
        if isinstance(payload, Deliver):
            msg, sender = payload.msg, payload.sender
            if not node.alive or self.now < node.alive_at:
                self.writer.emit(
                    self.now,
                    "drop_dead_target",
                    self._label_for(node.name, node.cid.generation),
                    {"from": self._label_cid(sender), "kind": msg.kind, "req": msg.request_id},
                )
                return True
            self.writer.emit(
                self.now,
                "deliver",
                self.label(node.cid.ordinal),
                {"from": self._label_cid(sender), "kind": msg.kind, "req": msg.request_id},
            )
            self._apply_actions(node, node.behavior.on_message(msg, sender, _Ctx(self, node)))
            return True
        raise InvariantViolation(f"unhandled payload {payload!r}")

    def run_until(self, t: SimTime) -> int:
        if t < self.now:
            raise InvariantViolation(f"cannot run backwards to t={t} from {self.now}")
        count = 0
        while True:
            nxt = self.queue.peek_time()
            if nxt is None or nxt > t:
                break
            self.step()
            count += 1
        return count

    def run(self) -> int:
        return self.run_until(self.scenario.duration_us)

    # -- action interpretation ------------------------------------------------

    def _apply_actions(self, node: Node, actions) -> None:
        for action in actions:
            if isinstance(action, Trace):
                self.writer.emit(self.now, action.type, self.label(node.cid.ordinal), dict(action.payload))
            elif isinstance(action, Send):
                self._send(node, action)
            elif isinstance(action, SetTimer):
                handle = self.queue.push(
                    self.now + action.delay,
                    self.now,
                    node.cid,
                    Timer(action.tag, action.data),
                )
                node.timers[handle.seq] = handle
            elif isinstance(action, Spawn):
                child = self._register(
                    action.ordinal, action.name, action.role, action.config, alive_at=self.now + action.delay
                )
                handle = self.queue.push(self.now + action.delay, self.now, child.cid, Timer(_START_TAG))
                child.timers[handle.seq] = handle
            elif isinstance(action, Stop):
                target = self.nodes.get(action.ordinal)
                if target is not None and target.alive:
                    self._crash(target, trace_type="stop", reason=action.reason)
            elif isinstance(action, LinkNeighbours):
                self._set_link(action.a, action.b, True)
            elif isinstance(action, UnlinkNeighbours):
                self._set_link(action.a, action.b, False)
            else:
                raise InvariantViolation(f"unknown action {action!r}")

    def _send(self, node: Node, action: Send) -> None:
        delay = action.extra_delay + self.link_latency.sample(self.streams.stream(node.cid.ordinal))
        target = self.nodes.get(action.to_ordinal)
        to_label = self.label(action.to_ordinal) if target else f"#{action.to_ordinal}"
        self.writer.emit(
            self.now,
            "send",
            self.label(node.cid.ordinal),
            {"kind": action.msg.kind, "req": action.msg.request_id, "to": to_label},
        )
        target_cid = target.cid if target else ComponentId(action.to_ordinal, 0)
        self.queue.push(self.now + delay, self.now, target_cid, Deliver(action.msg, node.cid))

    def _set_link(self, a: int, b: int, on: bool) -> None:
        for u, v in ((a, b), (b, a)):
            node = self.nodes.get(u)
            if node is None or node.role != "peer":
                continue
            if on:
                node.behavior.neighbours.add(v)
            else:
                node.behavior.neighbours.discard(v)

    # -- introspection ---------------------------------------------------------

    def snapshot_topology(self) -> dict:
        nodes = []
        edges = []
        for ordinal in sorted(self.nodes):
            node = self.nodes[ordinal]
            nodes.append(
                {
                    "ordinal": ordinal,
                    "name": self.label(ordinal),
                    "role": node.role,
                    "gen": node.cid.generation,
                    "alive": self.is_alive(ordinal),
                    "state": node.behavior.snapshot(),
                }
            )
            edges.extend(
                {"from": ordinal, "to": ref} for ref in self._current_refs(node)
            )
        return {"t": self.now, "nodes": nodes, "edges": edges}

    def _current_refs(self, node: Node) -> list[int]:
        if node.role == "peer":
            return sorted(node.behavior.neighbours)
        if node.role == "leader":
            return list(node.behavior.workers)
        if node.role == "client":
            return list(node.behavior.rotation)
        ordinal = node.cid.ordinal
        if ordinal < len(self.topology.specs):
            return [r for r in self.topology.references(ordinal) if r in self.nodes]
        if node.role == "worker":
            return [node.config.leader]
        return []
