"""Live session server.

Owns exactly one engine and drives it in paced wall time: at each tick the
queued conductor commands are scheduled into the engine at the current
virtual instant, the engine is advanced to the pace target, and whatever
happened becomes frames (trace batches, metrics snapshots, topology
snapshots, acks, errors).

Every command is recorded in the trace as a control line, so a session's
trace replays byte for byte without the conductor present.  The engine
stays single-driver: a second WebSocket connection is refused while one
is attached.
"""

from __future__ import annotations

import asyncio
import copy
import json
import time
from collections import deque
from importlib import resources
from pathlib import Path

from fastapi import FastAPI, WebSocket
from starlette.websockets import WebSocketDisconnect

from .engine import Engine
from .metrics import build_ledger, build_report
from .scenario import Scenario, parse_scenario, scenario_schema
from .trace import parse_lines

TICK_SECONDS = 0.02
METRICS_PERIOD_US = 1_000_000
MAX_OUTBOX = 512

_FRAMES_SCHEMA = json.loads(
    resources.files("stylesim").joinpath("frames.schema.json").read_text()
)

# command type -> {field: (allowed types, required)}
_COMMAND_SHAPE = {
    "pause": {},
    "resume": {},
    "spawn_worker": {},
    "step": {"n": (int, False)},
    "set_pace": {"factor": ((int, float), True)},
    "inject": {"client": (str, False), "service": (str, False), "count": (int, False)},
    "crash": {"component": (str, True)},
    "restart": {"component": (str, True)},
    "stop_worker": {"component": (str, True)},
    "set_rate": {"client": (str, False), "rps": ((int, float), True)},
    "toggle_silent_drop": {"peer": (str, True)},
}


def frames_schema() -> dict:
    return copy.deepcopy(_FRAMES_SCHEMA)


def _dumps(frame: dict) -> str:
    return json.dumps(frame, separators=(",", ":"))


def _shape_error(kind: str, frame: dict) -> str | None:
    shape = _COMMAND_SHAPE.get(kind)
    if shape is None:
        return f"unknown command type {kind!r}"
    for key, (types, required) in shape.items():
        value = frame.get(key)
        if value is None:
            if required:
                return f"{key} is required"
            continue
        if isinstance(value, bool) or not isinstance(value, types):
            return f"{key} has the wrong type"
    return None


def _engine_op(kind: str, frame: dict) -> dict:
    if kind in ("pause", "resume", "spawn_worker"):
        return {"op": kind}
    if kind == "step":
        return {"op": "step", "n": frame.get("n", 1)}
    if kind == "set_pace":
        return {"op": "set_pace", "factor": frame["factor"]}
    if kind == "inject":
        op = {"op": "inject", "count": frame.get("count", 1)}
        if frame.get("client") is not None:
            op["client"] = frame["client"]
        if frame.get("service") is not None:
            op["service"] = frame["service"]
        return op
    if kind in ("crash", "restart"):
        return {"op": kind, "target": frame["component"]}
    if kind == "stop_worker":
        return {"op": "stop_worker", "target": frame["component"]}
    if kind == "set_rate":
        op = {"op": "set_rate", "rps": frame["rps"]}
        if frame.get("client") is not None:
            op["client"] = frame["client"]
        return op
    return {"op": "toggle_silent_drop", "target": frame["peer"]}


class Session:
    """One engine plus the pacing, command, and framing state around it.

    The session is synchronous: the network layer feeds it raw command
    text and calls tick(wall_now); frames to send accumulate in outbox.
    Keeping it free of IO makes the pacing and framing logic testable
    with a synthetic wall clock.
    """

    def __init__(self, scenario: Scenario, pace: float | None = None):
        self.scenario = scenario
        self.duration_us = scenario.duration_us
        if pace is None:
            pacing = scenario.pacing
            pace = float(pacing.get("factor", 1.0)) if pacing["mode"] == "realtime" else 1.0
        self.pace = pace
        self.paused = True
        self.metrics_period_us = METRICS_PERIOD_US
        self.outbox: deque[dict] = deque()
        self._inbox: list[dict] = []
        self._cursor = 0  # virtual time the pacer has granted so far
        self._anchor_wall = 0.0
        self._anchor_virtual = 0
        self._flushed = 0
        self._next_metrics = METRICS_PERIOD_US
        self._results_seen = 0
        self._applied_at: dict[str, int] = {}
        self._pending_steps = 0
        self._last_topology: dict | None = None
        self.engine = Engine(scenario)
        self.engine.run_until(0)  # bring-up: the opening instant completes
        self._emit_trace()

    # -- observation -----------------------------------------------------

    def _virtual(self) -> int:
        return max(self._cursor, self.engine.now)

    def attach(self) -> None:
        """A driver connected; give it the current picture."""
        self._push_topology(force=True)

    def snapshot(self) -> dict:
        """Point-in-time view; never advances or perturbs the run."""
        topology = {"type": "topology", **self.engine.snapshot_topology()}
        metrics = None
        boundary = self._next_metrics - self.metrics_period_us
        if boundary >= self.metrics_period_us:
            metrics = self._metrics_frame(boundary)
        return {"topology": topology, "metrics": metrics}

    # -- command intake ----------------------------------------------------

    def queue_raw(self, text: str) -> None:
        try:
            frame = json.loads(text)
        except json.JSONDecodeError:
            self._push({"type": "error", "id": None, "message": "not valid JSON"})
            return
        if not isinstance(frame, dict):
            self._push({"type": "error", "id": None, "message": "command must be an object"})
            return
        self.submit(frame)

    def submit(self, frame: dict) -> None:
        self._inbox.append(frame)

    # -- the tick ----------------------------------------------------------

    def tick(self, wall_now: float) -> None:
        inbox, self._inbox = self._inbox, []
        for frame in inbox:
            self._dispatch(frame, wall_now)
        # commands land at the current instant; settle it
        self.engine.run_until(self.engine.now)
        while self._pending_steps > 0:
            self._pending_steps -= 1
            nxt = self.engine.queue.peek_time()
            if nxt is None or nxt > self.duration_us:
                self._pending_steps = 0
                break
            self.engine.step()
        if not self.paused:
            elapsed = wall_now - self._anchor_wall
            target = self._anchor_virtual + int(elapsed * self.pace * 1_000_000)
            target = min(self.duration_us, target)
            if target > self._cursor:
                self._cursor = target
            if self._cursor > self.engine.now:
                self.engine.run_until(self._cursor)
        self._emit_trace()
        self._drain_results()
        self._emit_metrics()
        self._push_topology()

    def _dispatch(self, frame: dict, wall_now: float) -> None:
        cmd_id = frame.get("id")
        if not isinstance(cmd_id, str) or not cmd_id:
            self._push({"type": "error", "id": None, "message": "command needs a string id"})
            return
        kind = frame.get("type")
        problem = _shape_error(kind, frame)
        if problem is not None:
            self._push({"type": "error", "id": cmd_id, "message": problem})
            return
        if kind == "set_pace" and frame["factor"] <= 0:
            self._push({"type": "error", "id": cmd_id, "message": "factor must be positive"})
            return
        if kind == "step" and frame.get("n", 1) < 1:
            self._push({"type": "error", "id": cmd_id, "message": "n must be at least 1"})
            return
        if kind == "inject" and frame.get("count", 1) < 1:
            self._push({"type": "error", "id": cmd_id, "message": "count must be at least 1"})
            return
        if kind == "pause":
            self.paused = True
        elif kind == "resume":
            self.paused = False
            self._rebase(wall_now)
        elif kind == "set_pace":
            self.pace = float(frame["factor"])
            self._rebase(wall_now)
        elif kind == "step":
            self._pending_steps += frame.get("n", 1)
        self._applied_at[cmd_id] = self.engine.now
        self.engine.schedule_control(_engine_op(kind, frame), cmd_id)

    def _rebase(self, wall_now: float) -> None:
        self._cursor = self._anchor_virtual = self._virtual()
        self._anchor_wall = wall_now

    # -- frames --------------------------------------------------------------

    def _push(self, frame: dict) -> None:
        # backpressure: metrics are the expendable frames, never the trace
        if len(self.outbox) >= MAX_OUTBOX:
            self.outbox = deque(f for f in self.outbox if f["type"] != "metrics")
            if len(self.outbox) >= MAX_OUTBOX and frame["type"] == "metrics":
                return
        self.outbox.append(frame)

    def _emit_trace(self) -> None:
        lines = self.engine.writer.lines
        if self._flushed < len(lines):
            self._push({"type": "trace_batch", "lines": lines[self._flushed :]})
            self._flushed = len(lines)

    def _drain_results(self) -> None:
        results = self.engine.control_results
        while self._results_seen < len(results):
            cmd_id, error = results[self._results_seen]
            self._results_seen += 1
            applied_at = self._applied_at.pop(cmd_id, self.engine.now)
            if error is None:
                self._push({"type": "ack", "id": cmd_id, "t": applied_at})
            else:
                self._push({"type": "error", "id": cmd_id, "message": error})

    def _metrics_frame(self, end: int) -> dict:
        window = (end - self.metrics_period_us, end)
        ledger = build_ledger(list(parse_lines(self.engine.writer.lines)), horizon=end)
        report = build_report(ledger, window)
        return {"type": "metrics", "report": json.loads(report.to_json())}

    def _emit_metrics(self) -> None:
        while self._next_metrics <= self._virtual():
            self._push(self._metrics_frame(self._next_metrics))
            self._next_metrics += self.metrics_period_us

    def _push_topology(self, force: bool = False) -> None:
        snap = self.engine.snapshot_topology()
        if force or snap != self._last_topology:
            self._last_topology = snap
            self._push({"type": "topology", **snap})


_CLOSED = object()


def create_app(scenario_text: str, pace: float | None = None) -> FastAPI:
    scenario = parse_scenario(scenario_text)
    app = FastAPI(title="stylesim session")
    app.state.session = Session(scenario, pace=pace)
    app.state.driver_attached = False

    @app.get("/scenario")
    def get_scenario() -> dict:
        return app.state.session.scenario.effective

    @app.get("/schema")
    def get_schema() -> dict:
        return {"scenario": scenario_schema(), "frames": frames_schema()}

    @app.websocket("/ws")
    async def ws_session(sock: WebSocket) -> None:
        await sock.accept()
        if app.state.driver_attached:
            await sock.send_text(
                _dumps({"type": "error", "id": None, "message": "session already has a driver"})
            )
            await sock.close(code=1008)
            return
        app.state.driver_attached = True
        session: Session = app.state.session
        session.attach()
        incoming: asyncio.Queue = asyncio.Queue()

        async def reader() -> None:
            try:
                while True:
                    incoming.put_nowait(await sock.receive_text())
            except WebSocketDisconnect:
                incoming.put_nowait(_CLOSED)

        reader_task = asyncio.create_task(reader())
        try:
            while True:
                while session.outbox:
                    await sock.send_text(_dumps(session.outbox.popleft()))
                closed = False
                try:
                    item = await asyncio.wait_for(incoming.get(), timeout=TICK_SECONDS)
                    while True:
                        if item is _CLOSED:
                            closed = True
                            break
                        session.queue_raw(item)
                        if incoming.empty():
                            break
                        item = incoming.get_nowait()
                except asyncio.TimeoutError:
                    pass
                if closed:
                    break
                session.tick(time.monotonic())
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            reader_task.cancel()
            app.state.driver_attached = False
            session.paused = True

    return app


def serve(scenario_path: str, host: str = "127.0.0.1", port: int = 8642,
          pace: float | None = None) -> int:
    app = create_app(Path(scenario_path).read_text(encoding="utf-8"), pace=pace)
    import uvicorn

    uvicorn.run(app, host=host, port=port, log_level="warning")
    return 0
