#!/usr/bin/env python3
"""Capture the golden session fixture for the conductor UI tests.

Drives a live ``stylesim serve`` session through the scripted outage
drill (inject 5 requests, crash the middle layer, restart it, inject 5
more) using explicit step commands, and records every frame the socket
delivers plus every command sent. The engine is deterministic and the
driver sends one command at a time, waiting for its ack, so re-running
this script against an unchanged scenario reproduces the same fixture.

The fixture is what the vitest golden suite replays:

    scenario  the document GET /scenario returned
    actions   the conductor actions, in the UI's action vocabulary
    commands  the exact command objects sent (ids c1..cN)
    frames    every raw frame text received, in order

Run from anywhere inside the repository:

    python3 frontend/scripts/capture_golden.py
"""

from __future__ import annotations

import asyncio
import json
import socket
import subprocess
import sys
import time
import urllib.request
from pathlib import Path

import websockets

ROOT = Path(__file__).resolve().parents[2]
SCENARIO = ROOT / "scenarios" / "layered_demo.json"
OUT = ROOT / "frontend" / "tests" / "fixtures" / "golden_layered.json"

STEP_N = 50
HEALTHY_UNTIL_US = 5_000_000
OUTAGE_UNTIL_US = 12_000_000
FINAL_UNTIL_US = 15_000_000
MIDDLE_LAYER = "layer_1"


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def wait_ready(port: int, timeout: float = 20.0) -> dict:
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        try:
            with urllib.request.urlopen(f"http://127.0.0.1:{port}/scenario", timeout=2) as resp:
                return json.load(resp)
        except OSError:
            time.sleep(0.2)
    raise RuntimeError("server did not come up")


def command_for(action: dict, cmd_id: str) -> dict:
    """The command a conductor action emits; mirrors the UI's buildCommand."""
    kind = action["kind"]
    cmd = {"type": kind, "id": cmd_id}
    for key, value in action.items():
        if key != "kind":
            cmd[key] = value
    return cmd


def control_form(cmd: dict) -> dict:
    """The op record the engine logs for a command; mirrors engineForm."""
    kind = cmd["type"]
    if kind in ("pause", "resume", "spawn_worker"):
        return {"op": kind}
    if kind == "step":
        return {"op": "step", "n": cmd.get("n", 1)}
    if kind == "set_pace":
        return {"op": "set_pace", "factor": cmd["factor"]}
    if kind == "inject":
        op = {"op": "inject", "count": cmd.get("count", 1)}
        if "client" in cmd:
            op["client"] = cmd["client"]
        if "service" in cmd:
            op["service"] = cmd["service"]
        return op
    if kind in ("crash", "restart", "stop_worker"):
        return {"op": kind, "target": cmd["component"]}
    if kind == "set_rate":
        op = {"op": "set_rate", "rps": cmd["rps"]}
        if "client" in cmd:
            op["client"] = cmd["client"]
        return op
    return {"op": "toggle_silent_drop", "target": cmd["peer"]}


class Driver:
    def __init__(self, ws) -> None:
        self.ws = ws
        self.frames: list[str] = []
        self.actions: list[dict] = []
        self.commands: list[dict] = []
        self.counter = 0
        self.last_t = 0

    def _note(self, raw: str) -> dict:
        self.frames.append(raw)
        frame = json.loads(raw)
        if frame["type"] == "trace_batch":
            for line in frame["lines"]:
                self.last_t = max(self.last_t, json.loads(line)["t"])
        elif frame["type"] == "topology":
            self.last_t = max(self.last_t, frame["t"])
        return frame

    async def act(self, action: dict) -> None:
        """Send one command and read frames until its ack arrives."""
        self.counter += 1
        cmd = command_for(action, f"c{self.counter}")
        self.actions.append(action)
        self.commands.append(cmd)
        await self.ws.send(json.dumps(cmd))
        while True:
            frame = self._note(await asyncio.wait_for(self.ws.recv(), timeout=30))
            if frame["type"] == "ack" and frame["id"] == cmd["id"]:
                return
            if frame["type"] == "error" and frame.get("id") == cmd["id"]:
                raise RuntimeError(f"command {cmd} rejected: {frame['message']}")

    async def step_until(self, target_us: int) -> None:
        while self.last_t < target_us:
            await self.act({"kind": "step", "n": STEP_N})

    async def drain(self, quiet: float = 1.0) -> None:
        """Collect the frames already queued behind the last ack."""
        while True:
            try:
                self._note(await asyncio.wait_for(self.ws.recv(), timeout=quiet))
            except asyncio.TimeoutError:
                return


def check_fixture(doc: dict) -> None:
    """Fail loudly if the capture is not the session the tests expect."""
    controls = []
    crash_ack_t = None
    for raw in doc["frames"]:
        frame = json.loads(raw)
        if frame["type"] == "trace_batch":
            for line in frame["lines"]:
                parsed = json.loads(line)
                if parsed["type"] == "control":
                    controls.append(parsed)
        elif frame["type"] == "ack":
            cmd = next(c for c in doc["commands"] if c["id"] == frame["id"])
            if cmd["type"] == "crash":
                crash_ack_t = frame["t"]

    ids_sent = [c["id"] for c in doc["commands"]]
    ids_logged = [c["id"] for c in controls]
    if ids_logged != ids_sent:
        raise RuntimeError(f"control lines {len(ids_logged)} != commands {len(ids_sent)}")
    by_id = {c["id"]: c for c in doc["commands"]}
    for line in controls:
        expected = control_form(by_id[line["id"]])
        if line["cmd"] != expected:
            raise RuntimeError(f"control mismatch for {line['id']}: {line['cmd']} != {expected}")

    if crash_ack_t is None:
        raise RuntimeError("no crash command acked")
    windows = []
    for raw in doc["frames"]:
        frame = json.loads(raw)
        if frame["type"] == "metrics":
            report = frame["report"]
            windows.append((report["window_us"], report["availability"]))
    healthy = [a for (w, a) in windows if w[1] <= crash_ack_t and a >= 0.9]
    outage = [a for (w, a) in windows if w[0] >= crash_ack_t and a == 0.0]
    if not healthy:
        raise RuntimeError(f"no healthy window before the crash: {windows}")
    if not outage:
        raise RuntimeError(f"no zero-availability window after the crash: {windows}")

    topo_after_restart = 0
    restart_seen = False
    for raw in doc["frames"]:
        frame = json.loads(raw)
        if frame["type"] == "trace_batch" and any(
            json.loads(l)["type"] == "restart" for l in frame["lines"]
        ):
            restart_seen = True
        if restart_seen and frame["type"] == "topology":
            topo_after_restart += 1
    if topo_after_restart < 3:
        raise RuntimeError("too few topology frames after the restart")
    print(
        f"fixture ok: {len(doc['commands'])} commands, {len(doc['frames'])} frames, "
        f"{len(windows)} metric windows, {len(healthy)} healthy / {len(outage)} outage"
    )


async def capture(port: int, scenario: dict) -> dict:
    async with websockets.connect(f"ws://127.0.0.1:{port}/ws", max_size=None) as ws:
        driver = Driver(ws)
        await driver.act({"kind": "inject", "count": 5})
        await driver.step_until(HEALTHY_UNTIL_US)
        await driver.act({"kind": "crash", "component": MIDDLE_LAYER})
        await driver.step_until(OUTAGE_UNTIL_US)
        await driver.act({"kind": "restart", "component": MIDDLE_LAYER})
        await driver.act({"kind": "inject", "count": 5})
        await driver.step_until(FINAL_UNTIL_US)
        await driver.drain()
        return {
            "scenario": scenario,
            "actions": driver.actions,
            "commands": driver.commands,
            "frames": driver.frames,
        }


def main() -> None:
    port = free_port()
    proc = subprocess.Popen(
        ["stylesim", "serve", str(SCENARIO), "--port", str(port)],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )
    try:
        scenario = wait_ready(port)
        doc = asyncio.run(capture(port, scenario))
    finally:
        proc.terminate()
        proc.wait(timeout=10)
    check_fixture(doc)
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {OUT} ({OUT.stat().st_size} bytes)")


if __name__ == "__main__":
    sys.exit(main())
