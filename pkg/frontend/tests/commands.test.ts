import { describe, expect, it } from "vitest";
import { buildCommand, CommandBox, type ConductorAction } from "../src/commands.js";

describe("buildCommand", () => {
  it("builds every action kind", () => {
    expect(buildCommand({ kind: "pause" }, "c1")).toEqual({ type: "pause", id: "c1" });
    expect(buildCommand({ kind: "resume" }, "c1")).toEqual({ type: "resume", id: "c1" });
    expect(buildCommand({ kind: "spawn_worker" }, "c1")).toEqual({ type: "spawn_worker", id: "c1" });
    expect(buildCommand({ kind: "step" }, "c1")).toEqual({ type: "step", id: "c1" });
    expect(buildCommand({ kind: "step", n: 25 }, "c1")).toEqual({ type: "step", id: "c1", n: 25 });
    expect(buildCommand({ kind: "set_pace", factor: 4 }, "c1")).toEqual({
      type: "set_pace",
      id: "c1",
      factor: 4,
    });
    expect(buildCommand({ kind: "crash", component: "layer_1" }, "c1")).toEqual({
      type: "crash",
      id: "c1",
      component: "layer_1",
    });
    expect(buildCommand({ kind: "restart", component: "layer_1" }, "c1")).toEqual({
      type: "restart",
      id: "c1",
      component: "layer_1",
    });
    expect(buildCommand({ kind: "stop_worker", component: "w_0" }, "c1")).toEqual({
      type: "stop_worker",
      id: "c1",
      component: "w_0",
    });
    expect(buildCommand({ kind: "toggle_silent_drop", peer: "peer_2" }, "c1")).toEqual({
      type: "toggle_silent_drop",
      id: "c1",
      peer: "peer_2",
    });
  });

  it("keeps optional fields out of the command unless the action sets them", () => {
    expect(buildCommand({ kind: "inject" }, "c1")).toEqual({ type: "inject", id: "c1" });
    expect(buildCommand({ kind: "inject", count: 5 }, "c1")).toEqual({
      type: "inject",
      id: "c1",
      count: 5,
    });
    expect(
      buildCommand({ kind: "inject", client: "client_0", service: "auth", count: 2 }, "c1"),
    ).toEqual({ type: "inject", id: "c1", client: "client_0", service: "auth", count: 2 });
    expect(buildCommand({ kind: "set_rate", rps: 12 }, "c1")).toEqual({
      type: "set_rate",
      id: "c1",
      rps: 12,
    });
    expect(buildCommand({ kind: "set_rate", rps: 12, client: "client_1" }, "c1")).toEqual({
      type: "set_rate",
      id: "c1",
      rps: 12,
      client: "client_1",
    });
  });
});

describe("CommandBox", () => {
  it("transmits one command per action with fresh sequential ids", () => {
    const sent: string[] = [];
    const box = new CommandBox((text) => sent.push(text));
    const first = box.issue({ kind: "inject", count: 5 });
    const second = box.issue({ kind: "inject", count: 5 });
    const third = box.issue({ kind: "pause" });
    expect(sent).toHaveLength(3);
    expect([first.id, second.id, third.id]).toEqual(["c1", "c2", "c3"]);
    expect(JSON.parse(sent[0]!)).toEqual({ type: "inject", id: "c1", count: 5 });
    expect(JSON.parse(sent[1]!)).toEqual({ type: "inject", id: "c2", count: 5 });
    expect(box.sent.map((c) => c.id)).toEqual(["c1", "c2", "c3"]);
  });

  it("tracks a command as pending until it settles", () => {
    const box = new CommandBox(() => {});
    const cmd = box.issue({ kind: "crash", component: "layer_1" });
    expect(box.isPending(cmd.id)).toBe(true);
    expect(box.pendingOfType("crash")).toBe(true);
    expect(box.pendingCount()).toBe(1);
    box.settle(cmd.id);
    expect(box.isPending(cmd.id)).toBe(false);
    expect(box.pendingOfType("crash")).toBe(false);
    expect(box.pendingCount()).toBe(0);
    box.settle(cmd.id);
    expect(box.pendingCount()).toBe(0);
  });

  it("never reuses an id, even for repeated identical actions", () => {
    const box = new CommandBox(() => {});
    const ids = new Set<string>();
    const action: ConductorAction = { kind: "step", n: 10 };
    for (let i = 0; i < 100; i++) ids.add(box.issue(action).id);
    expect(ids.size).toBe(100);
  });
});
