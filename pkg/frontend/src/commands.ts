// Turning conductor actions into session commands. Each user action emits
// exactly one command with a fresh id; the id stays pending until the
// matching ack or error frame comes back, which is what drives button
// disabling and inline error placement.

import type { SessionCommand } from "./protocol.js";

export type ConductorAction =
  | { kind: "pause" }
  | { kind: "resume" }
  | { kind: "spawn_worker" }
  | { kind: "step"; n?: number }
  | { kind: "set_pace"; factor: number }
  | { kind: "inject"; client?: string; service?: string; count?: number }
  | { kind: "crash"; component: string }
  | { kind: "restart"; component: string }
  | { kind: "stop_worker"; component: string }
  | { kind: "set_rate"; client?: string; rps: number }
  | { kind: "toggle_silent_drop"; peer: string };

export function buildCommand(action: ConductorAction, id: string): SessionCommand {
  switch (action.kind) {
    case "pause":
    case "resume":
    case "spawn_worker":
      return { type: action.kind, id };
    case "step":
      return action.n === undefined ? { type: "step", id } : { type: "step", id, n: action.n };
    case "set_pace":
      return { type: "set_pace", id, factor: action.factor };
    case "inject": {
      const cmd: Extract<SessionCommand, { type: "inject" }> = { type: "inject", id };
      if (action.client !== undefined) cmd.client = action.client;
      if (action.service !== undefined) cmd.service = action.service;
      if (action.count !== undefined) cmd.count = action.count;
      return cmd;
    }
    case "crash":
    case "restart":
    case "stop_worker":
      return { type: action.kind, id, component: action.component };
    case "set_rate": {
      const cmd: Extract<SessionCommand, { type: "set_rate" }> = {
        type: "set_rate",
        id,
        rps: action.rps,
      };
      if (action.client !== undefined) cmd.client = action.client;
      return cmd;
    }
    case "toggle_silent_drop":
      return { type: "toggle_silent_drop", id, peer: action.peer };
  }
}

export class CommandBox {
  private counter = 0;
  private pending = new Map<string, SessionCommand>();
  readonly sent: SessionCommand[] = [];

  constructor(private readonly transmit: (text: string) => void) {}

  issue(action: ConductorAction): SessionCommand {
    this.counter += 1;
    const cmd = buildCommand(action, `c${this.counter}`);
    this.pending.set(cmd.id, cmd);
    this.sent.push(cmd);
    this.transmit(JSON.stringify(cmd));
    return cmd;
  }

  // ack and error frames both settle the command
  settle(id: string): void {
    this.pending.delete(id);
  }

  isPending(id: string): boolean {
    return this.pending.has(id);
  }

  pendingOfType(type: SessionCommand["type"]): boolean {
    for (const cmd of this.pending.values()) {
      if (cmd.type === type) return true;
    }
    return false;
  }

  pendingCount(): number {
    return this.pending.size;
  }
}
