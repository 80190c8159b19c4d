// Turning conductor actions into session commands. Each user action emits
// exactly one command with a fresh id; the id stays pending until the
// matching ack or error frame comes back, which is what drives button
// disabling and inline error placement.
export function buildCommand(action, id) {
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
            const cmd = { type: "inject", id };
            if (action.client !== undefined)
                cmd.client = action.client;
            if (action.service !== undefined)
                cmd.service = action.service;
            if (action.count !== undefined)
                cmd.count = action.count;
            return cmd;
        }
        case "crash":
        case "restart":
        case "stop_worker":
            return { type: action.kind, id, component: action.component };
        case "set_rate": {
            const cmd = {
                type: "set_rate",
                id,
                rps: action.rps,
            };
            if (action.client !== undefined)
                cmd.client = action.client;
            return cmd;
        }
        case "toggle_silent_drop":
            return { type: "toggle_silent_drop", id, peer: action.peer };
    }
}
export class CommandBox {
    constructor(transmit) {
        this.transmit = transmit;
        this.counter = 0;
        this.pending = new Map();
        this.sent = [];
    }
    issue(action) {
        this.counter += 1;
        const cmd = buildCommand(action, `c${this.counter}`);
        this.pending.set(cmd.id, cmd);
        this.sent.push(cmd);
        this.transmit(JSON.stringify(cmd));
        return cmd;
    }
    // ack and error frames both settle the command
    settle(id) {
        this.pending.delete(id);
    }
    isPending(id) {
        return this.pending.has(id);
    }
    pendingOfType(type) {
        for (const cmd of this.pending.values()) {
            if (cmd.type === type)
                return true;
        }
        return false;
    }
    pendingCount() {
        return this.pending.size;
    }
}
