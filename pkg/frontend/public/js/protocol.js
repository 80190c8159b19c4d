// Wire types for the live session: frames the server streams over /ws,
// commands the conductor sends back, and the JSONL trace lines carried
// inside trace_batch frames. Mirrors the schema served at GET /schema.
export class MalformedFrame extends Error {
}
function isObject(v) {
    return typeof v === "object" && v !== null && !Array.isArray(v);
}
function fail(reason) {
    throw new MalformedFrame(reason);
}
export function parseTraceLine(raw) {
    let doc;
    try {
        doc = JSON.parse(raw);
    }
    catch {
        fail(`trace line is not JSON: ${raw.slice(0, 80)}`);
    }
    if (!isObject(doc))
        fail("trace line is not an object");
    const { t, seq, type, comp, ...payload } = doc;
    if (typeof t !== "number" || typeof seq !== "number")
        fail("trace line lacks t/seq");
    if (typeof type !== "string" || typeof comp !== "string")
        fail("trace line lacks type/comp");
    return { t, seq, type, comp, payload };
}
export function parseFrame(raw) {
    let doc;
    try {
        doc = JSON.parse(raw);
    }
    catch {
        fail("frame is not JSON");
    }
    if (!isObject(doc))
        fail("frame is not an object");
    switch (doc.type) {
        case "trace_batch": {
            const lines = doc.lines;
            if (!Array.isArray(lines) || !lines.every((l) => typeof l === "string")) {
                fail("trace_batch lines must be strings");
            }
            return { type: "trace_batch", lines: lines };
        }
        case "metrics": {
            const report = doc.report;
            if (!isObject(report))
                fail("metrics frame lacks report");
            if (typeof report.availability !== "number" || typeof report.throughput_rps !== "number") {
                fail("metrics report lacks availability/throughput");
            }
            return { type: "metrics", report: report };
        }
        case "topology": {
            const { t, nodes, edges } = doc;
            if (typeof t !== "number" || !Array.isArray(nodes) || !Array.isArray(edges)) {
                fail("topology frame lacks t/nodes/edges");
            }
            for (const n of nodes) {
                if (!isObject(n) || typeof n.ordinal !== "number" || typeof n.name !== "string"
                    || typeof n.role !== "string" || typeof n.alive !== "boolean" || !isObject(n.state)) {
                    fail("topology node malformed");
                }
            }
            for (const e of edges) {
                if (!isObject(e) || typeof e.from !== "number" || typeof e.to !== "number") {
                    fail("topology edge malformed");
                }
            }
            return {
                type: "topology",
                t,
                nodes: nodes,
                edges: edges,
            };
        }
        case "ack": {
            if (typeof doc.id !== "string" || typeof doc.t !== "number")
                fail("ack frame malformed");
            return { type: "ack", id: doc.id, t: doc.t };
        }
        case "error": {
            if (typeof doc.message !== "string")
                fail("error frame lacks message");
            const id = doc.id;
            if (id !== null && typeof id !== "string")
                fail("error frame id malformed");
            return { type: "error", id: id ?? null, message: doc.message };
        }
        default:
            fail(`unknown frame type ${String(doc.type)}`);
    }
}
// The engine records each command in the trace as a control line whose
// cmd payload uses op/target vocabulary. This is the correspondence, used
// to render the log and to check emitted commands against the trace.
export function engineForm(cmd) {
    switch (cmd.type) {
        case "pause":
        case "resume":
        case "spawn_worker":
            return { op: cmd.type };
        case "step":
            return { op: "step", n: cmd.n ?? 1 };
        case "set_pace":
            return { op: "set_pace", factor: cmd.factor };
        case "inject": {
            const op = { op: "inject", count: cmd.count ?? 1 };
            if (cmd.client !== undefined)
                op.client = cmd.client;
            if (cmd.service !== undefined)
                op.service = cmd.service;
            return op;
        }
        case "crash":
        case "restart":
        case "stop_worker":
            return { op: cmd.type, target: cmd.component };
        case "set_rate": {
            const op = { op: "set_rate", rps: cmd.rps };
            if (cmd.client !== undefined)
                op.client = cmd.client;
            return op;
        }
        case "toggle_silent_drop":
            return { op: "toggle_silent_drop", target: cmd.peer };
    }
}
