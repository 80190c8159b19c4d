// Wire types for the live session: frames the server streams over /ws,
// commands the conductor sends back, and the JSONL trace lines carried
// inside trace_batch frames. Mirrors the schema served at GET /schema.

export interface TraceBatchFrame {
  type: "trace_batch";
  lines: string[];
}

export interface MetricsReport {
  window_us: [number, number];
  throughput_rps: number;
  availability: number;
  latency_p50_us: number | null;
  latency_p95_us: number | null;
  latency_max_us: number | null;
  max_in_flight: number;
  counts: Record<string, number>;
  utilization: Record<string, number>;
}

export interface MetricsFrame {
  type: "metrics";
  report: MetricsReport;
}

export interface TopologyNode {
  ordinal: number;
  name: string;
  role: string;
  gen: number;
  alive: boolean;
  state: Record<string, unknown>;
}

export interface TopologyEdge {
  from: number;
  to: number;
}

export interface TopologyFrame {
  type: "topology";
  t: number;
  nodes: TopologyNode[];
  edges: TopologyEdge[];
}

export interface AckFrame {
  type: "ack";
  id: string;
  t: number;
}

export interface ErrorFrame {
  type: "error";
  id: string | null;
  message: string;
}

export type SessionFrame =
  | TraceBatchFrame
  | MetricsFrame
  | TopologyFrame
  | AckFrame
  | ErrorFrame;

export type SessionCommand =
  | { type: "pause" | "resume" | "spawn_worker"; id: string }
  | { type: "step"; id: string; n?: number }
  | { type: "set_pace"; id: string; factor: number }
  | { type: "inject"; id: string; client?: string; service?: string; count?: number }
  | { type: "crash" | "restart" | "stop_worker"; id: string; component: string }
  | { type: "set_rate"; id: string; client?: string; rps: number }
  | { type: "toggle_silent_drop"; id: string; peer: string };

// Every trace line is one JSON object with this envelope; the remaining
// keys depend on the line type (see TraceLine.payload).
export interface TraceLine {
  t: number;
  seq: number;
  type: string;
  comp: string;
  payload: Record<string, unknown>;
}

export class MalformedFrame extends Error {}

function isObject(v: unknown): v is Record<string, unknown> {
  return typeof v === "object" && v !== null && !Array.isArray(v);
}

function fail(reason: string): never {
  throw new MalformedFrame(reason);
}

export function parseTraceLine(raw: string): TraceLine {
  let doc: unknown;
  try {
    doc = JSON.parse(raw);
  } catch {
    fail(`trace line is not JSON: ${raw.slice(0, 80)}`);
  }
  if (!isObject(doc)) fail("trace line is not an object");
  const { t, seq, type, comp, ...payload } = doc;
  if (typeof t !== "number" || typeof seq !== "number") fail("trace line lacks t/seq");
  if (typeof type !== "string" || typeof comp !== "string") fail("trace line lacks type/comp");
  return { t, seq, type, comp, payload };
}

export function parseFrame(raw: string): SessionFrame {
  let doc: unknown;
  try {
    doc = JSON.parse(raw);
  } catch {
    fail("frame is not JSON");
  }
  if (!isObject(doc)) fail("frame is not an object");
  switch (doc.type) {
    case "trace_batch": {
      const lines = doc.lines;
      if (!Array.isArray(lines) || !lines.every((l) => typeof l === "string")) {
        fail("trace_batch lines must be strings");
      }
      return { type: "trace_batch", lines: lines as string[] };
    }
    case "metrics": {
      const report = doc.report;
      if (!isObject(report)) fail("metrics frame lacks report");
      if (typeof report.availability !== "number" || typeof report.throughput_rps !== "number") {
        fail("metrics report lacks availability/throughput");
      }
      return { type: "metrics", report: report as unknown as MetricsReport };
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
        nodes: nodes as unknown as TopologyNode[],
        edges: edges as unknown as TopologyEdge[],
      };
    }
    case "ack": {
      if (typeof doc.id !== "string" || typeof doc.t !== "number") fail("ack frame malformed");
      return { type: "ack", id: doc.id, t: doc.t };
    }
    case "error": {
      if (typeof doc.message !== "string") fail("error frame lacks message");
      const id = doc.id;
      if (id !== null && typeof id !== "string") fail("error frame id malformed");
      return { type: "error", id: id ?? null, message: doc.message };
    }
    default:
      fail(`unknown frame type ${String(doc.type)}`);
  }
}

// The engine records each command in the trace as a control line whose
// cmd payload uses op/target vocabulary. This is the correspondence, used
// to render the log and to check emitted commands against the trace.
export function engineForm(cmd: SessionCommand): Record<string, unknown> {
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
      const op: Record<string, unknown> = { op: "inject", count: cmd.count ?? 1 };
      if (cmd.client !== undefined) op.client = cmd.client;
      if (cmd.service !== undefined) op.service = cmd.service;
      return op;
    }
    case "crash":
    case "restart":
    case "stop_worker":
      return { op: cmd.type, target: cmd.component };
    case "set_rate": {
      const op: Record<string, unknown> = { op: "set_rate", rps: cmd.rps };
      if (cmd.client !== undefined) op.client = cmd.client;
      return op;
    }
    case "toggle_silent_drop":
      return { op: "toggle_silent_drop", target: cmd.peer };
  }
}
