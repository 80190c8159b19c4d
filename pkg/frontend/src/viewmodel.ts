// Pure view model over session frames. Everything on screen is derived
// from frames through renderFrame; the UI never predicts simulation state,
// it only maps observed lines and snapshots to display state through the
// static tables below.

import {
  MalformedFrame,
  parseFrame,
  parseTraceLine,
  type MetricsReport,
  type SessionFrame,
  type TopologyEdge,
  type TraceLine,
} from "./protocol.js";

export type NodeColor = "idle" | "processing" | "blocked" | "down" | "silentdrop";

export interface NodeView {
  ordinal: number;
  name: string;
  baseName: string;
  role: string;
  gen: number;
  alive: boolean;
  color: NodeColor;
  queued: number;
  outstanding: number;
  detail: Record<string, unknown>;
}

export interface SeriesPoint {
  t: number;
  v: number;
}

export interface MetricsSeries {
  throughput: SeriesPoint[];
  availability: SeriesPoint[];
  inflight: SeriesPoint[];
}

export interface ViewModel {
  style: string;
  now: number;
  nodes: Map<number, NodeView>;
  edges: TopologyEdge[];
  log: TraceLine[];
  series: MetricsSeries;
  lastReport: MetricsReport | null;
  banner: string | null;
  acks: Map<string, number>;
  cmdErrors: Map<string, string>;
  selected: number | null;
}

export const LOG_CAP = 200;
export const SERIES_CAP = 600;

export function emptyViewModel(style: string): ViewModel {
  return {
    style,
    now: 0,
    nodes: new Map(),
    edges: [],
    log: [],
    series: { throughput: [], availability: [], inflight: [] },
    lastReport: null,
    banner: null,
    acks: new Map(),
    cmdErrors: new Map(),
    selected: null,
  };
}

function baseName(name: string): string {
  const at = name.indexOf("@");
  return at < 0 ? name : name.slice(0, at);
}

// Display state implied by a topology snapshot. Snapshots are authoritative
// for the fields they carry; roles whose snapshot has no busy indicator
// (directory, leader, sink, peer) keep their trace-tracked activity.
export function snapshotColor(
  role: string,
  alive: boolean,
  state: Record<string, unknown>,
  current: NodeColor,
): NodeColor {
  if (!alive) return "down";
  if (state.silent_drop === true) return "silentdrop";
  const mode = state.mode;
  if (typeof mode === "string") {
    if (mode === "await_reply") return "blocked";
    if (mode === "idle") return "idle";
    return "processing"; // proc_in / proc_out / processing
  }
  if (typeof state.busy === "boolean") return state.busy ? "processing" : "idle";
  if (typeof state.outstanding === "number") {
    return state.outstanding > 0 ? "processing" : "idle";
  }
  return current === "down" || current === "silentdrop" ? "idle" : current;
}

function applySnapshotNode(
  vm: ViewModel,
  n: { ordinal: number; name: string; role: string; gen: number; alive: boolean; state: Record<string, unknown> },
): void {
  const prev = vm.nodes.get(n.ordinal);
  const color = snapshotColor(n.role, n.alive, n.state, prev?.color ?? "idle");
  vm.nodes.set(n.ordinal, {
    ordinal: n.ordinal,
    name: n.name,
    baseName: baseName(n.name),
    role: n.role,
    gen: n.gen,
    alive: n.alive,
    color,
    queued: typeof n.state.queued === "number" ? n.state.queued : prev?.queued ?? 0,
    outstanding:
      typeof n.state.outstanding === "number" ? n.state.outstanding : prev?.outstanding ?? 0,
    detail: n.state,
  });
}

function nodeByComp(vm: ViewModel, comp: string): NodeView | undefined {
  const base = baseName(comp);
  for (const node of vm.nodes.values()) {
    if (node.baseName === base) return node;
  }
  return undefined;
}

// One trace line moves at most one node through the static table below.
function applyTraceLine(vm: ViewModel, line: TraceLine): void {
  if (line.t > vm.now) vm.now = line.t;
  vm.log.push(line);
  if (vm.log.length > LOG_CAP) vm.log.splice(0, vm.log.length - LOG_CAP);

  switch (line.type) {
    case "spawn":
    case "restart": {
      const ordinal = line.payload.ordinal as number;
      const role = line.payload.role as string;
      const gen = (line.payload.gen as number) ?? 0;
      const prev = vm.nodes.get(ordinal);
      vm.nodes.set(ordinal, {
        ordinal,
        name: line.comp,
        baseName: baseName(line.comp),
        role,
        gen,
        alive: true,
        color: "idle",
        queued: 0,
        outstanding: 0,
        detail: prev?.detail ?? {},
      });
      return;
    }
    case "crash":
    case "stop": {
      const node = nodeByComp(vm, line.comp);
      if (node) {
        node.alive = false;
        node.color = "down";
      }
      return;
    }
    case "silentdrop": {
      const node = nodeByComp(vm, line.comp);
      if (node) node.color = line.payload.on === true ? "silentdrop" : "idle";
      return;
    }
    case "proc_start": {
      const node = nodeByComp(vm, line.comp);
      if (node && node.color !== "down") node.color = "processing";
      return;
    }
    case "proc_end": {
      const node = nodeByComp(vm, line.comp);
      // layers stay lit until their next send says whether they block
      if (node && node.role !== "layer" && node.color === "processing") node.color = "idle";
      return;
    }
    case "send": {
      const node = nodeByComp(vm, line.comp);
      if (!node || node.role !== "layer" || node.color === "down") return;
      node.color = line.payload.kind === "request" ? "blocked" : "idle";
      return;
    }
    case "defer": {
      const node = nodeByComp(vm, line.comp);
      if (node) node.queued += 1;
      return;
    }
    case "submit": {
      const node = nodeByComp(vm, line.comp);
      if (node) {
        node.outstanding += 1;
        node.color = "processing";
      }
      return;
    }
    case "resolve": {
      const node = nodeByComp(vm, line.comp);
      if (node) {
        node.outstanding = Math.max(0, node.outstanding - 1);
        node.color = node.outstanding > 0 ? "processing" : "idle";
      }
      return;
    }
    default:
      return;
  }
}

function pushPoint(series: SeriesPoint[], point: SeriesPoint): void {
  series.push(point);
  if (series.length > SERIES_CAP) series.splice(0, series.length - SERIES_CAP);
}

function cloned(vm: ViewModel): ViewModel {
  return {
    ...vm,
    nodes: new Map([...vm.nodes].map(([k, v]) => [k, { ...v }])),
    edges: vm.edges,
    log: [...vm.log],
    series: {
      throughput: [...vm.series.throughput],
      availability: [...vm.series.availability],
      inflight: [...vm.series.inflight],
    },
    acks: new Map(vm.acks),
    cmdErrors: new Map(vm.cmdErrors),
  };
}

export function renderFrame(vm: ViewModel, frame: SessionFrame): ViewModel {
  const next = cloned(vm);
  switch (frame.type) {
    case "trace_batch":
      for (const raw of frame.lines) applyTraceLine(next, parseTraceLine(raw));
      return next;
    case "topology": {
      if (frame.t > next.now) next.now = frame.t;
      for (const n of frame.nodes) applySnapshotNode(next, n);
      next.edges = frame.edges;
      return next;
    }
    case "metrics": {
      const r = frame.report;
      const end = r.window_us[1];
      pushPoint(next.series.throughput, { t: end, v: r.throughput_rps });
      pushPoint(next.series.availability, { t: end, v: r.availability });
      pushPoint(next.series.inflight, { t: end, v: r.max_in_flight });
      next.lastReport = r;
      return next;
    }
    case "ack": {
      next.acks.set(frame.id, frame.t);
      next.cmdErrors.delete(frame.id);
      if (frame.t > next.now) next.now = frame.t;
      return next;
    }
    case "error": {
      if (frame.id === null) {
        next.banner = frame.message;
      } else {
        next.cmdErrors.set(frame.id, frame.message);
      }
      return next;
    }
  }
}

// Entry point for raw socket text: malformed input raises the banner and
// leaves the rest of the model untouched.
export function renderRaw(vm: ViewModel, raw: string): ViewModel {
  let frame: SessionFrame;
  try {
    frame = parseFrame(raw);
  } catch (err) {
    if (err instanceof MalformedFrame) {
      return { ...vm, banner: err.message };
    }
    throw err;
  }
  try {
    return renderFrame(vm, frame);
  } catch (err) {
    if (err instanceof MalformedFrame) {
      return { ...vm, banner: err.message };
    }
    throw err;
  }
}

export function selectNode(vm: ViewModel, ordinal: number | null): ViewModel {
  return { ...vm, selected: ordinal };
}

export function clearBanner(vm: ViewModel): ViewModel {
  return { ...vm, banner: null };
}
