// Browser console for a live session. Every pixel is derived from the
// frame reducer in viewmodel.ts; this module only wires DOM events to
// session commands and repaints whatever the current view model says.

import {
  clearBanner,
  emptyViewModel,
  renderRaw,
  selectNode,
  type NodeView,
  type ViewModel,
} from "./viewmodel.js";
import { CommandBox, type ConductorAction } from "./commands.js";
import { layoutPositions } from "./layout.js";
import { fmtTime, fmtValue, lastValue, seriesPath, type ChartBox } from "./charts.js";
import { roleCard } from "./rolecards.js";
import type { TopologyNode } from "./protocol.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const GRAPH_W = 640;
const GRAPH_H = 440;
const NODE_R = 16;
const CHART: ChartBox = { width: 240, height: 56 };
const LOG_ROWS = 80;

// Minimal socket surface so tests can drive the app without a server.
export interface SocketLike {
  send(data: string): void;
  close(): void;
  addEventListener(type: string, listener: (ev: { data?: unknown }) => void): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface AppDeps {
  doc: Document;
  makeSocket: SocketFactory;
  fetchScenario: () => Promise<Record<string, unknown>>;
  server?: string; // host:port of the session server; defaults to the page host
}

function must<T extends HTMLElement>(doc: Document, id: string): T {
  const el = doc.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

function intInput(doc: Document, id: string, fallback: number): number {
  const v = parseInt(must<HTMLInputElement>(doc, id).value, 10);
  return Number.isFinite(v) && v >= 1 ? v : fallback;
}

function floatInput(doc: Document, id: string, fallback: number): number {
  const v = parseFloat(must<HTMLInputElement>(doc, id).value);
  return Number.isFinite(v) ? v : fallback;
}

// NodeView carries everything the layout needs; adapt it to the topology
// node shape the layout functions take.
function asTopologyNodes(vm: ViewModel): TopologyNode[] {
  return [...vm.nodes.values()].map((n) => ({
    ordinal: n.ordinal,
    name: n.name,
    role: n.role,
    gen: n.gen,
    alive: n.alive,
    state: n.detail,
  }));
}

function logLine(line: { t: number; comp: string; type: string; payload: Record<string, unknown> }): string {
  const extra = Object.keys(line.payload).length ? ` ${JSON.stringify(line.payload)}` : "";
  return `${fmtTime(line.t).padStart(9)}  ${line.comp}  ${line.type}${extra}`;
}

export class ConductorApp {
  vm: ViewModel;
  readonly box: CommandBox;

  // control key -> id of the last command that control issued, and
  // command id -> element id of the inline error slot next to the control
  private readonly lastCmdOf = new Map<string, string>();
  private readonly errorSlotOf = new Map<string, string>();

  constructor(
    private readonly doc: Document,
    private readonly socket: SocketLike,
    style: string,
  ) {
    this.vm = emptyViewModel(style);
    this.box = new CommandBox((text) => this.socket.send(text));
    must(doc, "session-title").textContent = `stylesim ${style}`;
    this.wireToolbar();
    socket.addEventListener("message", (ev) => {
      if (typeof ev.data === "string") this.handleMessage(ev.data);
    });
    socket.addEventListener("close", () => {
      this.vm = { ...this.vm, banner: "connection closed" };
      this.paint();
    });
    this.paint();
  }

  handleMessage(raw: string): void {
    this.vm = renderRaw(this.vm, raw);
    for (const id of this.vm.acks.keys()) {
      if (this.box.isPending(id)) this.box.settle(id);
    }
    for (const id of this.vm.cmdErrors.keys()) {
      if (this.box.isPending(id)) this.box.settle(id);
    }
    this.paint();
  }

  // One user action, one command. The control stays disabled until the
  // session answers with an ack or an error for the issued id.
  issue(control: string, errorSlot: string, action: ConductorAction): void {
    const cmd = this.box.issue(action);
    this.lastCmdOf.set(control, cmd.id);
    this.errorSlotOf.set(cmd.id, errorSlot);
    this.paint();
  }

  private wireToolbar(): void {
    const doc = this.doc;
    const on = (id: string, fn: () => void): void => {
      must<HTMLButtonElement>(doc, id).addEventListener("click", fn);
    };
    on("btn-resume", () => this.issue("btn-resume", "toolbar-error", { kind: "resume" }));
    on("btn-pause", () => this.issue("btn-pause", "toolbar-error", { kind: "pause" }));
    on("btn-step", () =>
      this.issue("btn-step", "toolbar-error", { kind: "step", n: intInput(doc, "step-n", 1) }),
    );
    on("btn-pace", () =>
      this.issue("btn-pace", "toolbar-error", {
        kind: "set_pace",
        factor: floatInput(doc, "pace-factor", 1),
      }),
    );
    on("btn-inject", () =>
      this.issue("btn-inject", "toolbar-error", {
        kind: "inject",
        count: intInput(doc, "inject-count", 1),
      }),
    );
    must<HTMLButtonElement>(doc, "banner-dismiss").addEventListener("click", () => {
      this.vm = clearBanner(this.vm);
      this.paint();
    });
  }

  private controlPending(control: string): boolean {
    const id = this.lastCmdOf.get(control);
    return id !== undefined && this.box.isPending(id);
  }

  // The error shown next to a control is the one for the latest command
  // that control issued; a newer command from the same control replaces it.
  private slotMessage(slot: string): string {
    let msg = "";
    for (const [control, id] of this.lastCmdOf) {
      void control;
      if (this.errorSlotOf.get(id) !== slot) continue;
      const err = this.vm.cmdErrors.get(id);
      if (err !== undefined) msg = err;
    }
    return msg;
  }

  paint(): void {
    this.paintBanner();
    this.paintToolbar();
    this.paintGraph();
    this.paintCharts();
    this.paintLog();
    this.paintRoleCard();
  }

  private paintBanner(): void {
    const banner = must(this.doc, "banner");
    const text = must(this.doc, "banner-text");
    if (this.vm.banner) {
      text.textContent = this.vm.banner;
      banner.classList.remove("hidden");
    } else {
      text.textContent = "";
      banner.classList.add("hidden");
    }
  }

  private paintToolbar(): void {
    must(this.doc, "clock").textContent = `t=${fmtTime(this.vm.now)}`;
    for (const id of ["btn-resume", "btn-pause", "btn-step", "btn-pace", "btn-inject"]) {
      must<HTMLButtonElement>(this.doc, id).disabled = this.controlPending(id);
    }
    must(this.doc, "toolbar-error").textContent = this.slotMessage("toolbar-error");
  }

  private paintGraph(): void {
    const svg = must(this.doc, "graph") as unknown as SVGSVGElement;
    while (svg.firstChild) svg.removeChild(svg.firstChild);
    const positions = layoutPositions(this.vm.style, asTopologyNodes(this.vm), this.vm.edges);
    const px = (x: number): number => x * GRAPH_W;
    const py = (y: number): number => y * GRAPH_H;

    for (const edge of this.vm.edges) {
      const a = positions.get(edge.from);
      const b = positions.get(edge.to);
      if (!a || !b) continue;
      const line = this.doc.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", px(a.x).toFixed(1));
      line.setAttribute("y1", py(a.y).toFixed(1));
      line.setAttribute("x2", px(b.x).toFixed(1));
      line.setAttribute("y2", py(b.y).toFixed(1));
      svg.appendChild(line);
    }

    for (const node of this.vm.nodes.values()) {
      const p = positions.get(node.ordinal);
      if (!p) continue;
      const circle = this.doc.createElementNS(SVG_NS, "circle");
      circle.setAttribute("cx", px(p.x).toFixed(1));
      circle.setAttribute("cy", py(p.y).toFixed(1));
      circle.setAttribute("r", String(NODE_R));
      circle.setAttribute("data-color", node.color);
      circle.setAttribute("data-node", String(node.ordinal));
      if (this.vm.selected === node.ordinal) circle.setAttribute("class", "selected");
      circle.addEventListener("click", () => {
        const next = this.vm.selected === node.ordinal ? null : node.ordinal;
        this.vm = selectNode(this.vm, next);
        this.paint();
      });
      svg.appendChild(circle);

      const label = this.doc.createElementNS(SVG_NS, "text");
      label.setAttribute("x", px(p.x).toFixed(1));
      label.setAttribute("y", (py(p.y) + NODE_R + 12).toFixed(1));
      label.textContent = node.name;
      svg.appendChild(label);

      if (node.queued > 0) {
        const badge = this.doc.createElementNS(SVG_NS, "text");
        badge.setAttribute("class", "badge");
        badge.setAttribute("x", px(p.x).toFixed(1));
        badge.setAttribute("y", (py(p.y) - NODE_R - 5).toFixed(1));
        badge.textContent = `q=${node.queued}`;
        svg.appendChild(badge);
      }
    }
  }

  private paintCharts(): void {
    const panes: Array<[string, string, keyof ViewModel["series"], number | undefined]> = [
      ["chart-availability", "avail-now", "availability", 1],
      ["chart-throughput", "thr-now", "throughput", undefined],
      ["chart-inflight", "inflight-now", "inflight", undefined],
    ];
    for (const [chartId, valueId, key, vMax] of panes) {
      const series = this.vm.series[key];
      const svg = must(this.doc, chartId) as unknown as SVGSVGElement;
      while (svg.firstChild) svg.removeChild(svg.firstChild);
      const d = seriesPath(series, vMax === undefined ? CHART : { ...CHART, vMax });
      if (d) {
        const path = this.doc.createElementNS(SVG_NS, "path");
        path.setAttribute("d", d);
        svg.appendChild(path);
      }
      const last = lastValue(series);
      must(this.doc, valueId).textContent = last === null ? "" : fmtValue(last);
    }
  }

  private paintLog(): void {
    const pre = must(this.doc, "log");
    const tail = this.vm.log.slice(-LOG_ROWS);
    pre.textContent = tail.map(logLine).join("\n");
    pre.scrollTop = pre.scrollHeight;
  }

  private nodeActions(node: NodeView): Array<{ label: string; control: string; action: ConductorAction }> {
    const target = node.baseName;
    const actions: Array<{ label: string; control: string; action: ConductorAction }> = [];
    if (node.alive) {
      actions.push({ label: "crash", control: "act-crash", action: { kind: "crash", component: target } });
    } else {
      actions.push({ label: "restart", control: "act-restart", action: { kind: "restart", component: target } });
    }
    if (node.role === "worker" && node.alive) {
      actions.push({
        label: "stop worker",
        control: "act-stop",
        action: { kind: "stop_worker", component: target },
      });
    }
    if (node.role === "peer" && node.alive) {
      actions.push({
        label: node.color === "silentdrop" ? "stop dropping" : "drop silently",
        control: "act-drop",
        action: { kind: "toggle_silent_drop", peer: target },
      });
    }
    return actions;
  }

  private paintRoleCard(): void {
    const title = must(this.doc, "rolecard-title");
    const body = must(this.doc, "rolecard-body");
    const actionsBox = must(this.doc, "node-actions");
    body.textContent = "";
    actionsBox.textContent = "";
    must(this.doc, "node-error").textContent = this.slotMessage("node-error");

    const node = this.vm.selected === null ? undefined : this.vm.nodes.get(this.vm.selected);
    if (!node) {
      title.textContent = "select a node";
      return;
    }
    const card = roleCard(node.role);
    title.textContent = `${node.name}: ${card.title}`;
    for (const instruction of card.instructions) {
      const li = this.doc.createElement("li");
      li.textContent = instruction;
      body.appendChild(li);
    }
    for (const entry of this.nodeActions(node)) {
      const btn = this.doc.createElement("button");
      btn.type = "button";
      btn.id = entry.control;
      btn.textContent = entry.label;
      btn.disabled = this.controlPending(entry.control);
      btn.addEventListener("click", () => this.issue(entry.control, "node-error", entry.action));
      actionsBox.appendChild(btn);
    }
  }
}

export async function startApp(deps: AppDeps): Promise<ConductorApp> {
  let style = "unknown";
  try {
    const scenario = await deps.fetchScenario();
    if (typeof scenario.style === "string") style = scenario.style;
  } catch {
    // leave the default; the ring layout still draws whatever arrives
  }
  const proto = deps.doc.location?.protocol === "https:" ? "wss" : "ws";
  const host = deps.server || deps.doc.location?.host || "127.0.0.1:8642";
  const socket = deps.makeSocket(`${proto}://${host}/ws`);
  return new ConductorApp(deps.doc, socket, style);
}

