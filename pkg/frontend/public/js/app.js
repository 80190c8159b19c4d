// Browser console for a live session. Every pixel is derived from the
// frame reducer in viewmodel.ts; this module only wires DOM events to
// session commands and repaints whatever the current view model says.
import { clearBanner, emptyViewModel, renderRaw, selectNode, } from "./viewmodel.js";
import { CommandBox } from "./commands.js";
import { layoutPositions } from "./layout.js";
import { fmtTime, fmtValue, lastValue, seriesPath } from "./charts.js";
import { roleCard } from "./rolecards.js";
const SVG_NS = "http://www.w3.org/2000/svg";
const GRAPH_W = 640;
const GRAPH_H = 440;
const NODE_R = 16;
const CHART = { width: 240, height: 56 };
const LOG_ROWS = 80;
function must(doc, id) {
    const el = doc.getElementById(id);
    if (!el)
        throw new Error(`missing element #${id}`);
    return el;
}
function intInput(doc, id, fallback) {
    const v = parseInt(must(doc, id).value, 10);
    return Number.isFinite(v) && v >= 1 ? v : fallback;
}
function floatInput(doc, id, fallback) {
    const v = parseFloat(must(doc, id).value);
    return Number.isFinite(v) ? v : fallback;
}
// NodeView carries everything the layout needs; adapt it to the topology
// node shape the layout functions take.
function asTopologyNodes(vm) {
    return [...vm.nodes.values()].map((n) => ({
        ordinal: n.ordinal,
        name: n.name,
        role: n.role,
        gen: n.gen,
        alive: n.alive,
        state: n.detail,
    }));
}
function logLine(line) {
    const extra = Object.keys(line.payload).length ? ` ${JSON.stringify(line.payload)}` : "";
    return `${fmtTime(line.t).padStart(9)}  ${line.comp}  ${line.type}${extra}`;
}
export class ConductorApp {
    constructor(doc, socket, style) {
        this.doc = doc;
        this.socket = socket;
        // control key -> id of the last command that control issued, and
        // command id -> element id of the inline error slot next to the control
        this.lastCmdOf = new Map();
        this.errorSlotOf = new Map();
        this.vm = emptyViewModel(style);
        this.box = new CommandBox((text) => this.socket.send(text));
        must(doc, "session-title").textContent = `stylesim ${style}`;
        this.wireToolbar();
        socket.addEventListener("message", (ev) => {
            if (typeof ev.data === "string")
                this.handleMessage(ev.data);
        });
        socket.addEventListener("close", () => {
            this.vm = { ...this.vm, banner: "connection closed" };
            this.paint();
        });
        this.paint();
    }
    handleMessage(raw) {
        this.vm = renderRaw(this.vm, raw);
        for (const id of this.vm.acks.keys()) {
            if (this.box.isPending(id))
                this.box.settle(id);
        }
        for (const id of this.vm.cmdErrors.keys()) {
            if (this.box.isPending(id))
                this.box.settle(id);
        }
        this.paint();
    }
    // One user action, one command. The control stays disabled until the
    // session answers with an ack or an error for the issued id.
    issue(control, errorSlot, action) {
        const cmd = this.box.issue(action);
        this.lastCmdOf.set(control, cmd.id);
        this.errorSlotOf.set(cmd.id, errorSlot);
        this.paint();
    }
    wireToolbar() {
        const doc = this.doc;
        const on = (id, fn) => {
            must(doc, id).addEventListener("click", fn);
        };
        on("btn-resume", () => this.issue("btn-resume", "toolbar-error", { kind: "resume" }));
        on("btn-pause", () => this.issue("btn-pause", "toolbar-error", { kind: "pause" }));
        on("btn-step", () => this.issue("btn-step", "toolbar-error", { kind: "step", n: intInput(doc, "step-n", 1) }));
        on("btn-pace", () => this.issue("btn-pace", "toolbar-error", {
            kind: "set_pace",
            factor: floatInput(doc, "pace-factor", 1),
        }));
        on("btn-inject", () => this.issue("btn-inject", "toolbar-error", {
            kind: "inject",
            count: intInput(doc, "inject-count", 1),
        }));
        must(doc, "banner-dismiss").addEventListener("click", () => {
            this.vm = clearBanner(this.vm);
            this.paint();
        });
    }
    controlPending(control) {
        const id = this.lastCmdOf.get(control);
        return id !== undefined && this.box.isPending(id);
    }
    // The error shown next to a control is the one for the latest command
    // that control issued; a newer command from the same control replaces it.
    slotMessage(slot) {
        let msg = "";
        for (const [control, id] of this.lastCmdOf) {
            void control;
            if (this.errorSlotOf.get(id) !== slot)
                continue;
            const err = this.vm.cmdErrors.get(id);
            if (err !== undefined)
                msg = err;
        }
        return msg;
    }
    paint() {
        this.paintBanner();
        this.paintToolbar();
        this.paintGraph();
        this.paintCharts();
        this.paintLog();
        this.paintRoleCard();
    }
    paintBanner() {
        const banner = must(this.doc, "banner");
        const text = must(this.doc, "banner-text");
        if (this.vm.banner) {
            text.textContent = this.vm.banner;
            banner.classList.remove("hidden");
        }
        else {
            text.textContent = "";
            banner.classList.add("hidden");
        }
    }
    paintToolbar() {
        must(this.doc, "clock").textContent = `t=${fmtTime(this.vm.now)}`;
        for (const id of ["btn-resume", "btn-pause", "btn-step", "btn-pace", "btn-inject"]) {
            must(this.doc, id).disabled = this.controlPending(id);
        }
        must(this.doc, "toolbar-error").textContent = this.slotMessage("toolbar-error");
    }
    paintGraph() {
        const svg = must(this.doc, "graph");
        while (svg.firstChild)
            svg.removeChild(svg.firstChild);
        const positions = layoutPositions(this.vm.style, asTopologyNodes(this.vm), this.vm.edges);
        const px = (x) => x * GRAPH_W;
        const py = (y) => y * GRAPH_H;
        for (const edge of this.vm.edges) {
            const a = positions.get(edge.from);
            const b = positions.get(edge.to);
            if (!a || !b)
                continue;
            const line = this.doc.createElementNS(SVG_NS, "line");
            line.setAttribute("x1", px(a.x).toFixed(1));
            line.setAttribute("y1", py(a.y).toFixed(1));
            line.setAttribute("x2", px(b.x).toFixed(1));
            line.setAttribute("y2", py(b.y).toFixed(1));
            svg.appendChild(line);
        }
        for (const node of this.vm.nodes.values()) {
            const p = positions.get(node.ordinal);
            if (!p)
                continue;
            const circle = this.doc.createElementNS(SVG_NS, "circle");
            circle.setAttribute("cx", px(p.x).toFixed(1));
            circle.setAttribute("cy", py(p.y).toFixed(1));
            circle.setAttribute("r", String(NODE_R));
            circle.setAttribute("data-color", node.color);
            circle.setAttribute("data-node", String(node.ordinal));
            if (this.vm.selected === node.ordinal)
                circle.setAttribute("class", "selected");
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
    paintCharts() {
        const panes = [
            ["chart-availability", "avail-now", "availability", 1],
            ["chart-throughput", "thr-now", "throughput", undefined],
            ["chart-inflight", "inflight-now", "inflight", undefined],
        ];
        for (const [chartId, valueId, key, vMax] of panes) {
            const series = this.vm.series[key];
            const svg = must(this.doc, chartId);
            while (svg.firstChild)
                svg.removeChild(svg.firstChild);
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
    paintLog() {
        const pre = must(this.doc, "log");
        const tail = this.vm.log.slice(-LOG_ROWS);
        pre.textContent = tail.map(logLine).join("\n");
        pre.scrollTop = pre.scrollHeight;
    }
    nodeActions(node) {
        const target = node.baseName;
        const actions = [];
        if (node.alive) {
            actions.push({ label: "crash", control: "act-crash", action: { kind: "crash", component: target } });
        }
        else {
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
    paintRoleCard() {
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
export async function startApp(deps) {
    let style = "unknown";
    try {
        const scenario = await deps.fetchScenario();
        if (typeof scenario.style === "string")
            style = scenario.style;
    }
    catch {
        // leave the default; the ring layout still draws whatever arrives
    }
    const proto = deps.doc.location?.protocol === "https:" ? "wss" : "ws";
    const host = deps.server || deps.doc.location?.host || "127.0.0.1:8642";
    const socket = deps.makeSocket(`${proto}://${host}/ws`);
    return new ConductorApp(deps.doc, socket, style);
}
