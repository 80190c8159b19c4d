// Node placement, fixed per style so a given scenario always renders the
// same picture: layered chains stack vertically, pipelines run left to
// right, the lookup and pool styles are radial stars, and overlays get a
// seeded force layout. Coordinates are in a unit square; the renderer
// scales them to pixels.

import type { TopologyEdge, TopologyNode } from "./protocol.js";

export interface Point {
  x: number;
  y: number;
}

export type Positions = Map<number, Point>;

function spread(i: number, n: number, lo = 0.08, hi = 0.92): number {
  if (n <= 1) return (lo + hi) / 2;
  return lo + (i * (hi - lo)) / (n - 1);
}

function byRole(nodes: TopologyNode[]): Map<string, TopologyNode[]> {
  const groups = new Map<string, TopologyNode[]>();
  for (const node of nodes) {
    const list = groups.get(node.role) ?? [];
    list.push(node);
    groups.set(node.role, list);
  }
  for (const list of groups.values()) list.sort((a, b) => a.ordinal - b.ordinal);
  return groups;
}

function layeredLayout(nodes: TopologyNode[]): Positions {
  const pos: Positions = new Map();
  const groups = byRole(nodes);
  const clients = groups.get("client") ?? [];
  const layers = groups.get("layer") ?? [];
  clients.forEach((c, i) => pos.set(c.ordinal, { x: spread(i, clients.length), y: 0.08 }));
  layers.forEach((l, i) =>
    pos.set(l.ordinal, { x: 0.5, y: 0.25 + (i * 0.65) / Math.max(1, layers.length - 1) }),
  );
  if (layers.length === 1) pos.set(layers[0]!.ordinal, { x: 0.5, y: 0.55 });
  return pos;
}

function pipelineLayout(nodes: TopologyNode[]): Positions {
  const pos: Positions = new Map();
  const groups = byRole(nodes);
  const clients = groups.get("client") ?? [];
  const stages = (groups.get("filter") ?? []).concat(groups.get("sink") ?? []);
  clients.forEach((c, i) => pos.set(c.ordinal, { x: 0.06, y: spread(i, clients.length) }));
  stages.forEach((s, i) =>
    pos.set(s.ordinal, { x: 0.18 + (i * 0.76) / Math.max(1, stages.length - 1), y: 0.5 }),
  );
  return pos;
}

function starLayout(nodes: TopologyNode[], hubRole: string): Positions {
  const pos: Positions = new Map();
  const groups = byRole(nodes);
  const hubs = groups.get(hubRole) ?? [];
  const rest = nodes.filter((n) => n.role !== hubRole);
  hubs.forEach((h, i) => pos.set(h.ordinal, { x: spread(i, hubs.length, 0.35, 0.65), y: 0.5 }));
  rest.sort((a, b) => a.ordinal - b.ordinal);
  rest.forEach((n, i) => {
    const angle = (2 * Math.PI * i) / rest.length - Math.PI / 2;
    pos.set(n.ordinal, { x: 0.5 + 0.38 * Math.cos(angle), y: 0.5 + 0.38 * Math.sin(angle) });
  });
  return pos;
}

// Deterministic PRNG so the force layout lands identically every render.
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function forceLayout(nodes: TopologyNode[], edges: TopologyEdge[]): Positions {
  const pos: Positions = new Map();
  const rng = mulberry32(0x5eed);
  const order = [...nodes].sort((a, b) => a.ordinal - b.ordinal);
  for (const n of order) {
    pos.set(n.ordinal, { x: 0.2 + 0.6 * rng(), y: 0.2 + 0.6 * rng() });
  }
  const ids = order.map((n) => n.ordinal);
  const spring = 0.28;
  for (let iter = 0; iter < 120; iter++) {
    const next = new Map<number, Point>();
    for (const id of ids) {
      const p = pos.get(id)!;
      let fx = 0;
      let fy = 0;
      for (const other of ids) {
        if (other === id) continue;
        const q = pos.get(other)!;
        const dx = p.x - q.x;
        const dy = p.y - q.y;
        const d2 = Math.max(1e-4, dx * dx + dy * dy);
        fx += (0.004 * dx) / d2;
        fy += (0.004 * dy) / d2;
      }
      for (const e of edges) {
        let other: number | null = null;
        if (e.from === id) other = e.to;
        else if (e.to === id) other = e.from;
        if (other === null || !pos.has(other)) continue;
        const q = pos.get(other)!;
        const dx = q.x - p.x;
        const dy = q.y - p.y;
        const d = Math.sqrt(dx * dx + dy * dy) || 1e-3;
        const pull = 0.02 * (d - spring);
        fx += (pull * dx) / d;
        fy += (pull * dy) / d;
      }
      fx += 0.01 * (0.5 - p.x);
      fy += 0.01 * (0.5 - p.y);
      next.set(id, {
        x: Math.min(0.95, Math.max(0.05, p.x + fx)),
        y: Math.min(0.95, Math.max(0.05, p.y + fy)),
      });
    }
    for (const [id, p] of next) pos.set(id, p);
  }
  return pos;
}

export function layoutPositions(
  style: string,
  nodes: TopologyNode[],
  edges: TopologyEdge[],
): Positions {
  switch (style) {
    case "layered":
      return layeredLayout(nodes);
    case "pipeline":
      return pipelineLayout(nodes);
    case "client_server":
      return starLayout(nodes, "directory");
    case "leader_follower":
      return starLayout(nodes, "leader");
    case "p2p":
      return forceLayout(nodes, edges);
    default: {
      // unknown style: ring everything so nothing overlaps
      const pos: Positions = new Map();
      const order = [...nodes].sort((a, b) => a.ordinal - b.ordinal);
      order.forEach((n, i) => {
        const angle = (2 * Math.PI * i) / order.length;
        pos.set(n.ordinal, { x: 0.5 + 0.4 * Math.cos(angle), y: 0.5 + 0.4 * Math.sin(angle) });
      });
      return pos;
    }
  }
}
