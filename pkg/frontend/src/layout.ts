// Deterministic force-directed layout. Seeded positions, a fixed number of
// iterations, no randomness after initialization: the same graph document
// always lays out identically. Rendering is capped; neighborhoods of a
// focus node can be expanded on demand.

import type { GraphDocument, GraphEdge, GraphNode } from "./types.js";

export const MAX_RENDERED_NODES = 2000;

export interface PlacedNode {
  node: GraphNode;
  x: number;
  y: number;
}

export interface Layout {
  placed: PlacedNode[];
  edges: { from: string; to: string; label: string }[];
  truncated: boolean;
}

function keyOf(node: { kind: string; key: string }): string {
  return `${node.kind}:${node.key}`;
}

/** Small deterministic PRNG (mulberry32). */
function rng(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** Pick the rendered subset: highest-degree nodes first, stable order. */
export function selectNodes(graph: GraphDocument, cap = MAX_RENDERED_NODES): GraphNode[] {
  if (graph.nodes.length <= cap) return [...graph.nodes];
  const degree = new Map<string, number>();
  for (const edge of graph.edges) {
    degree.set(keyOf(edge.from), (degree.get(keyOf(edge.from)) ?? 0) + 1);
    degree.set(keyOf(edge.to), (degree.get(keyOf(edge.to)) ?? 0) + 1);
  }
  return [...graph.nodes]
    .sort((a, b) => {
      const d = (degree.get(keyOf(b)) ?? 0) - (degree.get(keyOf(a)) ?? 0);
      return d !== 0 ? d : keyOf(a) < keyOf(b) ? -1 : 1;
    })
    .slice(0, cap);
}

/** Nodes adjacent to a focus node, for expand-on-demand. */
export function neighborhood(graph: GraphDocument, focusKey: string): Set<string> {
  const out = new Set<string>([focusKey]);
  for (const edge of graph.edges) {
    if (keyOf(edge.from) === focusKey) out.add(keyOf(edge.to));
    if (keyOf(edge.to) === focusKey) out.add(keyOf(edge.from));
  }
  return out;
}

export function computeLayout(
  graph: GraphDocument,
  width = 900,
  height = 600,
  iterations = 60,
  cap = MAX_RENDERED_NODES,
): Layout {
  const nodes = selectNodes(graph, cap);
  const index = new Map<string, number>();
  nodes.forEach((node, i) => index.set(keyOf(node), i));
  const edges = graph.edges.filter(
    (e) => index.has(keyOf(e.from)) && index.has(keyOf(e.to)),
  );

  const random = rng(42);
  const xs = nodes.map(() => random() * width);
  const ys = nodes.map(() => random() * height);
  const n = nodes.length;
  if (n === 0) {
    return { placed: [], edges: [], truncated: graph.nodes.length > cap };
  }

  const area = width * height;
  const k = Math.sqrt(area / n); // ideal spring length
  const pairs: [number, number][] = edges.map((e) => [
    index.get(keyOf(e.from))!,
    index.get(keyOf(e.to))!,
  ]);

  for (let iter = 0; iter < iterations; iter++) {
    const temperature = 0.1 * Math.max(width, height) * (1 - iter / iterations);
    const dx = new Float64Array(n);
    const dy = new Float64Array(n);
    // repulsion
    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        let vx = xs[i] - xs[j];
        let vy = ys[i] - ys[j];
        let dist = Math.hypot(vx, vy);
        if (dist < 1e-9) {
          // deterministic tie-break for coincident points
          vx = 0.01 * ((i % 7) + 1);
          vy = 0.01 * ((j % 5) + 1);
          dist = Math.hypot(vx, vy);
        }
        const force = (k * k) / dist / dist;
        dx[i] += vx * force;
        dy[i] += vy * force;
        dx[j] -= vx * force;
        dy[j] -= vy * force;
      }
    }
    // attraction along edges
    for (const [a, b] of pairs) {
      const vx = xs[a] - xs[b];
      const vy = ys[a] - ys[b];
      const dist = Math.max(Math.hypot(vx, vy), 1e-9);
      const force = dist / k;
      dx[a] -= (vx / dist) * force * k * 0.05;
      dy[a] -= (vy / dist) * force * k * 0.05;
      dx[b] += (vx / dist) * force * k * 0.05;
      dy[b] += (vy / dist) * force * k * 0.05;
    }
    for (let i = 0; i < n; i++) {
      const step = Math.hypot(dx[i], dy[i]);
      if (step > 0) {
        const capStep = Math.min(step, temperature);
        xs[i] += (dx[i] / step) * capStep;
        ys[i] += (dy[i] / step) * capStep;
      }
      xs[i] = Math.min(width - 10, Math.max(10, xs[i]));
      ys[i] = Math.min(height - 10, Math.max(10, ys[i]));
    }
  }

  return {
    placed: nodes.map((node, i) => ({ node, x: xs[i], y: ys[i] })),
    edges: edges.map((e) => ({ from: keyOf(e.from), to: keyOf(e.to), label: e.label })),
    truncated: graph.nodes.length > cap,
  };
}

export function edgesOf(graph: GraphDocument, nodeKey: string): GraphEdge[] {
  return graph.edges.filter(
    (e) => keyOf(e.from) === nodeKey || keyOf(e.to) === nodeKey,
  );
}
