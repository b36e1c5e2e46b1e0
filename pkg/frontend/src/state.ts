/** View state: the last graph document plus layout positions.
 *
 * Topology always comes straight from the service document, so a refresh
 * reproduces the same graph; positions are the only client-side state.
 * After an expansion the new nodes spawn at their anchor's position and
 * everything that already existed is pinned until the layout stabilizes,
 * then released.
 */

import type { ExpandDelta, GraphDocument } from "./types.js";
import { ViewEdge, ViewNode } from "./layout.js";

export type Phase = "settled" | "release";

export class GraphView {
  nodes: ViewNode[] = [];
  edges: ViewEdge[] = [];
  phase: Phase = "settled";
  private positions = new Map<string, { x: number; y: number }>();
  private spawnJitter: () => number;

  constructor(spawnJitter?: () => number) {
    // deterministic by default so tests can pin spawn positions
    this.spawnJitter = spawnJitter ?? (() => (Math.random() - 0.5) * 8);
  }

  /** Rebuild the view from a service document, keeping known positions. */
  applyDocument(doc: GraphDocument, width = 800, height = 600): void {
    const seen = new Set<string>();
    this.nodes = doc.nodes.map((n, i) => {
      seen.add(n.id);
      const angle = (2 * Math.PI * i) / Math.max(doc.nodes.length, 1);
      const kept = this.positions.get(n.id);
      const x = kept ? kept.x : width / 2 + (width / 4) * Math.cos(angle);
      const y = kept ? kept.y : height / 2 + (height / 4) * Math.sin(angle);
      return {
        id: n.id, x, y, vx: 0, vy: 0, pinned: false,
        clusterSize: n.cluster_size,
        voltageKv: n.voltage_kv,
        degree: n.degree,
        expandableFields: n.expandable_fields,
      };
    });
    for (const key of [...this.positions.keys()]) {
      if (!seen.has(key)) this.positions.delete(key);
    }
    for (const node of this.nodes) {
      this.positions.set(node.id, { x: node.x, y: node.y });
    }
    this.edges = doc.edges.map((e) => ({ a: e.a, b: e.b, isMeta: e.is_meta }));
  }

  /** Seed positions for an expansion delta before refetching the document:
   * new nodes appear at the anchor, existing nodes are pinned. */
  applyExpand(delta: ExpandDelta): void {
    const anchor = delta.anchor ? this.positions.get(delta.anchor) : undefined;
    const at = anchor ?? this.center();
    for (const id of delta.added_nodes) {
      this.positions.set(id, {
        x: at.x + this.spawnJitter(),
        y: at.y + this.spawnJitter(),
      });
    }
    const added = new Set(delta.added_nodes);
    for (const node of this.nodes) {
      node.pinned = !added.has(node.id);
    }
    this.phase = "release";
  }

  /** Called when the layout reports stabilization: unpin everything. */
  settle(): void {
    if (this.phase === "release") {
      for (const node of this.nodes) node.pinned = false;
      this.phase = "settled";
    }
  }

  rememberPositions(): void {
    for (const node of this.nodes) {
      this.positions.set(node.id, { x: node.x, y: node.y });
    }
  }

  node(id: string): ViewNode | undefined {
    return this.nodes.find((n) => n.id === id);
  }

  /** Expansion targets for a node: its own fields plus incident meta-edges. */
  targetsFor(id: string): string[] {
    const node = this.node(id);
    if (!node) return [];
    const targets = [...node.expandableFields];
    for (const edge of this.edges) {
      if (edge.isMeta && (edge.a === id || edge.b === id)) {
        targets.push(`e_${edge.a}_${edge.b}`);
      }
    }
    return targets;
  }

  private center(): { x: number; y: number } {
    if (!this.nodes.length) return { x: 400, y: 300 };
    const sx = this.nodes.reduce((acc, n) => acc + n.x, 0);
    const sy = this.nodes.reduce((acc, n) => acc + n.y, 0);
    return { x: sx / this.nodes.length, y: sy / this.nodes.length };
  }
}
