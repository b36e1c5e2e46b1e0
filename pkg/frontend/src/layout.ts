/** Spring/repulsion force layout with pinning and stability detection.
 *
 * Parameters are local constants; pinned nodes never move, and the
 * simulation reports stabilization once the fastest node falls below a
 * speed floor, which drives the two-phase release after expansions.
 */

export interface ViewNode {
  id: string;
  x: number;
  y: number;
  vx: number;
  vy: number;
  pinned: boolean;
  clusterSize: number;
  voltageKv: number;
  degree: number;
  expandableFields: string[];
}

export interface ViewEdge {
  a: string;
  b: string;
  isMeta: boolean;
}

export const SPRING_LENGTH = 90;
export const SPRING_STRENGTH = 0.025;
export const REPULSION = 3200;
export const CENTER_PULL = 0.004;
export const DAMPING = 0.82;
export const STABLE_SPEED = 0.05;
export const MAX_STEP = 12;

export function nodeRadius(node: ViewNode): number {
  return 6 + 3 * Math.sqrt(node.clusterSize);
}

export class ForceLayout {
  private stableTicks = 0;

  /** Advance one tick; returns the fastest unpinned node speed. */
  step(nodes: ViewNode[], edges: ViewEdge[], cx: number, cy: number): number {
    const byId = new Map(nodes.map((n) => [n.id, n]));
    for (let i = 0; i < nodes.length; i++) {
      const a = nodes[i];
      if (a.pinned) continue;
      let fx = (cx - a.x) * CENTER_PULL;
      let fy = (cy - a.y) * CENTER_PULL;
      for (let j = 0; j < nodes.length; j++) {
        if (i === j) continue;
        const b = nodes[j];
        const dx = a.x - b.x;
        const dy = a.y - b.y;
        const d2 = Math.max(dx * dx + dy * dy, 25);
        const f = REPULSION / d2;
        const d = Math.sqrt(d2);
        fx += (dx / d) * f;
        fy += (dy / d) * f;
      }
      a.vx = (a.vx + fx) * DAMPING;
      a.vy = (a.vy + fy) * DAMPING;
    }
    for (const edge of edges) {
      const a = byId.get(edge.a);
      const b = byId.get(edge.b);
      if (!a || !b) continue;
      const dx = b.x - a.x;
      const dy = b.y - a.y;
      const d = Math.max(Math.sqrt(dx * dx + dy * dy), 1e-6);
      const f = SPRING_STRENGTH * (d - SPRING_LENGTH);
      const ux = dx / d;
      const uy = dy / d;
      if (!a.pinned) {
        a.vx += ux * f;
        a.vy += uy * f;
      }
      if (!b.pinned) {
        b.vx -= ux * f;
        b.vy -= uy * f;
      }
    }
    let fastest = 0;
    for (const node of nodes) {
      if (node.pinned) {
        node.vx = 0;
        node.vy = 0;
        continue;
      }
      const speed = Math.hypot(node.vx, node.vy);
      if (speed > MAX_STEP) {
        node.vx *= MAX_STEP / speed;
        node.vy *= MAX_STEP / speed;
      }
      node.x += node.vx;
      node.y += node.vy;
      fastest = Math.max(fastest, Math.min(speed, MAX_STEP));
    }
    this.stableTicks = fastest < STABLE_SPEED ? this.stableTicks + 1 : 0;
    return fastest;
  }

  /** Stable once everything has been slow for a handful of ticks. */
  get stable(): boolean {
    return this.stableTicks >= 5;
  }

  reset(): void {
    this.stableTicks = 0;
  }
}
