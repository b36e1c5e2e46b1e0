/** Browser entry point: canvas rendering and interaction wiring. */

import { ApiError, ServiceClient } from "./api.js";
import { ForceLayout, nodeRadius, ViewNode } from "./layout.js";
import { GraphView } from "./state.js";

const TIER_COLORS: [number, string][] = [
  [345, "#d73027"],
  [230, "#fc8d59"],
  [138, "#4575b4"],
  [69, "#91bfdb"],
];

function tierColor(kv: number): string {
  for (const [floor, color] of TIER_COLORS) {
    if (kv >= floor) return color;
  }
  return "#999999";
}

class App {
  private readonly client: ServiceClient;
  private readonly view = new GraphView();
  private readonly layout = new ForceLayout();
  private readonly canvas: HTMLCanvasElement;
  private readonly ctx: CanvasRenderingContext2D;
  private busy = false;
  private dragging: ViewNode | null = null;

  constructor(base: string) {
    this.client = new ServiceClient(base);
    this.canvas = document.getElementById("graph") as HTMLCanvasElement;
    this.ctx = this.canvas.getContext("2d")!;
    this.canvas.addEventListener("click", (ev) => this.onClick(ev));
    this.canvas.addEventListener("mousedown", (ev) => this.onMouseDown(ev));
    this.canvas.addEventListener("mousemove", (ev) => this.onMouseMove(ev));
    window.addEventListener("mouseup", () => (this.dragging = null));
    document.getElementById("undo")!.addEventListener("click", () => this.onUndo());
    document.getElementById("retry")!.addEventListener("click", () => this.refresh());
    window.addEventListener("resize", () => this.resize());
    this.resize();
    void this.refresh();
    requestAnimationFrame(() => this.tick());
  }

  private resize(): void {
    this.canvas.width = this.canvas.clientWidth;
    this.canvas.height = this.canvas.clientHeight;
  }

  private banner(text: string | null): void {
    const el = document.getElementById("banner")!;
    el.style.display = text ? "flex" : "none";
    document.getElementById("banner-text")!.textContent = text ?? "";
  }

  private async refresh(): Promise<void> {
    try {
      const doc = await this.client.network();
      this.view.rememberPositions();
      this.view.applyDocument(doc, this.canvas.width, this.canvas.height);
      this.layout.reset();
      this.banner(null);
      await this.updateStats();
    } catch (err) {
      this.banner(err instanceof ApiError && err.kind === "unreachable"
        ? "Exploration service unreachable."
        : `Error: ${(err as Error).message}`);
    }
  }

  private async updateStats(): Promise<void> {
    const stats = await this.client.stats();
    const current = stats.stages[stats.stages.length - 1];
    document.getElementById("stats")!.textContent =
      `${current.nodes} nodes · ${current.edges} edges · ` +
      `mean degree ${current.degree_mean.toFixed(2)} · ` +
      `W1 to original ${stats.wasserstein_to_original.toFixed(4)}`;
  }

  private hit(x: number, y: number): ViewNode | null {
    for (let i = this.view.nodes.length - 1; i >= 0; i--) {
      const node = this.view.nodes[i];
      if (Math.hypot(node.x - x, node.y - y) <= nodeRadius(node) + 2) {
        return node;
      }
    }
    return null;
  }

  private canvasPoint(ev: MouseEvent): { x: number; y: number } {
    const rect = this.canvas.getBoundingClientRect();
    return { x: ev.clientX - rect.left, y: ev.clientY - rect.top };
  }

  private onMouseDown(ev: MouseEvent): void {
    const { x, y } = this.canvasPoint(ev);
    this.dragging = this.hit(x, y);
  }

  private onMouseMove(ev: MouseEvent): void {
    if (!this.dragging) return;
    const { x, y } = this.canvasPoint(ev);
    this.dragging.x = x;
    this.dragging.y = y;
    this.dragging.vx = 0;
    this.dragging.vy = 0;
  }

  private async onClick(ev: MouseEvent): Promise<void> {
    if (this.busy) return;
    const { x, y } = this.canvasPoint(ev);
    const node = this.hit(x, y);
    if (!node) return;
    const targets = this.view.targetsFor(node.id);
    if (!targets.length) return;
    await this.expandChain([targets[0]]);
  }

  /** Expand a target; on a dependency conflict offer the one-click chain. */
  private async expandChain(queue: string[], depth = 0): Promise<void> {
    if (depth > 32 || !queue.length) return;
    const target = queue[queue.length - 1];
    this.busy = true;
    try {
      const delta = await this.client.expand(target);
      this.view.applyExpand(delta);
      const doc = await this.client.network();
      this.view.rememberPositions();
      this.view.applyDocument(doc, this.canvas.width, this.canvas.height);
      // re-apply the release pinning that applyDocument reset
      this.view.applyExpand(delta);
      this.layout.reset();
      await this.updateStats();
      queue.pop();
      if (queue.length) await this.expandChain(queue, depth + 1);
    } catch (err) {
      if (err instanceof ApiError && err.kind === "dependency") {
        const go = window.confirm(
          `"${target}" needs these expanded first:\n  ${err.prerequisites.join("\n  ")}\n\nExpand the chain?`);
        if (go) {
          await this.expandChain([...queue, ...err.prerequisites], depth + 1);
        }
      } else {
        this.banner(`Error: ${(err as Error).message}`);
      }
    } finally {
      this.busy = false;
    }
  }

  private async onUndo(): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    try {
      await this.client.undo();
      await this.refresh();
    } catch (err) {
      if (!(err instanceof ApiError && err.status === 409)) {
        this.banner(`Error: ${(err as Error).message}`);
      }
    } finally {
      this.busy = false;
    }
  }

  private tick(): void {
    this.layout.step(this.view.nodes, this.view.edges,
                     this.canvas.width / 2, this.canvas.height / 2);
    if (this.layout.stable) this.view.settle();
    this.draw();
    requestAnimationFrame(() => this.tick());
  }

  private draw(): void {
    const ctx = this.ctx;
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
    const byId = new Map(this.view.nodes.map((n) => [n.id, n]));
    for (const edge of this.view.edges) {
      const a = byId.get(edge.a);
      const b = byId.get(edge.b);
      if (!a || !b) continue;
      ctx.beginPath();
      ctx.moveTo(a.x, a.y);
      ctx.lineTo(b.x, b.y);
      ctx.strokeStyle = edge.isMeta ? "#b07aa1" : "#bbbbbb";
      ctx.lineWidth = edge.isMeta ? 2.5 : 1;
      ctx.setLineDash(edge.isMeta ? [6, 4] : []);
      ctx.stroke();
    }
    ctx.setLineDash([]);
    for (const node of this.view.nodes) {
      const r = nodeRadius(node);
      ctx.beginPath();
      ctx.arc(node.x, node.y, r, 0, 2 * Math.PI);
      ctx.fillStyle = tierColor(node.voltageKv);
      ctx.fill();
      const expandable = this.view.targetsFor(node.id).length > 0;
      ctx.strokeStyle = expandable ? "#333333" : "#cccccc";
      ctx.lineWidth = expandable ? 2 : 1;
      ctx.stroke();
      if (node.clusterSize > 1) {
        ctx.fillStyle = "#ffffff";
        ctx.font = "10px sans-serif";
        ctx.textAlign = "center";
        ctx.textBaseline = "middle";
        ctx.fillText(String(node.clusterSize), node.x, node.y);
      }
    }
  }
}

const params = new URLSearchParams(window.location.search);
new App(params.get("service") ?? "http://127.0.0.1:8080");
