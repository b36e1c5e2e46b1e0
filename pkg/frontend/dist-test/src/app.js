/** Browser entry point: canvas rendering and interaction wiring. */
import { ApiError, ServiceClient } from "./api.js";
import { ForceLayout, nodeRadius } from "./layout.js";
import { GraphView } from "./state.js";
const TIER_COLORS = [
    [345, "#d73027"],
    [230, "#fc8d59"],
    [138, "#4575b4"],
    [69, "#91bfdb"],
];
function tierColor(kv) {
    for (const [floor, color] of TIER_COLORS) {
        if (kv >= floor)
            return color;
    }
    return "#999999";
}
class App {
    constructor(base) {
        this.view = new GraphView();
        this.layout = new ForceLayout();
        this.busy = false;
        this.dragging = null;
        this.client = new ServiceClient(base);
        this.canvas = document.getElementById("graph");
        this.ctx = this.canvas.getContext("2d");
        this.canvas.addEventListener("click", (ev) => this.onClick(ev));
        this.canvas.addEventListener("mousedown", (ev) => this.onMouseDown(ev));
        this.canvas.addEventListener("mousemove", (ev) => this.onMouseMove(ev));
        window.addEventListener("mouseup", () => (this.dragging = null));
        document.getElementById("undo").addEventListener("click", () => this.onUndo());
        document.getElementById("retry").addEventListener("click", () => this.refresh());
        window.addEventListener("resize", () => this.resize());
        this.resize();
        void this.refresh();
        requestAnimationFrame(() => this.tick());
    }
    resize() {
        this.canvas.width = this.canvas.clientWidth;
        this.canvas.height = this.canvas.clientHeight;
    }
    banner(text) {
        const el = document.getElementById("banner");
        el.style.display = text ? "flex" : "none";
        document.getElementById("banner-text").textContent = text ?? "";
    }
    async refresh() {
        try {
            const doc = await this.client.network();
            this.view.rememberPositions();
            this.view.applyDocument(doc, this.canvas.width, this.canvas.height);
            this.layout.reset();
            this.banner(null);
            await this.updateStats();
        }
        catch (err) {
            this.banner(err instanceof ApiError && err.kind === "unreachable"
                ? "Exploration service unreachable."
                : `Error: ${err.message}`);
        }
    }
    async updateStats() {
        const stats = await this.client.stats();
        const current = stats.stages[stats.stages.length - 1];
        document.getElementById("stats").textContent =
            `${current.nodes} nodes · ${current.edges} edges · ` +
                `mean degree ${current.degree_mean.toFixed(2)} · ` +
                `W1 to original ${stats.wasserstein_to_original.toFixed(4)}`;
    }
    hit(x, y) {
        for (let i = this.view.nodes.length - 1; i >= 0; i--) {
            const node = this.view.nodes[i];
            if (Math.hypot(node.x - x, node.y - y) <= nodeRadius(node) + 2) {
                return node;
            }
        }
        return null;
    }
    canvasPoint(ev) {
        const rect = this.canvas.getBoundingClientRect();
        return { x: ev.clientX - rect.left, y: ev.clientY - rect.top };
    }
    onMouseDown(ev) {
        const { x, y } = this.canvasPoint(ev);
        this.dragging = this.hit(x, y);
    }
    onMouseMove(ev) {
        if (!this.dragging)
            return;
        const { x, y } = this.canvasPoint(ev);
        this.dragging.x = x;
        this.dragging.y = y;
        this.dragging.vx = 0;
        this.dragging.vy = 0;
    }
    async onClick(ev) {
        if (this.busy)
            return;
        const { x, y } = this.canvasPoint(ev);
        const node = this.hit(x, y);
        if (!node)
            return;
        const targets = this.view.targetsFor(node.id);
        if (!targets.length)
            return;
        await this.expandChain([targets[0]]);
    }
    /** Expand a target; on a dependency conflict offer the one-click chain. */
    async expandChain(queue, depth = 0) {
        if (depth > 32 || !queue.length)
            return;
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
            if (queue.length)
                await this.expandChain(queue, depth + 1);
        }
        catch (err) {
            if (err instanceof ApiError && err.kind === "dependency") {
                const go = window.confirm(`"${target}" needs these expanded first:\n  ${err.prerequisites.join("\n  ")}\n\nExpand the chain?`);
                if (go) {
                    await this.expandChain([...queue, ...err.prerequisites], depth + 1);
                }
            }
            else {
                this.banner(`Error: ${err.message}`);
            }
        }
        finally {
            this.busy = false;
        }
    }
    async onUndo() {
        if (this.busy)
            return;
        this.busy = true;
        try {
            await this.client.undo();
            await this.refresh();
        }
        catch (err) {
            if (!(err instanceof ApiError && err.status === 409)) {
                this.banner(`Error: ${err.message}`);
            }
        }
        finally {
            this.busy = false;
        }
    }
    tick() {
        this.layout.step(this.view.nodes, this.view.edges, this.canvas.width / 2, this.canvas.height / 2);
        if (this.layout.stable)
            this.view.settle();
        this.draw();
        requestAnimationFrame(() => this.tick());
    }
    draw() {
        const ctx = this.ctx;
        ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
        const byId = new Map(this.view.nodes.map((n) => [n.id, n]));
        for (const edge of this.view.edges) {
            const a = byId.get(edge.a);
            const b = byId.get(edge.b);
            if (!a || !b)
                continue;
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
