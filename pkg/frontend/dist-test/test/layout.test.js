import assert from "node:assert/strict";
import { test } from "node:test";
import { ForceLayout, SPRING_LENGTH, STABLE_SPEED, nodeRadius, } from "../src/layout.js";
function mkNode(id, x, y, pinned = false) {
    return { id, x, y, vx: 0, vy: 0, pinned, clusterSize: 1, voltageKv: 138,
        degree: 0, expandableFields: [] };
}
test("pinned nodes never move", () => {
    const layout = new ForceLayout();
    const pinned = mkNode("a", 100, 100, true);
    const free = mkNode("b", 110, 100);
    const edges = [{ a: "a", b: "b", isMeta: false }];
    for (let i = 0; i < 200; i++) {
        layout.step([pinned, free], edges, 400, 300);
    }
    assert.equal(pinned.x, 100);
    assert.equal(pinned.y, 100);
    assert.notEqual(free.x, 110);
});
test("a two-node spring settles near its rest length", () => {
    const layout = new ForceLayout();
    const a = mkNode("a", 380, 300);
    const b = mkNode("b", 420, 300);
    const edges = [{ a: "a", b: "b", isMeta: false }];
    for (let i = 0; i < 2000 && !layout.stable; i++) {
        layout.step([a, b], edges, 400, 300);
    }
    assert.ok(layout.stable, "layout should stabilize");
    const dist = Math.hypot(a.x - b.x, a.y - b.y);
    // center pull squeezes the spring slightly; generous envelope
    assert.ok(dist > SPRING_LENGTH * 0.5 && dist < SPRING_LENGTH * 1.5, `distance ${dist} far from rest length ${SPRING_LENGTH}`);
});
test("stability flag needs several consecutive slow ticks", () => {
    const layout = new ForceLayout();
    const a = mkNode("a", 400, 300, true);
    assert.equal(layout.stable, false);
    for (let i = 0; i < 4; i++) {
        const speed = layout.step([a], [], 400, 300);
        assert.ok(speed < STABLE_SPEED);
    }
    assert.equal(layout.stable, false);
    layout.step([a], [], 400, 300);
    assert.equal(layout.stable, true);
    layout.reset();
    assert.equal(layout.stable, false);
});
test("repulsion separates coincident free nodes", () => {
    const layout = new ForceLayout();
    const a = mkNode("a", 400, 300);
    const b = mkNode("b", 401, 300);
    for (let i = 0; i < 50; i++) {
        layout.step([a, b], [], 400, 300);
    }
    assert.ok(Math.hypot(a.x - b.x, a.y - b.y) > 20);
});
test("node radius grows with cluster size", () => {
    const single = mkNode("a", 0, 0);
    const cluster = { ...mkNode("b", 0, 0), clusterSize: 16 };
    assert.ok(nodeRadius(cluster) > nodeRadius(single));
});
