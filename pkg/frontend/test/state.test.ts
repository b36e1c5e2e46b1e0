import assert from "node:assert/strict";
import { test } from "node:test";

import { GraphView } from "../src/state.js";
import type { ExpandDelta, GraphDocument } from "../src/types.js";

function doc(nodes: [string, number][], edges: [string, string, boolean][] = []): GraphDocument {
  return {
    nodes: nodes.map(([id, cluster]) => ({
      id, voltage_kv: 138, degree: 0, cluster_size: cluster,
      expandable_fields: cluster > 1 ? [`t_${id}`] : [],
    })),
    edges: edges.map(([a, b, meta]) => ({ a, b, is_meta: meta })),
  };
}

test("view topology is a pure function of the document", () => {
  const view = new GraphView(() => 0);
  const document = doc([["b1", 7], ["x1", 1]], [["b1", "x1", false]]);
  view.applyDocument(document);
  const ids = view.nodes.map((n) => n.id);
  view.applyDocument(document);
  assert.deepEqual(view.nodes.map((n) => n.id), ids);
  assert.deepEqual(view.edges, [{ a: "b1", b: "x1", isMeta: false }]);
});

test("refresh keeps positions for surviving nodes", () => {
  const view = new GraphView(() => 0);
  view.applyDocument(doc([["b1", 7], ["x1", 1]]));
  const node = view.node("b1")!;
  node.x = 123;
  node.y = 456;
  view.rememberPositions();
  view.applyDocument(doc([["b1", 7], ["x1", 1]]));
  assert.equal(view.node("b1")!.x, 123);
  assert.equal(view.node("b1")!.y, 456);
});

test("expanded nodes spawn at the anchor and others pin", () => {
  const view = new GraphView(() => 0);
  view.applyDocument(doc([["b1", 7], ["x1", 1]]));
  const anchor = view.node("b1")!;
  anchor.x = 250;
  anchor.y = 150;
  view.rememberPositions();

  const delta: ExpandDelta = {
    added_nodes: ["b4", "b5"],
    added_edges: [["b1", "b4"], ["b4", "b5"]],
    removed_edges: [],
    anchor: "b1",
  };
  view.applyExpand(delta);
  view.applyDocument(doc(
    [["b1", 1], ["x1", 1], ["b4", 1], ["b5", 1]],
    [["b1", "b4", false], ["b4", "b5", false]]));
  view.applyExpand(delta);

  assert.equal(view.phase, "release");
  assert.equal(view.node("b4")!.x, 250);
  assert.equal(view.node("b5")!.y, 150);
  assert.equal(view.node("b1")!.pinned, true);
  assert.equal(view.node("x1")!.pinned, true);
  assert.equal(view.node("b4")!.pinned, false);

  view.settle();
  assert.equal(view.phase, "settled");
  assert.ok(view.nodes.every((n) => !n.pinned));
});

test("expansion targets include own fields and incident meta-edges", () => {
  const view = new GraphView(() => 0);
  view.applyDocument(doc([["b1", 7], ["x1", 1]], [["b1", "x1", true]]));
  assert.deepEqual(view.targetsFor("b1"), ["t_b1", "e_b1_x1"]);
  assert.deepEqual(view.targetsFor("x1"), ["e_b1_x1"]);
  assert.deepEqual(view.targetsFor("nope"), []);
});

test("positions of vanished nodes are dropped", () => {
  const view = new GraphView(() => 0);
  view.applyDocument(doc([["b1", 1], ["zz", 1]]));
  view.applyDocument(doc([["b1", 1]]));
  view.applyDocument(doc([["b1", 1], ["zz", 1]]));
  // zz came back with a fresh layout slot, not a stale remembered one
  assert.ok(view.node("zz"));
});
