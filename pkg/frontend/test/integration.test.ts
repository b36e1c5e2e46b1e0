/** Round-trip against a real exploration service, when one can be started.
 *
 * Spawns the backend CLI on the repo's toy data: expand via the client,
 * undo, and require the graph document to come back identical, with new
 * nodes anchored where their cluster sat.  Skips when the backend is not
 * installed in the environment.
 */

import assert from "node:assert/strict";
import { spawn, spawnSync } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { test } from "node:test";

import { ServiceClient } from "../src/api.js";
import { GraphView } from "../src/state.js";

// compiled location is frontend/dist-test/test/, so the repo root is 3 up
const REPO = resolve(import.meta.dirname ?? ".", "..", "..", "..");
const PORT = 8765 + (process.pid % 500);

function backendAvailable(): boolean {
  const probe = spawnSync("python3", ["-c", "import gridreduce"], { timeout: 20000 });
  return probe.status === 0;
}

async function waitFor(client: ServiceClient, tries = 50): Promise<void> {
  for (let i = 0; i < tries; i++) {
    try {
      await client.network();
      return;
    } catch {
      await new Promise((r) => setTimeout(r, 100));
    }
  }
  throw new Error("service did not come up");
}

test("expand then undo round-trips through the live service", {
  skip: !backendAvailable() ? "gridreduce backend not installed" : false,
}, async () => {
  const work = mkdtempSync(join(tmpdir(), "gridreduce-ui-"));
  const out = join(work, "out");
  const reduce = spawnSync("python3", [
    "-m", "gridreduce.cli", "reduce",
    "--buses", join(REPO, "data", "toy", "buses.csv"),
    "--lines", join(REPO, "data", "toy", "lines.csv"),
    "--stages", "d1,d2,tri", "--vthr", "none", "--dthr", "6",
    "--seed", "7", "--out-dir", out,
  ], { timeout: 60000 });
  assert.equal(reduce.status, 0, String(reduce.stderr));

  const server = spawn("python3", [
    "-m", "gridreduce.cli", "serve",
    "--net", out, "--ledger", join(out, "ledger.json"), "--port", String(PORT),
  ], { stdio: "ignore" });
  const client = new ServiceClient(`http://127.0.0.1:${PORT}`);
  try {
    await waitFor(client);
    const before = await client.network();
    const view = new GraphView(() => 0);
    view.applyDocument(before);

    const expandable = before.nodes.find((n) => n.expandable_fields.length > 0);
    assert.ok(expandable, "reduced toy network should have an expandable node");
    const anchorNode = view.node(expandable.id)!;
    view.rememberPositions();

    const delta = await client.expand(expandable.expandable_fields[0]);
    assert.equal(delta.anchor, expandable.id);
    assert.ok(delta.added_nodes.length > 0);

    view.applyExpand(delta);
    const mid = await client.network();
    view.applyDocument(mid);
    view.applyExpand(delta);
    for (const added of delta.added_nodes) {
      const spawned = view.node(added)!;
      assert.equal(spawned.x, anchorNode.x);
      assert.equal(spawned.y, anchorNode.y);
    }
    assert.ok(view.nodes.filter((n) => n.pinned).length === before.nodes.length);

    await client.undo();
    const after = await client.network();
    assert.deepEqual(after, before);
  } finally {
    server.kill();
    rmSync(work, { recursive: true, force: true });
  }
});
