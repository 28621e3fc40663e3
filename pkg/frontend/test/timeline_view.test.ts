import assert from "node:assert/strict";
import { test } from "node:test";

import { ON_CPU_RED, OFF_CPU_BLUE } from "../src/colors.js";
import { bandGeometry, timelineRows } from "../src/timeline_view.js";
import type { Timeline, Tree } from "../src/types.js";
import { loadFixture } from "./fixtures.js";

const tree = loadFixture<Tree>("tree.json");
const timeline101 = loadFixture<Timeline>("timeline_101.json");
const timeline300 = loadFixture<Timeline>("timeline_300.json");

test("golden session renders the exact thread rows", () => {
  const rows = timelineRows(tree);
  assert.deepEqual(
    rows.map((r) => [r.tid, r.label, r.depth, r.kind]),
    [
      [100, "workload", 0, "process"],
      [101, "worker-a", 1, "thread"],
      [102, "worker-b", 1, "thread"],
      [200, "child-prog", 1, "process"], // exec rename shows the latest name
      [300, "child-two", 1, "process"],
    ],
  );
});

test("open-ended and spawn-stack flags surface on rows", () => {
  const rows = timelineRows(tree);
  const byTid = new Map(rows.map((r) => [r.tid, r]));
  assert.equal(byTid.get(100)!.openEnded, true);
  assert.equal(byTid.get(300)!.openEnded, true);
  assert.equal(byTid.get(101)!.openEnded, false);
  assert.equal(byTid.get(100)!.hasSpawnStack, false);
  assert.equal(byTid.get(101)!.hasSpawnStack, true);
  assert.equal(rows.every((r) => !r.implicit), true);
});

test("red/blue segment boundaries land at exact pixels", () => {
  // Session window [0, 10000) over 1000 px: 1 px per 10 ns.
  const bands = bandGeometry(timeline101, 0, 10000, 1000);
  assert.deepEqual(
    bands.map((b) => [b.x0, b.x1, b.state, b.color]),
    [
      [100, 300, "on", ON_CPU_RED],
      [300, 340, "off", OFF_CPU_BLUE],
      [340, 500, "on", ON_CPU_RED],
      [500, 530, "off", OFF_CPU_BLUE],
      [530, 600, "on", ON_CPU_RED],
    ],
  );
});

test("an open-ended thread fills through to session end in red", () => {
  const bands = bandGeometry(timeline300, 0, 10000, 1000);
  assert.deepEqual(bands.map((b) => [b.x0, b.x1, b.state]),
    [[250, 1000, "on"]]);
});

test("bands clip to the visible window", () => {
  const bands = bandGeometry(timeline101, 3000, 5000, 200);
  assert.equal(bands[0].x0, 0);
  assert.equal(bands.at(-1)!.x1, 200);
});

test("bucket timelines map dominant state per bucket", () => {
  const buckets: Timeline = {
    mode: "buckets",
    tid: 1,
    spawn_t: 0,
    exit_t: 100,
    bucket_ns: 50,
    buckets: [
      { index: 0, dominant: "on", on_ns: 40, off_ns: 10 },
      { index: 1, dominant: "off", on_ns: 5, off_ns: 45 },
    ],
    counters: {},
  };
  const bands = bandGeometry(buckets, 0, 100, 100);
  assert.deepEqual(bands.map((b) => [b.x0, b.x1, b.state]),
    [[0, 50, "on"], [50, 100, "off"]]);
});
