import assert from "node:assert/strict";
import { test } from "node:test";

import { annotateSource, spawnHighlight } from "../src/source_view.js";
import type { SourceResponse, SpawnStack } from "../src/types.js";
import { loadFixture } from "./fixtures.js";

const spawnstack = loadFixture<SpawnStack>("spawnstack_101.json");
const source = loadFixture<SourceResponse>("source_spawn.json");

test("the spawn highlight is the leaf frame's file and line", () => {
  assert.deepEqual(spawnHighlight(spawnstack), { file: "spawn.c", line: 7 });
});

test("spawn-line highlight lands on the spawning call", () => {
  const target = spawnHighlight(spawnstack)!;
  const rows = annotateSource(source, [], target.line);
  const highlighted = rows.filter((r) => r.highlighted);
  assert.equal(highlighted.length, 1);
  assert.equal(highlighted[0].lineNo, 7);
  assert.match(highlighted[0].text, /pthread_create/);
});

test("line values annotate with heat proportional to the maximum", () => {
  const rows = annotateSource(source, [[7, 30], [8, 10]], null);
  const seven = rows[6];
  const eight = rows[7];
  assert.equal(seven.value, 30);
  assert.equal(eight.value, 10);
  assert.ok(seven.heat > eight.heat && eight.heat > 0);
  assert.equal(rows[0].heat, 0);
  assert.equal(rows.some((r) => r.highlighted), false);
});

test("a stack without file/line info yields no highlight target", () => {
  const bare: SpawnStack = {
    tid: 1,
    spawn_sid: 9,
    frames: [{ function: "start_thread", file: null, line: null, module: "libc" }],
  };
  assert.equal(spawnHighlight(bare), null);
});
