"use strict";
var __importDefault = (this && this.__importDefault) || function (mod) {
    return (mod && mod.__esModule) ? mod : { "default": mod };
};
Object.defineProperty(exports, "__esModule", { value: true });
const strict_1 = __importDefault(require("node:assert/strict"));
const node_test_1 = require("node:test");
const source_view_js_1 = require("../src/source_view.js");
const fixtures_js_1 = require("./fixtures.js");
const spawnstack = (0, fixtures_js_1.loadFixture)("spawnstack_101.json");
const source = (0, fixtures_js_1.loadFixture)("source_spawn.json");
(0, node_test_1.test)("the spawn highlight is the leaf frame's file and line", () => {
    strict_1.default.deepEqual((0, source_view_js_1.spawnHighlight)(spawnstack), { file: "spawn.c", line: 7 });
});
(0, node_test_1.test)("spawn-line highlight lands on the spawning call", () => {
    const target = (0, source_view_js_1.spawnHighlight)(spawnstack);
    const rows = (0, source_view_js_1.annotateSource)(source, [], target.line);
    const highlighted = rows.filter((r) => r.highlighted);
    strict_1.default.equal(highlighted.length, 1);
    strict_1.default.equal(highlighted[0].lineNo, 7);
    strict_1.default.match(highlighted[0].text, /pthread_create/);
});
(0, node_test_1.test)("line values annotate with heat proportional to the maximum", () => {
    const rows = (0, source_view_js_1.annotateSource)(source, [[7, 30], [8, 10]], null);
    const seven = rows[6];
    const eight = rows[7];
    strict_1.default.equal(seven.value, 30);
    strict_1.default.equal(eight.value, 10);
    strict_1.default.ok(seven.heat > eight.heat && eight.heat > 0);
    strict_1.default.equal(rows[0].heat, 0);
    strict_1.default.equal(rows.some((r) => r.highlighted), false);
});
(0, node_test_1.test)("a stack without file/line info yields no highlight target", () => {
    const bare = {
        tid: 1,
        spawn_sid: 9,
        frames: [{ function: "start_thread", file: null, line: null, module: "libc" }],
    };
    strict_1.default.equal((0, source_view_js_1.spawnHighlight)(bare), null);
});
