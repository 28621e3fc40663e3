"use strict";
Object.defineProperty(exports, "__esModule", { value: true });
exports.loadFixture = loadFixture;
const node_fs_1 = require("node:fs");
const node_path_1 = require("node:path");
// Compiled tests run from dist-test/test/, fixtures stay in test/fixtures/.
const FIXTURES = (0, node_path_1.join)(__dirname, "..", "..", "test", "fixtures");
function loadFixture(name) {
    return JSON.parse((0, node_fs_1.readFileSync)((0, node_path_1.join)(FIXTURES, name), "utf-8"));
}
