"use strict";
/** Code preview view-model: source lines with per-line value annotations
 * and an optional highlighted line (the spawning line for spawn stacks). */
Object.defineProperty(exports, "__esModule", { value: true });
exports.annotateSource = annotateSource;
exports.spawnHighlight = spawnHighlight;
const colors_js_1 = require("./colors.js");
function annotateSource(source, lineValues, highlightLine) {
    const values = new Map(lineValues);
    const max = Math.max(0, ...values.values());
    return source.lines.map((text, i) => {
        const lineNo = i + 1;
        const value = values.get(lineNo) ?? null;
        return {
            lineNo,
            text,
            value,
            heat: value === null ? 0 : (0, colors_js_1.heatAlpha)(value, max),
            highlighted: highlightLine === lineNo,
        };
    });
}
/** The leaf frame of the spawning stack is the spawning point; its line is
 * the one to highlight. */
function spawnHighlight(stack) {
    if (stack.frames.length === 0)
        return null;
    const leaf = stack.frames[0];
    if (leaf.file === null || leaf.line === null)
        return null;
    return { file: leaf.file, line: leaf.line };
}
