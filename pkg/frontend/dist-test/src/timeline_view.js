"use strict";
/** Timeline view-model: hierarchy rows on the left, activity bands on the
 * right. Pure geometry; rendering lives in app.ts. */
Object.defineProperty(exports, "__esModule", { value: true });
exports.displayName = displayName;
exports.timelineRows = timelineRows;
exports.bandGeometry = bandGeometry;
const colors_js_1 = require("./colors.js");
function displayName(node) {
    if (node.names.length === 0)
        return `tid ${node.tid}`;
    return node.names[node.names.length - 1][1];
}
/** Depth-first rows mirroring the tree; a node sharing its parent's pid is
 * a thread, otherwise a process. */
function timelineRows(tree) {
    const rows = [];
    const walk = (node, depth, parentPid) => {
        rows.push({
            tid: node.tid,
            label: displayName(node),
            depth,
            kind: parentPid !== null && node.pid === parentPid ? "thread" : "process",
            implicit: node.implicit,
            openEnded: node.open_ended,
            hasSpawnStack: node.spawn_stack !== null && node.spawn_stack.length > 0,
            spawnT: node.spawn_t,
            exitT: node.exit_t,
        });
        for (const child of node.children)
            walk(child, depth + 1, node.pid);
    };
    for (const root of tree.roots)
        walk(root, 0, null);
    return rows;
}
/** Pixel bands for one thread over the visible window [viewStart, viewEnd). */
function bandGeometry(timeline, viewStart, viewEnd, widthPx) {
    const span = viewEnd - viewStart;
    if (span <= 0 || widthPx <= 0)
        return [];
    const toX = (t) => Math.max(0, Math.min(widthPx, ((t - viewStart) / span) * widthPx));
    const bands = [];
    if (timeline.mode === "segments") {
        for (const seg of timeline.segments) {
            if (seg.end <= viewStart || seg.start >= viewEnd)
                continue;
            bands.push({
                x0: toX(seg.start),
                x1: toX(seg.end),
                state: seg.state,
                color: (0, colors_js_1.activityColor)(seg.state),
                synthetic: seg.synthetic,
            });
        }
        return bands;
    }
    for (const bucket of timeline.buckets) {
        const start = bucket.index * timeline.bucket_ns;
        const end = start + timeline.bucket_ns;
        if (end <= viewStart || start >= viewEnd)
            continue;
        bands.push({
            x0: toX(start),
            x1: toX(end),
            state: bucket.dominant,
            color: (0, colors_js_1.activityColor)(bucket.dominant),
            synthetic: false,
        });
    }
    return bands;
}
