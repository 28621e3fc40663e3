"use strict";
/** Flame graph layout: rectangles in fractional coordinates, canvas-ready.
 * Node width is proportional to inclusive value (hot+cold for the
 * walltime graph); children sit above their parent in lexicographic
 * order, exactly as the API emits them. */
Object.defineProperty(exports, "__esModule", { value: true });
exports.totalOf = totalOf;
exports.dominantChannel = dominantChannel;
exports.nodeAt = nodeAt;
exports.highlightTest = highlightTest;
exports.layoutFlame = layoutFlame;
exports.hitTest = hitTest;
exports.searchBadgeText = searchBadgeText;
exports.layoutChron = layoutChron;
exports.chronBounds = chronBounds;
const colors_js_1 = require("./colors.js");
function totalOf(node) {
    if (node.value !== undefined)
        return node.value;
    return (node.hot_ns ?? 0) + (node.cold_ns ?? 0);
}
function dominantChannel(node) {
    return (node.cold_ns ?? 0) > (node.hot_ns ?? 0) ? "cold" : "hot";
}
/** Node reached by following function names below root, or null. */
function nodeAt(root, path) {
    let node = root;
    for (const name of path) {
        const next = node.children.find((c) => c.function === name);
        if (!next)
            return null;
        node = next;
    }
    return node;
}
/** Rect a matched-subtree set highlights: any node at or below a match. */
function highlightTest(matches) {
    const roots = matches.map((m) => m.path);
    return (path) => roots.some((r) => r.length <= path.length && r.every((seg, i) => path[i] === seg));
}
function layoutFlame(root, zoomPath = [], isHighlighted = () => false) {
    const viewRoot = nodeAt(root, zoomPath) ?? root;
    const viewTotal = totalOf(viewRoot);
    const rects = [];
    let rowCount = 0;
    const place = (node, path, x, width, depth) => {
        rowCount = Math.max(rowCount, depth + 1);
        rects.push({
            x,
            width,
            depth,
            name: node.function,
            path,
            color: (0, colors_js_1.flameColor)(dominantChannel(node), node.function),
            value: totalOf(node),
            fractionOfView: viewTotal > 0 ? totalOf(node) / viewTotal : 0,
            highlighted: isHighlighted(path),
        });
        if (viewTotal <= 0)
            return;
        let cursor = x;
        for (const child of node.children) {
            const w = totalOf(node) > 0 ? width * (totalOf(child) / totalOf(node)) : 0;
            if (w <= 0)
                continue;
            place(child, [...path, child.function], cursor, w, depth + 1);
            cursor += w;
        }
    };
    place(viewRoot, zoomPath, 0, 1, 0);
    return { rects, rowCount, viewTotal };
}
/** Rect under a fractional x at a given row, for click/hover hit-testing. */
function hitTest(layout, xFraction, depth) {
    for (const rect of layout.rects) {
        if (rect.depth === depth && xFraction >= rect.x && xFraction < rect.x + rect.width) {
            return rect;
        }
    }
    return null;
}
/** The numeric badge next to the search box, e.g. "80%". The walltime
 * graph reports its on-CPU (hot) fraction; counted metrics their value
 * fraction. */
function searchBadgeText(search) {
    const f = search.fractions["hot_ns"] ??
        search.fractions["value"] ??
        0;
    return `${Math.round(f * 1000) / 10}%`;
}
/** Chronological mode: spans on a time axis, one lane per channel. */
function layoutChron(chron, viewStart, viewEnd, widthPx) {
    const span = viewEnd - viewStart;
    if (span <= 0 || widthPx <= 0)
        return [];
    const toX = (t) => Math.max(0, Math.min(widthPx, ((t - viewStart) / span) * widthPx));
    const rects = [];
    for (const s of chron.spans) {
        const end = s.t_start + s.duration_ns;
        if (end <= viewStart || s.t_start >= viewEnd)
            continue;
        const stack = chron.stacks[String(s.sid)];
        const leaf = stack && stack.length > 0 ? stack[0].function : `sid ${s.sid}`;
        rects.push({
            x0: toX(s.t_start),
            x1: toX(end),
            lane: s.channel === "hot" ? 0 : 1,
            color: (0, colors_js_1.flameColor)(s.channel, leaf),
            label: leaf,
            span: s,
        });
    }
    return rects;
}
function chronBounds(chron) {
    if (chron.spans.length === 0)
        return [0, 1];
    const start = Math.min(...chron.spans.map((s) => s.t_start));
    const end = Math.max(...chron.spans.map((s) => s.t_start + s.duration_ns));
    return [start, end];
}
