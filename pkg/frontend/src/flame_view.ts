/** Flame graph layout: rectangles in fractional coordinates, canvas-ready.
 * Node width is proportional to inclusive value (hot+cold for the
 * walltime graph); children sit above their parent in lexicographic
 * order, exactly as the API emits them. */

import { flameColor } from "./colors.js";
import type { Chron, ChronSpan, FlameNode, SearchResponse } from "./types.js";

export function totalOf(node: FlameNode): number {
  if (node.value !== undefined) return node.value;
  return (node.hot_ns ?? 0) + (node.cold_ns ?? 0);
}

export function dominantChannel(node: FlameNode): "hot" | "cold" {
  return (node.cold_ns ?? 0) > (node.hot_ns ?? 0) ? "cold" : "hot";
}

export interface FlameRect {
  x: number; // fraction of pane width, 0..1
  width: number;
  depth: number;
  name: string;
  path: string[]; // function names from the (unzoomed) root
  color: string;
  value: number;
  fractionOfView: number;
  highlighted: boolean;
}

export interface FlameLayout {
  rects: FlameRect[];
  rowCount: number;
  viewTotal: number;
}

/** Node reached by following function names below root, or null. */
export function nodeAt(root: FlameNode, path: string[]): FlameNode | null {
  let node = root;
  for (const name of path) {
    const next = node.children.find((c) => c.function === name);
    if (!next) return null;
    node = next;
  }
  return node;
}

/** Rect a matched-subtree set highlights: any node at or below a match. */
export function highlightTest(matches: { path: string[] }[]): (path: string[]) => boolean {
  const roots = matches.map((m) => m.path);
  return (path: string[]) =>
    roots.some(
      (r) => r.length <= path.length && r.every((seg, i) => path[i] === seg),
    );
}

export function layoutFlame(
  root: FlameNode,
  zoomPath: string[] = [],
  isHighlighted: (path: string[]) => boolean = () => false,
): FlameLayout {
  const viewRoot = nodeAt(root, zoomPath) ?? root;
  const viewTotal = totalOf(viewRoot);
  const rects: FlameRect[] = [];
  let rowCount = 0;
  const place = (
    node: FlameNode,
    path: string[],
    x: number,
    width: number,
    depth: number,
  ) => {
    rowCount = Math.max(rowCount, depth + 1);
    rects.push({
      x,
      width,
      depth,
      name: node.function,
      path,
      color: flameColor(dominantChannel(node), node.function),
      value: totalOf(node),
      fractionOfView: viewTotal > 0 ? totalOf(node) / viewTotal : 0,
      highlighted: isHighlighted(path),
    });
    if (viewTotal <= 0) return;
    let cursor = x;
    for (const child of node.children) {
      const w = totalOf(node) > 0 ? width * (totalOf(child) / totalOf(node)) : 0;
      if (w <= 0) continue;
      place(child, [...path, child.function], cursor, w, depth + 1);
      cursor += w;
    }
  };
  place(viewRoot, zoomPath, 0, 1, 0);
  return { rects, rowCount, viewTotal };
}

/** Rect under a fractional x at a given row, for click/hover hit-testing. */
export function hitTest(
  layout: FlameLayout,
  xFraction: number,
  depth: number,
): FlameRect | null {
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
export function searchBadgeText(search: SearchResponse): string {
  const f =
    search.fractions["hot_ns"] ??
    search.fractions["value"] ??
    0;
  return `${Math.round(f * 1000) / 10}%`;
}

export interface ChronRect {
  x0: number;
  x1: number;
  lane: number; // 0 = hot, 1 = cold
  color: string;
  label: string;
  span: ChronSpan;
}

/** Chronological mode: spans on a time axis, one lane per channel. */
export function layoutChron(
  chron: Chron,
  viewStart: number,
  viewEnd: number,
  widthPx: number,
): ChronRect[] {
  const span = viewEnd - viewStart;
  if (span <= 0 || widthPx <= 0) return [];
  const toX = (t: number) =>
    Math.max(0, Math.min(widthPx, ((t - viewStart) / span) * widthPx));
  const rects: ChronRect[] = [];
  for (const s of chron.spans) {
    const end = s.t_start + s.duration_ns;
    if (end <= viewStart || s.t_start >= viewEnd) continue;
    const stack = chron.stacks[String(s.sid)];
    const leaf = stack && stack.length > 0 ? stack[0].function : `sid ${s.sid}`;
    rects.push({
      x0: toX(s.t_start),
      x1: toX(end),
      lane: s.channel === "hot" ? 0 : 1,
      color: flameColor(s.channel, leaf),
      label: leaf,
      span: s,
    });
  }
  return rects;
}

export function chronBounds(chron: Chron): [number, number] {
  if (chron.spans.length === 0) return [0, 1];
  const start = Math.min(...chron.spans.map((s) => s.t_start));
  const end = Math.max(...chron.spans.map((s) => s.t_start + s.duration_ns));
  return [start, end];
}
