/** Timeline view-model: hierarchy rows on the left, activity bands on the
 * right. Pure geometry; rendering lives in app.ts. */

import { activityColor } from "./colors.js";
import type { Timeline, Tree, TreeNode } from "./types.js";

export interface TimelineRow {
  tid: number;
  label: string;
  depth: number;
  kind: "process" | "thread";
  implicit: boolean;
  openEnded: boolean;
  hasSpawnStack: boolean;
  spawnT: number;
  exitT: number;
}

export function displayName(node: TreeNode): string {
  if (node.names.length === 0) return `tid ${node.tid}`;
  return node.names[node.names.length - 1][1];
}

/** Depth-first rows mirroring the tree; a node sharing its parent's pid is
 * a thread, otherwise a process. */
export function timelineRows(tree: Tree): TimelineRow[] {
  const rows: TimelineRow[] = [];
  const walk = (node: TreeNode, depth: number, parentPid: number | null) => {
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
    for (const child of node.children) walk(child, depth + 1, node.pid);
  };
  for (const root of tree.roots) walk(root, 0, null);
  return rows;
}

export interface Band {
  x0: number;
  x1: number;
  state: "on" | "off";
  color: string;
  synthetic: boolean;
}

/** Pixel bands for one thread over the visible window [viewStart, viewEnd). */
export function bandGeometry(
  timeline: Timeline,
  viewStart: number,
  viewEnd: number,
  widthPx: number,
): Band[] {
  const span = viewEnd - viewStart;
  if (span <= 0 || widthPx <= 0) return [];
  const toX = (t: number) =>
    Math.max(0, Math.min(widthPx, ((t - viewStart) / span) * widthPx));
  const bands: Band[] = [];
  if (timeline.mode === "segments") {
    for (const seg of timeline.segments) {
      if (seg.end <= viewStart || seg.start >= viewEnd) continue;
      bands.push({
        x0: toX(seg.start),
        x1: toX(seg.end),
        state: seg.state,
        color: activityColor(seg.state),
        synthetic: seg.synthetic,
      });
    }
    return bands;
  }
  for (const bucket of timeline.buckets) {
    const start = bucket.index * timeline.bucket_ns;
    const end = start + timeline.bucket_ns;
    if (end <= viewStart || start >= viewEnd) continue;
    bands.push({
      x0: toX(start),
      x1: toX(end),
      state: bucket.dominant,
      color: activityColor(bucket.dominant),
      synthetic: false,
    });
  }
  return bands;
}
