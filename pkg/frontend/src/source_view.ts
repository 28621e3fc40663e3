/** Code preview view-model: source lines with per-line value annotations
 * and an optional highlighted line (the spawning line for spawn stacks). */

import { heatAlpha } from "./colors.js";
import type { SourceResponse, SpawnStack } from "./types.js";

export interface SourceRow {
  lineNo: number;
  text: string;
  value: number | null;
  heat: number; // 0..1 background alpha
  highlighted: boolean;
}

export function annotateSource(
  source: SourceResponse,
  lineValues: [number, number][],
  highlightLine: number | null,
): SourceRow[] {
  const values = new Map<number, number>(lineValues);
  const max = Math.max(0, ...values.values());
  return source.lines.map((text, i) => {
    const lineNo = i + 1;
    const value = values.get(lineNo) ?? null;
    return {
      lineNo,
      text,
      value,
      heat: value === null ? 0 : heatAlpha(value, max),
      highlighted: highlightLine === lineNo,
    };
  });
}

/** The leaf frame of the spawning stack is the spawning point; its line is
 * the one to highlight. */
export function spawnHighlight(
  stack: SpawnStack,
): { file: string; line: number } | null {
  if (stack.frames.length === 0) return null;
  const leaf = stack.frames[0];
  if (leaf.file === null || leaf.line === null) return null;
  return { file: leaf.file, line: leaf.line };
}
