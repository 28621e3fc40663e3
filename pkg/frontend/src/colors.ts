/** On-CPU activity renders in the #d94f4f red family, off-CPU in the
 * #4f6fd9 blue family; flame frames shade within the family by depth. */

export const ON_CPU_RED = "#d94f4f";
export const OFF_CPU_BLUE = "#4f6fd9";
export const SYNTHETIC_STRIPE = "#b9b9c4";
export const HIGHLIGHT = "#f5c542";

export function activityColor(state: "on" | "off"): string {
  return state === "on" ? ON_CPU_RED : OFF_CPU_BLUE;
}

function clamp(v: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, v));
}

/** Deterministic per-name jitter so adjacent frames stay distinguishable. */
function nameJitter(name: string): number {
  let h = 2166136261;
  for (let i = 0; i < name.length; i++) {
    h = (h ^ name.charCodeAt(i)) * 16777619;
    h >>>= 0;
  }
  return (h % 1000) / 1000;
}

/** Warm ramp for hot frames, cool ramp for cold frames. */
export function flameColor(channel: "hot" | "cold", name: string): string {
  const j = nameJitter(name);
  if (channel === "hot") {
    const r = 217;
    const g = clamp(Math.round(79 + 90 * j), 0, 255);
    const b = 66;
    return `rgb(${r},${g},${b})`;
  }
  const r = 66;
  const g = clamp(Math.round(111 + 70 * j), 0, 255);
  const b = 217;
  return `rgb(${r},${g},${b})`;
}

/** Line-heat alpha for code preview annotations. */
export function heatAlpha(value: number, max: number): number {
  if (max <= 0 || value <= 0) return 0;
  return 0.15 + 0.6 * (value / max);
}
