"use strict";
/** On-CPU activity renders in the #d94f4f red family, off-CPU in the
 * #4f6fd9 blue family; flame frames shade within the family by depth. */
Object.defineProperty(exports, "__esModule", { value: true });
exports.HIGHLIGHT = exports.SYNTHETIC_STRIPE = exports.OFF_CPU_BLUE = exports.ON_CPU_RED = void 0;
exports.activityColor = activityColor;
exports.flameColor = flameColor;
exports.heatAlpha = heatAlpha;
exports.ON_CPU_RED = "#d94f4f";
exports.OFF_CPU_BLUE = "#4f6fd9";
exports.SYNTHETIC_STRIPE = "#b9b9c4";
exports.HIGHLIGHT = "#f5c542";
function activityColor(state) {
    return state === "on" ? exports.ON_CPU_RED : exports.OFF_CPU_BLUE;
}
function clamp(v, lo, hi) {
    return Math.min(hi, Math.max(lo, v));
}
/** Deterministic per-name jitter so adjacent frames stay distinguishable. */
function nameJitter(name) {
    let h = 2166136261;
    for (let i = 0; i < name.length; i++) {
        h = (h ^ name.charCodeAt(i)) * 16777619;
        h >>>= 0;
    }
    return (h % 1000) / 1000;
}
/** Warm ramp for hot frames, cool ramp for cold frames. */
function flameColor(channel, name) {
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
function heatAlpha(value, max) {
    if (max <= 0 || value <= 0)
        return 0;
    return 0.15 + 0.6 * (value / max);
}
