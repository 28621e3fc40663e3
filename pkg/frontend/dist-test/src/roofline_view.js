"use strict";
/** Roofline plot geometry: performance (ops/s) against operational
 * intensity (ops/byte) on log-log axes. Memory ceilings are sloped lines
 * (perf = bytes_per_sec * intensity), compute ceilings horizontal. */
Object.defineProperty(exports, "__esModule", { value: true });
exports.ROOFLINE_MENU_LABEL = void 0;
exports.rooflineSeries = rooflineSeries;
exports.generalAnalyses = generalAnalyses;
exports.toSvgPoint = toSvgPoint;
exports.ROOFLINE_MENU_LABEL = "Cache-aware roofline model";
function rooflineSeries(data, xRange = [1 / 16, 64]) {
    const series = [];
    for (const ceil of data.memory) {
        series.push({
            label: ceil.name,
            kind: "memory",
            points: [
                [xRange[0], ceil.bytes_per_sec * xRange[0]],
                [xRange[1], ceil.bytes_per_sec * xRange[1]],
            ],
        });
    }
    for (const ceil of data.compute) {
        series.push({
            label: ceil.name,
            kind: "compute",
            points: [
                [xRange[0], ceil.ops_per_sec],
                [xRange[1], ceil.ops_per_sec],
            ],
        });
    }
    const ys = series.flatMap((s) => s.points.map((p) => p[1]));
    const yMax = ys.length ? Math.max(...ys) : 1;
    const yMin = ys.length ? Math.min(...ys) : 0.1;
    return { machine: data.machine, series, xRange, yRange: [yMin / 2, yMax * 2] };
}
/** Entries for the "General analyses" menu; the roofline item exists only
 * when the bundle carries roofline data. */
function generalAnalyses(roofline) {
    return roofline === null ? [] : [exports.ROOFLINE_MENU_LABEL];
}
/** Map a data point into an SVG viewport with log10 axes. */
function toSvgPoint(point, plot, width, height) {
    const lx = Math.log10(point[0]);
    const ly = Math.log10(point[1]);
    const x0 = Math.log10(plot.xRange[0]);
    const x1 = Math.log10(plot.xRange[1]);
    const y0 = Math.log10(plot.yRange[0]);
    const y1 = Math.log10(plot.yRange[1]);
    return [
        ((lx - x0) / (x1 - x0)) * width,
        height - ((ly - y0) / (y1 - y0)) * height,
    ];
}
