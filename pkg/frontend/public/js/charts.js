// Chart geometry. Series points come straight off metrics frames; this
// module only scales them into SVG path strings, so it stays free of both
// DOM and simulation knowledge.
export function seriesMax(series) {
    let max = 0;
    for (const p of series)
        if (p.v > max)
            max = p.v;
    return max;
}
// Path string for a polyline through the points, left to right in time.
// Returns "" for fewer than two points; a caller can still draw a dot.
export function seriesPath(series, box) {
    if (series.length < 2)
        return "";
    const t0 = series[0].t;
    const t1 = series[series.length - 1].t;
    const span = Math.max(1, t1 - t0);
    const vMax = box.vMax ?? Math.max(1e-9, seriesMax(series));
    const parts = [];
    for (let i = 0; i < series.length; i++) {
        const p = series[i];
        const x = ((p.t - t0) / span) * box.width;
        const y = box.height - (Math.min(p.v, vMax) / vMax) * box.height;
        parts.push(`${i === 0 ? "M" : "L"}${x.toFixed(1)} ${y.toFixed(1)}`);
    }
    return parts.join(" ");
}
export function lastValue(series) {
    return series.length ? series[series.length - 1].v : null;
}
// Microseconds to a short label for axes and the clock readout.
export function fmtTime(us) {
    if (us < 1_000)
        return `${us}us`;
    if (us < 1_000_000)
        return `${(us / 1_000).toFixed(us < 10_000 ? 1 : 0)}ms`;
    return `${(us / 1_000_000).toFixed(2)}s`;
}
export function fmtValue(v) {
    if (v === Math.trunc(v))
        return String(v);
    return v >= 100 ? v.toFixed(0) : v >= 10 ? v.toFixed(1) : v.toFixed(2);
}
