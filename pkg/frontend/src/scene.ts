/**
 * Figure scene model: a resolution-independent list of drawing primitives.
 * Both backends (SVG text, PNG raster) consume the same scene, so the two
 * outputs always agree on geometry.
 */

export interface LineEl {
  kind: "line";
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  color: string;
  width: number;
  dash?: boolean;
}

export interface PolylineEl {
  kind: "polyline";
  points: Array<[number, number]>;
  color: string;
  width: number;
}

export interface CircleEl {
  kind: "circle";
  cx: number;
  cy: number;
  r: number;
  color: string;
}

export interface RectEl {
  kind: "rect";
  x: number;
  y: number;
  w: number;
  h: number;
  color: string;
}

export interface TextEl {
  kind: "text";
  x: number;
  y: number;
  text: string;
  color: string;
  anchor: "start" | "middle" | "end";
}

export type Element = LineEl | PolylineEl | CircleEl | RectEl | TextEl;

export interface Scene {
  width: number;
  height: number;
  elements: Element[];
}

export const COLORS = {
  axis: "#333333",
  grid: "#dddddd",
  series: "#1f77b4",
  series2: "#d62728",
  reference: "#2ca02c",
  text: "#222222",
  pass: "#2ca02c",
  fail: "#d62728",
};

/** Nice tick positions covering [lo, hi] with about `count` steps. */
export function linearTicks(lo: number, hi: number, count = 5): number[] {
  if (!(hi > lo)) {
    return [lo];
  }
  const span = hi - lo;
  const raw = span / count;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  let step = mag;
  for (const m of [1, 2, 5, 10]) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = start; v <= hi + 1e-12 * span; v += step) {
    out.push(v);
  }
  return out;
}

/** Decade ticks for a log axis over [lo, hi], both positive. */
export function logTicks(lo: number, hi: number): number[] {
  const out: number[] = [];
  for (let e = Math.ceil(Math.log10(lo) - 1e-12); Math.pow(10, e) <= hi * (1 + 1e-12); e++) {
    const v = Math.pow(10, e);
    if (v >= lo * (1 - 1e-12)) {
      out.push(v);
    }
  }
  return out.length ? out : [lo, hi];
}

/** Deterministic tick label formatting. */
export function fmtTick(v: number): string {
  if (v === 0) {
    return "0";
  }
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) {
    const e = Math.floor(Math.log10(a));
    const mant = v / Math.pow(10, e);
    const m = Number(mant.toPrecision(3));
    return `${m}e${e}`;
  }
  return String(Number(v.toPrecision(4)));
}
