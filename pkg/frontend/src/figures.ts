/**
 * Figure builders: experiment tables in, drawing scenes out.
 *
 * Numbers are plotted exactly as read; no smoothing, no extrapolation, and
 * the rate-reference line value is used verbatim (negated, as the decay
 * slope plots live below zero).
 */

import { BoundRow, SchemaError, Table, column, parseBoundReport, parseCsv, requireColumns } from "./csv.js";
import { COLORS, Element, Scene, fmtTick, linearTicks, logTicks } from "./scene.js";

export type FigureKind = "ldp-slope" | "convergence" | "trace" | "bound-summary";

export interface InputFile {
  path: string;
  text: string;
}

const W = 640;
const H = 420;
const ML = 78;
const MR = 24;
const MT = 44;
const MB = 56;

interface AxisSpec {
  lo: number;
  hi: number;
  log?: boolean;
  label: string;
}

interface FrameResult {
  sx: (v: number) => number;
  sy: (v: number) => number;
  elements: Element[];
}

function pad(lo: number, hi: number, log = false): [number, number] {
  if (log) {
    return [lo / 1.35, hi * 1.35];
  }
  const span = hi - lo || Math.max(Math.abs(hi), 1);
  return [lo - 0.08 * span, hi + 0.08 * span];
}

function makeFrame(title: string, x: AxisSpec, y: AxisSpec): FrameResult {
  const els: Element[] = [];
  const tx = (v: number) => (x.log ? Math.log10(v) : v);
  const ty = (v: number) => (y.log ? Math.log10(v) : v);
  const sx = (v: number) => ML + ((tx(v) - tx(x.lo)) / (tx(x.hi) - tx(x.lo))) * (W - ML - MR);
  const sy = (v: number) => H - MB - ((ty(v) - ty(y.lo)) / (ty(y.hi) - ty(y.lo))) * (H - MT - MB);

  els.push({ kind: "rect", x: 0, y: 0, w: W, h: H, color: "#ffffff" });
  els.push({ kind: "text", x: W / 2, y: MT - 18, text: title, color: COLORS.text, anchor: "middle" });

  const xticks = x.log ? logTicks(x.lo, x.hi) : linearTicks(x.lo, x.hi);
  const yticks = y.log ? logTicks(y.lo, y.hi) : linearTicks(y.lo, y.hi);
  for (const v of xticks) {
    const px = sx(v);
    els.push({ kind: "line", x1: px, y1: MT, x2: px, y2: H - MB, color: COLORS.grid, width: 1 });
    els.push({ kind: "text", x: px, y: H - MB + 16, text: fmtTick(v), color: COLORS.text, anchor: "middle" });
  }
  for (const v of yticks) {
    const py = sy(v);
    els.push({ kind: "line", x1: ML, y1: py, x2: W - MR, y2: py, color: COLORS.grid, width: 1 });
    els.push({ kind: "text", x: ML - 6, y: py + 4, text: fmtTick(v), color: COLORS.text, anchor: "end" });
  }
  // frame on top of the grid
  els.push({ kind: "line", x1: ML, y1: H - MB, x2: W - MR, y2: H - MB, color: COLORS.axis, width: 1 });
  els.push({ kind: "line", x1: ML, y1: MT, x2: ML, y2: H - MB, color: COLORS.axis, width: 1 });
  els.push({ kind: "text", x: (ML + W - MR) / 2, y: H - 14, text: x.label, color: COLORS.text, anchor: "middle" });
  els.push({ kind: "text", x: ML - 58, y: MT - 6, text: y.label, color: COLORS.text, anchor: "start" });
  return { sx, sy, elements: els };
}

function series(
  els: Element[],
  xs: number[],
  ys: number[],
  sx: (v: number) => number,
  sy: (v: number) => number,
  color: string,
  markers = true
): void {
  const pts = xs.map((v, i) => [sx(v), sy(ys[i])] as [number, number]);
  if (pts.length > 1) {
    els.push({ kind: "polyline", points: pts, color, width: 2 });
  }
  if (markers) {
    for (const [px, py] of pts) {
      els.push({ kind: "circle", cx: px, cy: py, r: 3.5, color });
    }
  }
}

function buildLdpSlope(file: InputFile, rateReference?: number): Scene {
  const table = parseCsv(file.text, file.path);
  requireColumns(table, ["kappa", "N", "hits", "p_hat", "se", "kappa_log_p"], file.path);
  const kappa = column(table, "kappa", file.path);
  const klp = column(table, "kappa_log_p", file.path);
  let ylo = Math.min(...klp);
  let yhi = Math.max(...klp, 0);
  if (rateReference !== undefined) {
    ylo = Math.min(ylo, -rateReference);
    yhi = Math.max(yhi, -rateReference);
  }
  const [plo, phi] = pad(Math.min(...kappa), Math.max(...kappa));
  const [qlo, qhi] = pad(ylo, yhi);
  const fr = makeFrame(
    "decay slope vs kappa",
    { lo: plo, hi: phi, label: "kappa" },
    { lo: qlo, hi: qhi, label: "kappa log p" }
  );
  const els = fr.elements;
  if (rateReference !== undefined) {
    const py = fr.sy(-rateReference);
    els.push({ kind: "line", x1: ML, y1: py, x2: W - MR, y2: py, color: COLORS.reference, width: 2, dash: true });
    els.push({
      kind: "text",
      x: W - MR - 4,
      y: py - 6,
      text: `-I(V) = ${fmtTick(-rateReference)}`,
      color: COLORS.reference,
      anchor: "end",
    });
  }
  series(els, kappa, klp, fr.sx, fr.sy, COLORS.series);
  return { width: W, height: H, elements: els };
}

function buildConvergence(file: InputFile): Scene {
  const table = parseCsv(file.text, file.path);
  requireColumns(
    table,
    ["n", "median_sup_error", "violation_freq", "violation_se", "threshold", "bound"],
    file.path
  );
  const n = column(table, "n", file.path);
  const med = column(table, "median_sup_error", file.path);
  const thr = column(table, "threshold", file.path);
  const ypos = med.concat(thr).filter((v) => v > 0);
  if (ypos.length === 0) {
    throw new SchemaError(`${file.path}: column 'median_sup_error': no positive values to log-plot`);
  }
  const [xlo, xhi] = pad(Math.min(...n), Math.max(...n), true);
  const [ylo, yhi] = pad(Math.min(...ypos), Math.max(...ypos), true);
  const fr = makeFrame(
    "approximation error vs node count (log-log)",
    { lo: xlo, hi: xhi, log: true, label: "n" },
    { lo: ylo, hi: yhi, log: true, label: "sup error" }
  );
  const els = fr.elements;
  series(els, n, med, fr.sx, fr.sy, COLORS.series);
  series(els, n, thr, fr.sx, fr.sy, COLORS.series2);
  els.push({ kind: "circle", cx: W - 200, cy: MT + 14, r: 3.5, color: COLORS.series });
  els.push({ kind: "text", x: W - 190, y: MT + 18, text: "median sup error", color: COLORS.text, anchor: "start" });
  els.push({ kind: "circle", cx: W - 200, cy: MT + 32, r: 3.5, color: COLORS.series2 });
  els.push({ kind: "text", x: W - 190, y: MT + 36, text: "threshold n^-zeta", color: COLORS.text, anchor: "start" });
  return { width: W, height: H, elements: els };
}

function buildTrace(file: InputFile): Scene {
  const table = parseCsv(file.text, file.path);
  requireColumns(table, ["t", "re", "im"], file.path);
  const re = column(table, "re", file.path);
  const im = column(table, "im", file.path);
  // equal-aspect box around the curve
  const xlo = Math.min(...re, 0);
  const xhi = Math.max(...re, 0);
  const ylo = 0;
  const yhi = Math.max(...im, 1e-9);
  const spanX = Math.max(xhi - xlo, 1e-9);
  const spanY = Math.max(yhi - ylo, 1e-9);
  const boxW = W - ML - MR;
  const boxH = H - MT - MB;
  const scale = Math.min(boxW / (1.1 * spanX), boxH / (1.1 * spanY));
  const cx = (xlo + xhi) / 2;
  const sx = (v: number) => ML + boxW / 2 + (v - cx) * scale;
  const sy = (v: number) => H - MB - (v - ylo) * scale - 0.05 * spanY * scale;
  const els: Element[] = [];
  els.push({ kind: "rect", x: 0, y: 0, w: W, h: H, color: "#ffffff" });
  els.push({ kind: "text", x: W / 2, y: MT - 18, text: "trace in the upper half-plane", color: COLORS.text, anchor: "middle" });
  els.push({ kind: "line", x1: ML, y1: sy(0), x2: W - MR, y2: sy(0), color: COLORS.axis, width: 1 });
  els.push({ kind: "text", x: (ML + W - MR) / 2, y: H - 14, text: "Re", color: COLORS.text, anchor: "middle" });
  els.push({ kind: "text", x: ML - 58, y: MT - 6, text: "Im", color: COLORS.text, anchor: "start" });
  const pts = re.map((v, i) => [sx(v), sy(im[i])] as [number, number]);
  els.push({ kind: "polyline", points: pts, color: COLORS.series, width: 2 });
  els.push({ kind: "circle", cx: pts[0][0], cy: pts[0][1], r: 3, color: COLORS.axis });
  return { width: W, height: H, elements: els };
}

function buildBoundSummary(file: InputFile): Scene {
  const rows: BoundRow[] = parseBoundReport(file.text, file.path);
  const els: Element[] = [];
  els.push({ kind: "rect", x: 0, y: 0, w: W, h: H, color: "#ffffff" });
  els.push({ kind: "text", x: W / 2, y: 26, text: "inequality checks: worst lhs/rhs ratio", color: COLORS.text, anchor: "middle" });
  const barX = 250;
  const barMax = W - barX - 40;
  const ratioCap = 1.25;
  const threshX = barX + (1.0 / ratioCap) * barMax;
  const rowH = Math.min(44, (H - 90) / rows.length);
  rows.forEach((r, i) => {
    const y = 60 + i * rowH;
    const ok = r.failures.length === 0;
    const color = ok ? COLORS.pass : COLORS.fail;
    els.push({ kind: "text", x: 16, y: y + 14, text: r.bound_id, color: COLORS.text, anchor: "start" });
    els.push({
      kind: "text",
      x: 16,
      y: y + 28,
      text: `${r.passes}/${r.instances} pass, worst ${fmtTick(r.worst_ratio)}`,
      color,
      anchor: "start",
    });
    const len = (Math.min(r.worst_ratio, ratioCap) / ratioCap) * barMax;
    els.push({ kind: "rect", x: barX, y: y + 6, w: Math.max(len, 1), h: rowH - 18, color });
  });
  els.push({ kind: "line", x1: threshX, y1: 50, x2: threshX, y2: 60 + rows.length * rowH, color: COLORS.axis, width: 1, dash: true });
  els.push({ kind: "text", x: threshX, y: 46, text: "ratio = 1", color: COLORS.text, anchor: "middle" });
  return { width: W, height: H, elements: els };
}

export function buildFigure(kind: FigureKind, files: InputFile[], rateReference?: number): Scene {
  if (files.length === 0) {
    throw new SchemaError("no input files given");
  }
  switch (kind) {
    case "ldp-slope":
      return buildLdpSlope(files[0], rateReference);
    case "convergence":
      return buildConvergence(files[0]);
    case "trace":
      return buildTrace(files[0]);
    case "bound-summary":
      return buildBoundSummary(files[0]);
    default:
      throw new SchemaError(`unknown figure kind '${kind as string}'`);
  }
}
