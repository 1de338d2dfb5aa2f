#!/usr/bin/env node
/**
 * Figure renderer: `render --spec spec.json`
 *
 * The spec names input file(s), the figure kind, the output path base, and
 * an optional rate reference (drawn as the -I(V) line on slope figures):
 *
 *   {
 *     "input": "out/ldp_slope.csv",
 *     "kind": "ldp-slope",
 *     "output": "figures/schilder",
 *     "rate_reference": 0.5
 *   }
 *
 * Writes <output>.svg and <output>.png, both deterministic for identical
 * inputs.  Exits 1 with the offending column/field named on schema
 * mismatches; never reinterprets or smooths the numbers it plots.
 */

import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";

import { SchemaError } from "./csv.js";
import { FigureKind, InputFile, buildFigure } from "./figures.js";
import { sceneToPng } from "./png.js";
import { sceneToSvg } from "./svg.js";

const KINDS: FigureKind[] = ["ldp-slope", "convergence", "trace", "bound-summary"];

export interface FigureSpec {
  input: string | string[];
  kind: FigureKind;
  output: string;
  rate_reference?: number;
}

export function parseSpec(text: string, path: string): FigureSpec {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (e) {
    throw new SchemaError(`${path}: not valid JSON (${(e as Error).message})`);
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new SchemaError(`${path}: spec must be a JSON object`);
  }
  const obj = raw as Record<string, unknown>;
  const known = ["input", "kind", "output", "rate_reference"];
  for (const key of Object.keys(obj)) {
    if (!known.includes(key)) {
      throw new SchemaError(`${path}: unknown field '${key}'`);
    }
  }
  for (const key of ["input", "kind", "output"]) {
    if (!(key in obj)) {
      throw new SchemaError(`${path}: missing field '${key}'`);
    }
  }
  if (!KINDS.includes(obj.kind as FigureKind)) {
    throw new SchemaError(`${path}: kind must be one of ${KINDS.join(", ")}`);
  }
  if ("rate_reference" in obj && typeof obj.rate_reference !== "number") {
    throw new SchemaError(`${path}: rate_reference must be a number`);
  }
  return obj as unknown as FigureSpec;
}

export function renderSpec(specPath: string): { svg: string; png: string } {
  const spec = parseSpec(readFileSync(specPath, "utf-8"), specPath);
  const inputs = Array.isArray(spec.input) ? spec.input : [spec.input];
  const files: InputFile[] = inputs.map((p) => ({ path: p, text: readFileSync(p, "utf-8") }));
  const scene = buildFigure(spec.kind, files, spec.rate_reference);
  const svgPath = `${spec.output}.svg`;
  const pngPath = `${spec.output}.png`;
  mkdirSync(dirname(svgPath), { recursive: true });
  writeFileSync(svgPath, sceneToSvg(scene));
  writeFileSync(pngPath, sceneToPng(scene));
  return { svg: svgPath, png: pngPath };
}

export function main(argv: string[]): number {
  const i = argv.indexOf("--spec");
  if (i < 0 || i + 1 >= argv.length) {
    process.stderr.write("usage: render --spec spec.json\n");
    return 1;
  }
  try {
    const out = renderSpec(argv[i + 1]);
    process.stdout.write(`${out.svg}\n${out.png}\n`);
    return 0;
  } catch (e) {
    if (e instanceof SchemaError) {
      process.stderr.write(`schema error: ${e.message}\n`);
    } else {
      process.stderr.write(`error: ${(e as Error).message}\n`);
    }
    return 1;
  }
}

if (process.argv[1] && /render\.(js|ts)$/.test(process.argv[1])) {
  process.exit(main(process.argv.slice(2)));
}
