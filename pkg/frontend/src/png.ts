/**
 * Scene -> PNG bytes, with no image dependency: an RGBA raster drawn with
 * Bresenham primitives and encoded with the stock zlib deflate.  Output is
 * a pure function of the scene (fixed compression level, no timestamps).
 */

import { deflateSync } from "node:zlib";

import { ADVANCE, GLYPH_H, GLYPH_W, glyph, textWidth } from "./font.js";
import { Element, Scene } from "./scene.js";

type RGB = [number, number, number];

function parseColor(c: string): RGB {
  const m = /^#([0-9a-f]{6})$/i.exec(c);
  if (!m) {
    return [0, 0, 0];
  }
  const v = parseInt(m[1], 16);
  return [(v >> 16) & 0xff, (v >> 8) & 0xff, v & 0xff];
}

class Raster {
  w: number;
  h: number;
  data: Uint8Array;

  constructor(w: number, h: number) {
    this.w = w;
    this.h = h;
    this.data = new Uint8Array(w * h * 4).fill(255);
  }

  set(x: number, y: number, rgb: RGB): void {
    const xi = Math.round(x);
    const yi = Math.round(y);
    if (xi < 0 || yi < 0 || xi >= this.w || yi >= this.h) {
      return;
    }
    const o = (yi * this.w + xi) * 4;
    this.data[o] = rgb[0];
    this.data[o + 1] = rgb[1];
    this.data[o + 2] = rgb[2];
    this.data[o + 3] = 255;
  }

  stamp(x: number, y: number, rgb: RGB, width: number): void {
    const r = Math.max(0, Math.floor(width / 2));
    for (let dy = -r; dy <= r; dy++) {
      for (let dx = -r; dx <= r; dx++) {
        this.set(x + dx, y + dy, rgb);
      }
    }
  }

  line(x1: number, y1: number, x2: number, y2: number, rgb: RGB, width: number, dash = false): void {
    let x = Math.round(x1);
    let y = Math.round(y1);
    const ex = Math.round(x2);
    const ey = Math.round(y2);
    const dx = Math.abs(ex - x);
    const dy = -Math.abs(ey - y);
    const sx = x < ex ? 1 : -1;
    const sy = y < ey ? 1 : -1;
    let err = dx + dy;
    let step = 0;
    for (;;) {
      if (!dash || step % 9 < 5) {
        this.stamp(x, y, rgb, width);
      }
      if (x === ex && y === ey) {
        break;
      }
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y += sy;
      }
      step++;
    }
  }

  circle(cx: number, cy: number, r: number, rgb: RGB): void {
    const ri = Math.ceil(r);
    for (let dy = -ri; dy <= ri; dy++) {
      for (let dx = -ri; dx <= ri; dx++) {
        if (dx * dx + dy * dy <= r * r) {
          this.set(cx + dx, cy + dy, rgb);
        }
      }
    }
  }

  rect(x: number, y: number, w: number, h: number, rgb: RGB): void {
    for (let yy = Math.round(y); yy < Math.round(y + h); yy++) {
      for (let xx = Math.round(x); xx < Math.round(x + w); xx++) {
        this.set(xx, yy, rgb);
      }
    }
  }

  text(x: number, y: number, s: string, rgb: RGB, anchor: "start" | "middle" | "end"): void {
    let x0 = Math.round(x);
    const w = textWidth(s);
    if (anchor === "middle") {
      x0 -= Math.round(w / 2);
    } else if (anchor === "end") {
      x0 -= w;
    }
    const yTop = Math.round(y) - GLYPH_H; // scene y is the text baseline
    for (const ch of s) {
      const rows = glyph(ch);
      for (let gy = 0; gy < GLYPH_H; gy++) {
        for (let gx = 0; gx < GLYPH_W; gx++) {
          if (rows[gy][gx] === "X") {
            this.set(x0 + gx, yTop + gy, rgb);
          }
        }
      }
      x0 += ADVANCE;
    }
  }
}

function drawElement(r: Raster, el: Element): void {
  switch (el.kind) {
    case "rect":
      r.rect(el.x, el.y, el.w, el.h, parseColor(el.color));
      break;
    case "line":
      r.line(el.x1, el.y1, el.x2, el.y2, parseColor(el.color), el.width, el.dash ?? false);
      break;
    case "polyline": {
      const c = parseColor(el.color);
      for (let i = 1; i < el.points.length; i++) {
        r.line(el.points[i - 1][0], el.points[i - 1][1], el.points[i][0], el.points[i][1], c, el.width);
      }
      break;
    }
    case "circle":
      r.circle(el.cx, el.cy, el.r, parseColor(el.color));
      break;
    case "text":
      r.text(el.x, el.y, el.text, parseColor(el.color), el.anchor);
      break;
  }
}

// ---- PNG container ----

const CRC_TABLE = (() => {
  const t = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    t[n] = c >>> 0;
  }
  return t;
})();

function crc32(buf: Uint8Array): number {
  let c = 0xffffffff;
  for (let i = 0; i < buf.length; i++) {
    c = CRC_TABLE[(c ^ buf[i]) & 0xff] ^ (c >>> 8);
  }
  return (c ^ 0xffffffff) >>> 0;
}

function chunk(type: string, data: Uint8Array): Uint8Array {
  const out = new Uint8Array(12 + data.length);
  const dv = new DataView(out.buffer);
  dv.setUint32(0, data.length);
  for (let i = 0; i < 4; i++) {
    out[4 + i] = type.charCodeAt(i);
  }
  out.set(data, 8);
  dv.setUint32(8 + data.length, crc32(out.subarray(4, 8 + data.length)));
  return out;
}

export function sceneToPng(scene: Scene): Uint8Array {
  const raster = new Raster(scene.width, scene.height);
  for (const el of scene.elements) {
    drawElement(raster, el);
  }
  const stride = scene.width * 4;
  const raw = new Uint8Array((stride + 1) * scene.height);
  for (let y = 0; y < scene.height; y++) {
    raw[y * (stride + 1)] = 0; // filter: none
    raw.set(raster.data.subarray(y * stride, (y + 1) * stride), y * (stride + 1) + 1);
  }
  const ihdr = new Uint8Array(13);
  const dv = new DataView(ihdr.buffer);
  dv.setUint32(0, scene.width);
  dv.setUint32(4, scene.height);
  ihdr[8] = 8; // bit depth
  ihdr[9] = 6; // RGBA
  const idat = deflateSync(raw, { level: 9 });
  const sig = new Uint8Array([137, 80, 78, 71, 13, 10, 26, 10]);
  const parts = [sig, chunk("IHDR", ihdr), chunk("IDAT", new Uint8Array(idat)), chunk("IEND", new Uint8Array(0))];
  const total = parts.reduce((s, p) => s + p.length, 0);
  const out = new Uint8Array(total);
  let off = 0;
  for (const p of parts) {
    out.set(p, off);
    off += p.length;
  }
  return out;
}
