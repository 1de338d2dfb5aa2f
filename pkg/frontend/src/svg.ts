/** Scene -> SVG text. Pure function of the scene: byte-stable output. */

import { Element, Scene } from "./scene.js";

function n(v: number): string {
  // fixed two-decimal pixel coordinates, trimmed; avoids "-0.00"
  let s = v.toFixed(2);
  s = s.replace(/\.?0+$/, "");
  if (s === "-0") s = "0";
  return s;
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function render(el: Element): string {
  switch (el.kind) {
    case "rect":
      return `<rect x="${n(el.x)}" y="${n(el.y)}" width="${n(el.w)}" height="${n(el.h)}" fill="${el.color}"/>`;
    case "line": {
      const dash = el.dash ? ' stroke-dasharray="5,4"' : "";
      return `<line x1="${n(el.x1)}" y1="${n(el.y1)}" x2="${n(el.x2)}" y2="${n(el.y2)}" stroke="${el.color}" stroke-width="${n(el.width)}"${dash}/>`;
    }
    case "polyline": {
      const pts = el.points.map(([x, y]) => `${n(x)},${n(y)}`).join(" ");
      return `<polyline points="${pts}" fill="none" stroke="${el.color}" stroke-width="${n(el.width)}"/>`;
    }
    case "circle":
      return `<circle cx="${n(el.cx)}" cy="${n(el.cy)}" r="${n(el.r)}" fill="${el.color}"/>`;
    case "text":
      return `<text x="${n(el.x)}" y="${n(el.y)}" fill="${el.color}" text-anchor="${el.anchor}" font-family="monospace" font-size="12">${esc(el.text)}</text>`;
  }
}

export function sceneToSvg(scene: Scene): string {
  const body = scene.elements.map(render).join("\n");
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${scene.width}" height="${scene.height}" ` +
    `viewBox="0 0 ${scene.width} ${scene.height}">\n${body}\n</svg>\n`
  );
}
