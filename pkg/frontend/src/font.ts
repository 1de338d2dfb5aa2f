/** Minimal 5x7 bitmap font for PNG axis labels (uppercase maps to lowercase). */

const G: Record<string, string[]> = {
  " ": [".....", ".....", ".....", ".....", ".....", ".....", "....."],
  "0": [".XXX.", "X...X", "X..XX", "X.X.X", "XX..X", "X...X", ".XXX."],
  "1": ["..X..", ".XX..", "..X..", "..X..", "..X..", "..X..", ".XXX."],
  "2": [".XXX.", "X...X", "....X", "...X.", "..X..", ".X...", "XXXXX"],
  "3": ["XXXXX", "....X", "...X.", "..XX.", "....X", "X...X", ".XXX."],
  "4": ["...X.", "..XX.", ".X.X.", "X..X.", "XXXXX", "...X.", "...X."],
  "5": ["XXXXX", "X....", "XXXX.", "....X", "....X", "X...X", ".XXX."],
  "6": ["..XX.", ".X...", "X....", "XXXX.", "X...X", "X...X", ".XXX."],
  "7": ["XXXXX", "....X", "...X.", "..X..", "..X..", "..X..", "..X.."],
  "8": [".XXX.", "X...X", "X...X", ".XXX.", "X...X", "X...X", ".XXX."],
  "9": [".XXX.", "X...X", "X...X", ".XXXX", "....X", "...X.", ".XX.."],
  a: [".....", ".....", ".XXX.", "....X", ".XXXX", "X...X", ".XXXX"],
  b: ["X....", "X....", "XXXX.", "X...X", "X...X", "X...X", "XXXX."],
  c: [".....", ".....", ".XXX.", "X....", "X....", "X...X", ".XXX."],
  d: ["....X", "....X", ".XXXX", "X...X", "X...X", "X...X", ".XXXX"],
  e: [".....", ".....", ".XXX.", "X...X", "XXXXX", "X....", ".XXX."],
  f: ["..XX.", ".X..X", ".X...", "XXX..", ".X...", ".X...", ".X..."],
  g: [".....", ".XXXX", "X...X", "X...X", ".XXXX", "....X", ".XXX."],
  h: ["X....", "X....", "XXXX.", "X...X", "X...X", "X...X", "X...X"],
  i: ["..X..", ".....", ".XX..", "..X..", "..X..", "..X..", ".XXX."],
  j: ["...X.", ".....", "..XX.", "...X.", "...X.", "X..X.", ".XX.."],
  k: ["X....", "X....", "X..X.", "X.X..", "XX...", "X.X..", "X..X."],
  l: [".XX..", "..X..", "..X..", "..X..", "..X..", "..X..", ".XXX."],
  m: [".....", ".....", "XX.X.", "X.X.X", "X.X.X", "X.X.X", "X.X.X"],
  n: [".....", ".....", "XXXX.", "X...X", "X...X", "X...X", "X...X"],
  o: [".....", ".....", ".XXX.", "X...X", "X...X", "X...X", ".XXX."],
  p: [".....", ".....", "XXXX.", "X...X", "XXXX.", "X....", "X...."],
  q: [".....", ".....", ".XXXX", "X...X", ".XXXX", "....X", "....X"],
  r: [".....", ".....", "X.XX.", "XX..X", "X....", "X....", "X...."],
  s: [".....", ".....", ".XXXX", "X....", ".XXX.", "....X", "XXXX."],
  t: [".X...", ".X...", "XXX..", ".X...", ".X...", ".X..X", "..XX."],
  u: [".....", ".....", "X...X", "X...X", "X...X", "X..XX", ".XX.X"],
  v: [".....", ".....", "X...X", "X...X", "X...X", ".X.X.", "..X.."],
  w: [".....", ".....", "X...X", "X.X.X", "X.X.X", "X.X.X", ".X.X."],
  x: [".....", ".....", "X...X", ".X.X.", "..X..", ".X.X.", "X...X"],
  y: [".....", ".....", "X...X", "X...X", ".XXXX", "....X", ".XXX."],
  z: [".....", ".....", "XXXXX", "...X.", "..X..", ".X...", "XXXXX"],
  "-": [".....", ".....", ".....", "XXXXX", ".....", ".....", "....."],
  "+": [".....", "..X..", "..X..", "XXXXX", "..X..", "..X..", "....."],
  ".": [".....", ".....", ".....", ".....", ".....", ".XX..", ".XX.."],
  ",": [".....", ".....", ".....", ".....", "..XX.", "..X..", ".X..."],
  "=": [".....", ".....", "XXXXX", ".....", "XXXXX", ".....", "....."],
  "(": ["...X.", "..X..", ".X...", ".X...", ".X...", "..X..", "...X."],
  ")": [".X...", "..X..", "...X.", "...X.", "...X.", "..X..", ".X..."],
  "[": [".XXX.", ".X...", ".X...", ".X...", ".X...", ".X...", ".XXX."],
  "]": [".XXX.", "...X.", "...X.", "...X.", "...X.", "...X.", ".XXX."],
  "/": ["....X", "....X", "...X.", "..X..", ".X...", "X....", "X...."],
  ":": [".....", ".XX..", ".XX..", ".....", ".XX..", ".XX..", "....."],
  "^": ["..X..", ".X.X.", "X...X", ".....", ".....", ".....", "....."],
  "%": ["XX..X", "XX..X", "...X.", "..X..", ".X...", "X..XX", "X..XX"],
};

const BOX = ["XXXXX", "X...X", "X...X", "X...X", "X...X", "X...X", "XXXXX"];

export const GLYPH_W = 5;
export const GLYPH_H = 7;
export const ADVANCE = 6;

export function glyph(ch: string): string[] {
  return G[ch] ?? G[ch.toLowerCase()] ?? BOX;
}

export function textWidth(s: string): number {
  return s.length * ADVANCE - 1;
}
