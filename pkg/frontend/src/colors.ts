/**
 * Mirrors of the engine's default color tables, so the panel tints lamp
 * indicators and scene glyphs the way the installation shows them.
 * 'A' (yellow) and 'Z' (off) are fixed by the lamp firmware.
 */

export type Rgb = [number, number, number];

export const LAMP_COLOR_TABLE: Record<string, Rgb> = {
  "0": [255, 0, 0],
  "1": [0, 0, 255],
  "2": [255, 128, 0],
  "3": [0, 128, 128],
  "4": [0, 255, 0],
  "5": [0, 128, 255],
  "6": [255, 0, 255],
  "7": [128, 0, 255],
  "8": [255, 64, 160],
  "9": [0, 255, 128],
  A: [255, 255, 0],
  B: [255, 200, 120],
  C: [255, 160, 0],
  D: [220, 20, 60],
  E: [0, 255, 255],
  F: [255, 80, 0],
  Z: [0, 0, 0],
};

/** The engine's default 12-color art palette, by scene color index. */
export const ART_PALETTE: Rgb[] = [
  [235, 64, 52],
  [247, 127, 35],
  [252, 186, 3],
  [181, 217, 28],
  [78, 186, 73],
  [38, 166, 154],
  [41, 128, 185],
  [52, 73, 194],
  [124, 77, 255],
  [171, 71, 188],
  [236, 64, 122],
  [240, 240, 240],
];

export function cssColor([r, g, b]: Rgb, alpha = 1): string {
  return `rgba(${r},${g},${b},${alpha.toFixed(3).replace(/0+$/, "").replace(/\.$/, "")})`;
}

/** Indicator tint for a lamp command character; unknown chars stay dark. */
export function lampTint(command: string): string {
  const rgb = LAMP_COLOR_TABLE[command] ?? LAMP_COLOR_TABLE.Z;
  return cssColor(rgb);
}
