/**
 * Scene drawing for the monitor canvas.
 *
 * The canvas mirrors the engine's rasterizer semantics (black ground,
 * glyphs painted in order, fill opacity alpha/255, 1 px black stroke at
 * 50/255) but it is a monitor, not the authoritative renderer; golden
 * images live with the engine's own rasterizer.
 */

import { ART_PALETTE, Rgb, cssColor } from "./colors.js";
import { SceneMessage } from "./protocol.js";

export interface ClearCommand {
  kind: "clear";
  width: number;
  height: number;
  style: string;
}

export interface CircleCommand {
  kind: "circle";
  x: number;
  y: number;
  radius: number;
  fillStyle: string;
  strokeStyle: string;
}

export type DrawCommand = ClearCommand | CircleCommand;

const STROKE_ALPHA = 50 / 255;

export function sceneDrawCommands(scene: SceneMessage, palette: Rgb[] = ART_PALETTE): DrawCommand[] {
  const commands: DrawCommand[] = [
    { kind: "clear", width: scene.w, height: scene.h, style: "rgba(0,0,0,1)" },
  ];
  for (const glyph of scene.glyphs) {
    const rgb = palette[glyph.c % palette.length];
    commands.push({
      kind: "circle",
      x: glyph.x,
      y: glyph.y,
      radius: glyph.d / 2,
      fillStyle: cssColor(rgb, glyph.a / 255),
      strokeStyle: cssColor([0, 0, 0], STROKE_ALPHA),
    });
  }
  return commands;
}

/** The subset of CanvasRenderingContext2D the monitor needs. */
export interface Canvas2DLike {
  fillStyle: string;
  strokeStyle: string;
  lineWidth: number;
  fillRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  fill(): void;
  stroke(): void;
}

export function drawScene(ctx: Canvas2DLike, scene: SceneMessage, palette: Rgb[] = ART_PALETTE): void {
  for (const cmd of sceneDrawCommands(scene, palette)) {
    if (cmd.kind === "clear") {
      ctx.fillStyle = cmd.style;
      ctx.fillRect(0, 0, cmd.width, cmd.height);
    } else {
      ctx.beginPath();
      ctx.arc(cmd.x, cmd.y, cmd.radius, 0, Math.PI * 2);
      ctx.fillStyle = cmd.fillStyle;
      ctx.fill();
      ctx.lineWidth = 1;
      ctx.strokeStyle = cmd.strokeStyle;
      ctx.stroke();
    }
  }
}
