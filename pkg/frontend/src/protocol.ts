/**
 * Wire schema of the engine's control/telemetry socket (newline-delimited
 * JSON over TCP, upgradeable to a WebSocket carrying the same lines).
 *
 * Server -> client: state | scene | midi | lamps | quality | ok | error
 * Client -> server: override | clearOverride | transport | source | configPatch
 *
 * Every outbound message is validated against these schemas before it is
 * written to the socket; inbound messages that fail validation are
 * counted and skipped, never crash the panel.
 */

import { z } from "zod";

const esense = z.number().int().min(0).max(127);
const bandScalar = z.number().int().min(0).max(100);

export const bandsSchema = z.object({
  delta: bandScalar,
  theta: bandScalar,
  alpha: bandScalar,
  highAlpha: bandScalar,
  beta: bandScalar,
  gamma: bandScalar,
  avgGamma: bandScalar,
});

export const stateMessageSchema = z.object({
  t: z.literal("state"),
  tUs: z.number().int().nonnegative(),
  attention: esense,
  relaxation: esense,
  bands: bandsSchema,
  noisePct: z.number().min(0).max(100),
  off: z.boolean(),
  hold: z.boolean().optional(),
  stopped: z.boolean().optional(),
  counters: z.record(z.number()).optional(),
});

export const glyphSchema = z.object({
  x: z.number(),
  y: z.number(),
  d: z.number().nonnegative(),
  c: z.number().int().nonnegative(),
  a: z.number().min(0).max(255),
});

export const sceneMessageSchema = z.object({
  t: z.literal("scene"),
  w: z.number().int().positive(),
  h: z.number().int().positive(),
  glyphs: z.array(glyphSchema),
});

export const midiMessageSchema = z.object({
  t: z.literal("midi"),
  bytes: z.array(z.number().int().min(0).max(255)),
});

const lampCommand = z.string().regex(/^[0-9A-FZ]$/);

export const lampsMessageSchema = z.object({
  t: z.literal("lamps"),
  a: lampCommand,
  b: lampCommand,
  c: lampCommand,
  spray: z.boolean(),
});

export const qualityMessageSchema = z.object({
  t: z.literal("quality"),
  noisePct: z.number().min(0).max(100),
  off: z.boolean(),
});

export const okMessageSchema = z.object({
  t: z.literal("ok"),
  re: z.string().optional(),
});

export const errorMessageSchema = z.object({
  t: z.literal("error"),
  message: z.string(),
});

export const serverMessageSchema = z.discriminatedUnion("t", [
  stateMessageSchema,
  sceneMessageSchema,
  midiMessageSchema,
  lampsMessageSchema,
  qualityMessageSchema,
  okMessageSchema,
  errorMessageSchema,
]);

export const overrideMessageSchema = z.object({
  t: z.literal("override"),
  attention: esense.optional(),
  relaxation: esense.optional(),
  bands: bandsSchema.partial().optional(),
});

export const clearOverrideMessageSchema = z.object({ t: z.literal("clearOverride") });

export const transportMessageSchema = z.object({
  t: z.literal("transport"),
  cmd: z.enum(["start", "stop"]),
});

export const sourceMessageSchema = z.object({
  t: z.literal("source"),
  mode: z.enum(["device", "replay", "synthetic"]),
});

export const configPatchMessageSchema = z.object({
  t: z.literal("configPatch"),
  key: z.string().min(1),
  value: z.unknown(),
});

export const clientMessageSchema = z.discriminatedUnion("t", [
  overrideMessageSchema,
  clearOverrideMessageSchema,
  transportMessageSchema,
  sourceMessageSchema,
  configPatchMessageSchema,
]);

export type Bands = z.infer<typeof bandsSchema>;
export type StateMessage = z.infer<typeof stateMessageSchema>;
export type SceneMessage = z.infer<typeof sceneMessageSchema>;
export type SceneGlyph = z.infer<typeof glyphSchema>;
export type MidiMessage = z.infer<typeof midiMessageSchema>;
export type LampsMessage = z.infer<typeof lampsMessageSchema>;
export type QualityMessage = z.infer<typeof qualityMessageSchema>;
export type ServerMessage = z.infer<typeof serverMessageSchema>;
export type ClientMessage = z.infer<typeof clientMessageSchema>;

/** Parse one inbound line; returns null for anything malformed. */
export function parseServerLine(line: string): ServerMessage | null {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch {
    return null;
  }
  const result = serverMessageSchema.safeParse(raw);
  return result.success ? result.data : null;
}

/** Serialize one outbound message; throws if it violates the schema. */
export function encodeClientMessage(msg: ClientMessage): string {
  return JSON.stringify(clientMessageSchema.parse(msg)) + "\n";
}
