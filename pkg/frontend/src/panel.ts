/**
 * Panel state: a pure reducer over received messages plus helpers that
 * build outbound control messages from slider gestures.
 *
 * Everything rendered comes from received messages; the panel never
 * invents values. The MIDI log keeps the last 200 messages.
 */

import {
  Bands,
  ClientMessage,
  LampsMessage,
  QualityMessage,
  SceneMessage,
  ServerMessage,
  StateMessage,
} from "./protocol.js";
import { ConnectionStatus } from "./client.js";

export const MIDI_LOG_LIMIT = 200;

export interface MidiLogEntry {
  kind: "noteOn" | "noteOff" | "cc" | "other";
  text: string;
}

export interface SliderGesture {
  attention?: number;
  relaxation?: number;
  bands?: Partial<Bands>;
}

export interface PanelState {
  connection: ConnectionStatus;
  state: StateMessage | null;
  scene: SceneMessage | null;
  lamps: LampsMessage | null;
  quality: QualityMessage | null;
  /** override values the operator has dialed in and not yet released */
  pendingOverride: SliderGesture;
  midiLog: MidiLogEntry[];
  lastError: string | null;
  errorCount: number;
}

export function initialPanelState(): PanelState {
  return {
    connection: "disconnected",
    state: null,
    scene: null,
    lamps: null,
    quality: null,
    pendingOverride: {},
    midiLog: [],
    lastError: null,
    errorCount: 0,
  };
}

const NOTE_NAMES = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"];

/** MIDI note number -> name, middle C (60) = C4. */
export function noteName(num: number): string {
  const octave = Math.floor(num / 12) - 1;
  return `${NOTE_NAMES[num % 12]}${octave}`;
}

export function midiLogEntries(bytes: number[]): MidiLogEntry[] {
  const entries: MidiLogEntry[] = [];
  for (let i = 0; i + 3 <= bytes.length; i += 3) {
    const [status, d1, d2] = [bytes[i], bytes[i + 1], bytes[i + 2]];
    const kind = status & 0xf0;
    if (kind === 0x90) {
      entries.push({ kind: "noteOn", text: `${noteName(d1)} on vel ${d2}` });
    } else if (kind === 0x80) {
      entries.push({ kind: "noteOff", text: `${noteName(d1)} off` });
    } else if (kind === 0xb0) {
      entries.push({ kind: "cc", text: `cc${d1} = ${d2}` });
    } else {
      entries.push({ kind: "other", text: `status 0x${status.toString(16)}` });
    }
  }
  return entries;
}

export function applyMessage(panel: PanelState, msg: ServerMessage): PanelState {
  switch (msg.t) {
    case "state":
      return { ...panel, state: msg };
    case "scene":
      return { ...panel, scene: msg };
    case "lamps":
      return { ...panel, lamps: msg };
    case "quality":
      return { ...panel, quality: msg };
    case "midi": {
      const midiLog = [...panel.midiLog, ...midiLogEntries(msg.bytes)];
      return { ...panel, midiLog: midiLog.slice(-MIDI_LOG_LIMIT) };
    }
    case "error":
      return { ...panel, lastError: msg.message, errorCount: panel.errorCount + 1 };
    case "ok":
      return panel;
  }
}

export function applyStatus(panel: PanelState, status: ConnectionStatus): PanelState {
  return { ...panel, connection: status };
}

/**
 * Control message for the sliders the operator actually moved; null when
 * nothing moved (no message goes on the wire). Sliders live on the 0-127
 * scale, the same domain the mappers consume.
 */
export function buildOverride(moved: SliderGesture): ClientMessage | null {
  const msg: { t: "override"; attention?: number; relaxation?: number; bands?: Partial<Bands> } = {
    t: "override",
  };
  if (moved.attention !== undefined) msg.attention = moved.attention;
  if (moved.relaxation !== undefined) msg.relaxation = moved.relaxation;
  if (moved.bands && Object.keys(moved.bands).length > 0) msg.bands = moved.bands;
  if (msg.attention === undefined && msg.relaxation === undefined && msg.bands === undefined) {
    return null;
  }
  return msg;
}

export function releaseOverride(): ClientMessage {
  return { t: "clearOverride" };
}

/**
 * Fold a slider gesture into the panel's pending override; returns the
 * next panel plus the message to send (null when nothing moved).
 */
export function applyGesture(
  panel: PanelState,
  gesture: SliderGesture,
): { panel: PanelState; message: ClientMessage | null } {
  const message = buildOverride(gesture);
  if (message === null) return { panel, message: null };
  const pending: SliderGesture = {
    ...panel.pendingOverride,
    ...(gesture.attention !== undefined ? { attention: gesture.attention } : {}),
    ...(gesture.relaxation !== undefined ? { relaxation: gesture.relaxation } : {}),
  };
  if (gesture.bands && Object.keys(gesture.bands).length > 0) {
    pending.bands = { ...panel.pendingOverride.bands, ...gesture.bands };
  }
  return { panel: { ...panel, pendingOverride: pending }, message };
}

/** Release all pending overrides; returns the clearOverride message. */
export function releaseGesture(panel: PanelState): { panel: PanelState; message: ClientMessage } {
  return { panel: { ...panel, pendingOverride: {} }, message: releaseOverride() };
}

export function transport(cmd: "start" | "stop"): ClientMessage {
  return { t: "transport", cmd };
}

export function selectSource(mode: "device" | "replay" | "synthetic"): ClientMessage {
  return { t: "source", mode };
}
