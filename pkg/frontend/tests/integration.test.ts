/**
 * Live tests against the real engine: spawn the CLI with a control port,
 * connect over TCP, and exercise the acceptance behaviors end to end.
 */

import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterEach, describe, expect, it } from "vitest";

import { ConsoleClient, tcpTransport } from "../src/client.js";
import { ServerMessage, StateMessage } from "../src/protocol.js";

const REPO_ROOT = join(__dirname, "..", "..");

interface EngineHandle {
  proc: ChildProcess;
  port: number;
  done: Promise<number>;
}

function startEngine(extraArgs: string[], durationS = 20): Promise<EngineHandle> {
  const args = [
    "-m",
    "mindsynth.cli",
    "run",
    "--source",
    "synthetic",
    "--seed",
    "4242",
    "--duration",
    String(durationS),
    "--control-port",
    "0",
    ...extraArgs,
  ];
  const proc = spawn("python3", args, { cwd: REPO_ROOT });
  const done = new Promise<number>((resolve) => proc.on("exit", (code) => resolve(code ?? -1)));
  return new Promise((resolve, reject) => {
    let buffer = "";
    const timer = setTimeout(() => reject(new Error("engine never announced a port")), 10000);
    proc.stdout!.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
      const match = buffer.match(/control_port: (\d+)/);
      if (match) {
        clearTimeout(timer);
        resolve({ proc, port: Number(match[1]), done });
      }
    });
    proc.on("error", reject);
  });
}

function connect(port: number): Promise<{ client: ConsoleClient; messages: ServerMessage[] }> {
  return new Promise((resolve, reject) => {
    const client = new ConsoleClient(tcpTransport("127.0.0.1", port), { backoffMs: 200 });
    const messages: ServerMessage[] = [];
    const timer = setTimeout(() => reject(new Error("connect timed out")), 5000);
    client.onMessage = (msg) => messages.push(msg);
    client.onStatus = (status) => {
      if (status === "connected") {
        clearTimeout(timer);
        resolve({ client, messages });
      }
    };
    client.connect();
  });
}

function waitFor<T>(
  poll: () => T | undefined,
  timeoutMs: number,
  what: string,
): Promise<{ value: T; elapsedMs: number }> {
  const start = Date.now();
  return new Promise((resolve, reject) => {
    const timer = setInterval(() => {
      const value = poll();
      if (value !== undefined) {
        clearInterval(timer);
        resolve({ value, elapsedMs: Date.now() - start });
      } else if (Date.now() - start > timeoutMs) {
        clearInterval(timer);
        reject(new Error(`timed out waiting for ${what}`));
      }
    }, 5);
  });
}

const cleanups: Array<() => void> = [];
afterEach(() => {
  while (cleanups.length) cleanups.pop()!();
});

describe("console against a live engine", () => {
  it("shows the current state within 250 ms of connecting", async () => {
    const engine = await startEngine([]);
    cleanups.push(() => engine.proc.kill());
    const { client, messages } = await connect(engine.port);
    cleanups.push(() => client.close());
    const { value, elapsedMs } = await waitFor(
      () => messages.find((m): m is StateMessage => m.t === "state"),
      250,
      "first state snapshot",
    );
    expect(elapsedMs).toBeLessThanOrEqual(250);
    expect(value.attention).toBeGreaterThanOrEqual(0);
    expect(value.bands).toBeDefined();
  }, 20000);

  it("attention slider override reaches telemetry within one state period", async () => {
    const engine = await startEngine([]);
    cleanups.push(() => engine.proc.kill());
    const { client, messages } = await connect(engine.port);
    cleanups.push(() => client.close());
    await waitFor(() => messages.find((m) => m.t === "state"), 2000, "snapshot");

    client.send({ t: "override", attention: 64 });
    const statePeriodMs = 250; // telemetry runs at 4 Hz
    const seen = messages.length;
    const { elapsedMs } = await waitFor(
      () =>
        messages
          .slice(seen)
          .find((m): m is StateMessage => m.t === "state" && m.attention === 64),
      statePeriodMs + 150, // one period plus tick/transit slack
      "override reflected in state",
    );
    expect(elapsedMs).toBeLessThanOrEqual(statePeriodMs + 150);

    client.send({ t: "clearOverride" });
    await waitFor(
      () => messages.find((m) => m.t === "ok" && m.re === "clearOverride"),
      2000,
      "clear acknowledged",
    );
  }, 20000);

  it("a watching console never changes what the engine records", async () => {
    const dir = mkdtempSync(join(tmpdir(), "mindsynth-"));
    const watched = join(dir, "watched.session");
    const unwatched = join(dir, "unwatched.session");

    // run A: paced, console attached for the whole session, only listening
    const engineA = await startEngine(["--record", watched], 6);
    const { client } = await connect(engineA.port);
    let count = 0;
    client.onMessage = () => {
      count += 1;
    };
    await engineA.done;
    client.close();
    expect(count).toBeGreaterThan(5); // it really was watching live telemetry

    // run B: nobody connected
    const engineB = await startEngine(["--record", unwatched, "--no-pace"], 6);
    await engineB.done;

    expect(readFileSync(watched)).toEqual(readFileSync(unwatched));
  }, 40000);
});
