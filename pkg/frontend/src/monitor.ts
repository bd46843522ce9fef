/**
 * Minimal terminal monitor: connect to a running engine and print the
 * live state line, lamp commands and MIDI log tail.
 *
 *   npm run monitor -- [host] [port]
 */

import { ConsoleClient, tcpTransport } from "./client.js";
import { applyMessage, applyStatus, initialPanelState } from "./panel.js";

const host = process.argv[2] ?? "127.0.0.1";
const port = Number(process.argv[3] ?? 8330);

let panel = initialPanelState();
const client = new ConsoleClient(tcpTransport(host, port));

function render(): void {
  const st = panel.state;
  const lamps = panel.lamps;
  const parts = [
    `[${panel.connection}]`,
    st
      ? `att ${st.attention.toString().padStart(3)}  rel ${st.relaxation.toString().padStart(3)}  ` +
        `noise ${st.noisePct.toFixed(1)}%${st.off ? " ELECTRODE OFF" : ""}${st.hold ? " HOLD" : ""}`
      : "waiting for state...",
    lamps ? `lamps ${lamps.a}${lamps.b}${lamps.c}${lamps.spray ? " S" : ""}` : "",
    panel.midiLog.length ? `midi: ${panel.midiLog[panel.midiLog.length - 1].text}` : "",
  ];
  process.stdout.write("\r" + parts.filter(Boolean).join("  |  ").padEnd(110));
}

client.onMessage = (msg) => {
  panel = applyMessage(panel, msg);
  render();
};
client.onStatus = (status) => {
  panel = applyStatus(panel, status);
  render();
};
client.connect();

process.on("SIGINT", () => {
  client.close();
  process.stdout.write("\n");
  process.exit(0);
});
