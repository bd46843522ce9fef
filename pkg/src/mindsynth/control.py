"""Operator console endpoint: newline-delimited JSON over a local TCP
socket.

Server -> client message types: ``state``, ``scene``, ``midi``,
``lamps``, ``quality``. Client -> server: ``override``, ``transport``,
``source``, ``clearOverride``, ``configPatch``. A client's first message
after connecting is always a full state snapshot, so a console can paint
itself without waiting for the next telemetry tick.

The server thread never touches the engine directly: inbound commands go
onto a queue the tick thread drains, outbound messages are fanned out to
per-client bounded queues (oldest dropped first, so a slow console can't
stall the engine).
"""

from __future__ import annotations

import json
import queue
import socket
import threading

from .engine import Engine, Override, TelemetrySnapshot
from .sources import Scenario, SourceDescriptor

_CLIENT_QUEUE_MAX = 256


def state_message(snap: TelemetrySnapshot) -> dict:
    st = snap.state
    return {
        "t": "state",
        "tUs": st.t_us,
        "attention": st.attention,
        "relaxation": st.relaxation,
        "bands": {
            "delta": st.delta,
            "theta": st.theta,
            "alpha": st.alpha,
            "highAlpha": st.high_alpha,
            "beta": st.beta,
            "gamma": st.gamma,
            "avgGamma": st.avg_gamma,
        },
        "noisePct": st.noise_pct,
        "off": st.electrode_off,
        "hold": snap.quality_hold,
        "stopped": snap.stopped,
        "counters": snap.counters,
    }


def scene_message(scene) -> dict:
    return {
        "t": "scene",
        "w": scene.width,
        "h": scene.height,
        "glyphs": [
            {"x": g.x, "y": g.y, "d": g.diameter, "c": g.color_index, "a": g.alpha}
            for g in scene.glyphs
        ],
    }


def midi_message(data: bytes) -> dict:
    return {"t": "midi", "bytes": list(data)}


def lamps_message(frame) -> dict:
    return {
        "t": "lamps",
        "a": frame.lamp_attention,
        "b": frame.lamp_relaxation,
        "c": frame.lamp_both,
        "spray": frame.spray,
    }


def quality_message(state) -> dict:
    return {"t": "quality", "noisePct": state.noise_pct, "off": state.electrode_off}


class ControlServer:
    """Accepts console clients and bridges them to the tick loop."""

    def __init__(self, engine: Engine, port: int, host: str = "127.0.0.1"):
        self._engine = engine
        self.commands: queue.Queue = queue.Queue()
        self._clients: list[queue.Queue] = []
        self._lock = threading.Lock()
        self._last_state: dict | None = None
        self._closed = False
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((host, port))
        self._sock.listen(8)
        self.port = self._sock.getsockname()[1]
        self._accept_thread = threading.Thread(target=self._accept_loop, daemon=True)
        self._accept_thread.start()

    # -- outbound ----------------------------------------------------------

    def publish(self, message: dict) -> None:
        if message.get("t") == "state":
            self._last_state = message
        data = (json.dumps(message, separators=(",", ":")) + "\n").encode()
        with self._lock:
            clients = list(self._clients)
        for q in clients:
            while True:
                try:
                    q.put_nowait(data)
                    break
                except queue.Full:
                    try:
                        q.get_nowait()  # drop oldest telemetry
                    except queue.Empty:
                        break

    # -- inbound -----------------------------------------------------------

    def apply_pending(self) -> None:
        """Run queued client commands on the tick thread."""
        while True:
            try:
                msg, reply = self.commands.get_nowait()
            except queue.Empty:
                return
            try:
                self._apply(msg)
                reply({"t": "ok", "re": msg.get("t")})
            except (ValueError, KeyError) as exc:
                reply({"t": "error", "message": str(exc)})

    def _apply(self, msg: dict) -> None:
        kind = msg.get("t")
        if kind == "override":
            bands = {_camel_to_snake(k): v for k, v in msg.get("bands", {}).items()}
            self._engine.set_override(
                Override(
                    attention=msg.get("attention"),
                    relaxation=msg.get("relaxation"),
                    bands=bands,
                )
            )
        elif kind == "clearOverride":
            self._engine.clear_override()
        elif kind == "transport":
            cmd = msg.get("cmd")
            if cmd == "start":
                self._engine.start()
            elif cmd == "stop":
                self._engine.stop()
            else:
                raise ValueError(f"unknown transport command {cmd!r}")
        elif kind == "source":
            self._switch_source(msg.get("mode"))
        elif kind == "configPatch":
            self._engine.patch_config(msg["key"], msg["value"])
        else:
            raise ValueError(f"unknown message type {kind!r}")

    def _switch_source(self, mode) -> None:
        """Swap the engine's source; the link/path parameters must already
        be present in the engine config."""
        from .sources import open_source

        cfg = self._engine.config
        if mode not in ("synthetic", "replay", "device"):
            raise ValueError(f"unknown source mode {mode!r}")
        if mode == "replay" and not cfg.replay_path:
            raise ValueError("replay mode needs replay_path in the config")
        if mode == "device" and not (cfg.serial_port or cfg.tcp):
            raise ValueError("device mode needs serial_port or tcp in the config")
        descriptor = SourceDescriptor(
            mode=mode, raw_rate_hz=cfg.raw_rate_hz, block_size=cfg.block_size
        )
        scenario = Scenario.from_dict(cfg.scenario) if cfg.scenario else Scenario()
        self._engine.set_source(
            open_source(
                descriptor,
                replay_path=cfg.replay_path,
                scenario=scenario,
                seed=cfg.seed,
                serial_path=cfg.serial_port,
                tcp=cfg.tcp,
                baud=cfg.serial_baud,
            )
        )

    # -- plumbing ----------------------------------------------------------

    def _accept_loop(self):
        while True:
            try:
                conn, _ = self._sock.accept()
            except OSError:
                return
            if self._closed:
                conn.close()
                return
            threading.Thread(target=self._serve_client, args=(conn,), daemon=True).start()

    def _serve_client(self, conn: socket.socket):
        outq: queue.Queue = queue.Queue(maxsize=_CLIENT_QUEUE_MAX)
        # snapshot-on-join: a console paints immediately
        snap = state_message(self._engine.snapshot()) if self._last_state is None else self._last_state
        outq.put((json.dumps(snap, separators=(",", ":")) + "\n").encode())
        with self._lock:
            self._clients.append(outq)
        writer = threading.Thread(target=self._write_loop, args=(conn, outq), daemon=True)
        writer.start()
        try:
            buf = b""
            while not self._closed:
                chunk = conn.recv(4096)
                if not chunk:
                    break
                buf += chunk
                while b"\n" in buf:
                    line, buf = buf.split(b"\n", 1)
                    if not line.strip():
                        continue
                    self._handle_line(line, outq)
        except OSError:
            pass
        finally:
            with self._lock:
                if outq in self._clients:
                    self._clients.remove(outq)
            outq.put(None)  # wake the writer so it can exit
            try:
                conn.close()
            except OSError:
                pass

    def _handle_line(self, line: bytes, outq: queue.Queue):
        def reply(obj):
            try:
                outq.put_nowait((json.dumps(obj, separators=(",", ":")) + "\n").encode())
            except queue.Full:
                pass

        try:
            msg = json.loads(line)
            if not isinstance(msg, dict):
                raise ValueError("message must be a JSON object")
        except ValueError as exc:
            reply({"t": "error", "message": f"bad message: {exc}"})
            return
        self.commands.put((msg, reply))

    def _write_loop(self, conn: socket.socket, outq: queue.Queue):
        try:
            while True:
                item = outq.get()
                if item is None:
                    return
                conn.sendall(item)
        except OSError:
            pass

    def close(self):
        self._closed = True
        try:
            # wake the accept loop so the listener actually tears down
            with socket.create_connection(("127.0.0.1", self.port), timeout=0.5):
                pass
        except OSError:
            pass
        try:
            self._sock.close()
        except OSError:
            pass
        self._accept_thread.join(timeout=1.0)


def _camel_to_snake(name: str) -> str:
    out = []
    for ch in name:
        if ch.isupper():
            out.append("_")
            out.append(ch.lower())
        else:
            out.append(ch)
    return "".join(out)
