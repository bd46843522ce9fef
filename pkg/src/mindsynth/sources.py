"""Event sources: session replay, scripted synthesis, and live device
links (serial or TCP).

All three expose the same pull interface: ``poll(now_us)`` returns the
events that have become due since the last call, in timestamp order. The
engine owns exactly one source at a time and polls it from its tick
thread; sources are single-threaded state machines (the device source
hides its reader thread behind the same interface).
"""

from __future__ import annotations

import math
import os
import socket
import threading
from dataclasses import dataclass, field

from .events import (
    BAND_ORDER,
    BAND_POWER_MAX,
    Attention,
    BandPowers,
    EegEvent,
    Meditation,
    PoorSignal,
    RawSample,
    format_line,
    parse_line,
)
from .protocol import StreamParser
from .rng import SplitMix64


class SourceError(RuntimeError):
    """A source failed; the engine stops with this diagnostic."""


class SessionFormatError(ValueError):
    def __init__(self, path, line: int, message):
        super().__init__(f"{path}:{line}: {message}")
        self.line = line


@dataclass(frozen=True)
class SourceDescriptor:
    """Where telemetry comes from and at what nominal rates."""

    mode: str = "synthetic"  # device | replay | synthetic
    electrode_site: str = "FP1"
    reference_site: str = "A1"
    raw_rate_hz: int = 512
    block_size: int = 32

    def __post_init__(self):
        if self.mode not in ("device", "replay", "synthetic"):
            raise ValueError(f"unknown source mode {self.mode!r}")
        if self.raw_rate_hz <= 0 or self.block_size <= 0:
            raise ValueError("raw_rate_hz and block_size must be > 0")


def write_session(path, events) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ev in events:
            fh.write(format_line(ev) + "\n")


def read_session(path) -> list[EegEvent]:
    """Load a whole session file; any malformed line fails with its
    number so a broken recording is caught before the engine starts."""
    events = []
    last_t = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                ev = parse_line(line)
            except ValueError as exc:
                raise SessionFormatError(path, lineno, exc) from None
            if ev.t_us < last_t:
                raise SessionFormatError(path, lineno, "timestamps must be non-decreasing")
            last_t = ev.t_us
            events.append(ev)
    return events


class SessionRecorder:
    """Appends every source event to a session file as it arrives."""

    def __init__(self, path):
        self._fh = open(path, "w", encoding="utf-8")
        self.failed = False

    def write(self, events) -> None:
        if self.failed:
            return
        try:
            for ev in events:
                self._fh.write(format_line(ev) + "\n")
            self._fh.flush()
        except (OSError, ValueError):  # ValueError: handle already closed
            self.failed = True
            self.close()

    def close(self) -> None:
        try:
            self._fh.close()
        except OSError:
            pass


class ReplaySource:
    """Feeds a recorded session back on its original timeline (or all at
    once when no_wait is set)."""

    def __init__(self, path, no_wait: bool = False):
        self._events = read_session(path)
        self._pos = 0
        self._no_wait = no_wait

    @property
    def end_time_us(self) -> int:
        return self._events[-1].t_us if self._events else 0

    def poll(self, now_us: int) -> list[EegEvent]:
        if self._pos >= len(self._events):
            return []
        if self._no_wait:
            out = self._events[self._pos :]
            self._pos = len(self._events)
            return out
        end = self._pos
        while end < len(self._events) and self._events[end].t_us <= now_us:
            end += 1
        out = self._events[self._pos : end]
        self._pos = end
        return out

    def exhausted(self) -> bool:
        return self._pos >= len(self._events)

    def close(self):
        pass


@dataclass(frozen=True)
class Envelope:
    """Piecewise-linear scalar of time; constant beyond its endpoints."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.points:
            raise ValueError("envelope needs at least one point")
        times = [t for t, _ in self.points]
        if times != sorted(times):
            raise ValueError("envelope breakpoints must be time-ordered")

    def value_at(self, t_s: float) -> float:
        pts = self.points
        if t_s <= pts[0][0]:
            return pts[0][1]
        for (t0, v0), (t1, v1) in zip(pts, pts[1:]):
            if t_s <= t1:
                if t1 == t0:
                    return v1
                frac = (t_s - t0) / (t1 - t0)
                return v0 + (v1 - v0) * frac
        return pts[-1][1]


def _env(value) -> Envelope:
    if isinstance(value, Envelope):
        return value
    if isinstance(value, (int, float)):
        return Envelope(((0.0, float(value)),))
    return Envelope(tuple((float(t), float(v)) for t, v in value))


#: sub-band carrier frequencies for the synthesized raw waveform (Hz)
BAND_CARRIERS = {
    "delta": 2.0,
    "theta": 6.0,
    "low_alpha": 9.0,
    "high_alpha": 11.0,
    "low_beta": 14.0,
    "high_beta": 25.0,
    "low_gamma": 40.0,
    "mid_gamma": 60.0,
}

_RAW_FULL_SCALE = 3000.0  # per-band sinusoid amplitude in ADC counts
_NOISE_FULL_SCALE = 1000.0


@dataclass(frozen=True)
class Scenario:
    """Scripted envelopes standing in for a live user."""

    attention: Envelope = field(default_factory=lambda: _env(55.0))
    meditation: Envelope = field(default_factory=lambda: _env(60.0))
    poor_signal: Envelope = field(default_factory=lambda: _env(0.0))
    noise: Envelope = field(default_factory=lambda: _env(0.1))
    bands: dict = field(
        default_factory=lambda: {name: _env(0.3 if name != "low_alpha" else 1.0) for name in BAND_ORDER}
    )

    @classmethod
    def from_dict(cls, doc: dict) -> "Scenario":
        known = {"attention", "meditation", "poor_signal", "noise", "bands"}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
        kwargs = {}
        for key in ("attention", "meditation", "poor_signal", "noise"):
            if key in doc:
                kwargs[key] = _env(doc[key])
        if "bands" in doc:
            bands = {name: _env(0.0) for name in BAND_ORDER}
            for name, env in doc["bands"].items():
                if name not in BAND_ORDER:
                    raise ValueError(f"unknown band {name!r}")
                bands[name] = _env(env)
            kwargs["bands"] = bands
        return cls(**kwargs)


class SyntheticSource:
    """Deterministic generator: raw-sample blocks at the configured rate
    plus once-per-second attention/meditation/quality/band markers.

    The raw waveform is a sum of one band-limited sinusoid per sub-band,
    weighted by the scripted envelopes, plus uniform noise from a seeded
    splitmix stream. Same (scenario, descriptor, seed) => same events.
    """

    def __init__(self, scenario: Scenario, descriptor: SourceDescriptor, seed: int = 0):
        self._scenario = scenario
        self._rate = descriptor.raw_rate_hz
        self._block = descriptor.block_size
        self._rng = SplitMix64(seed)
        self._next_sample = 0  # index of the next raw sample to emit
        self._next_marker_s = 0  # whole seconds
        self._carriers = [(BAND_CARRIERS[name], scenario.bands[name]) for name in BAND_ORDER]

    def _marker_events(self, sec: int) -> list[EegEvent]:
        t_us = sec * 1_000_000
        t = float(sec)
        sc = self._scenario
        att = min(100, max(0, round(sc.attention.value_at(t))))
        med = min(100, max(0, round(sc.meditation.value_at(t))))
        poor = min(200, max(0, round(sc.poor_signal.value_at(t))))
        powers = []
        for name in BAND_ORDER:
            w = min(1.0, max(0.0, sc.bands[name].value_at(t)))
            powers.append(round(w * BAND_POWER_MAX))
        return [
            EegEvent(t_us, PoorSignal(poor)),
            EegEvent(t_us, Attention(att)),
            EegEvent(t_us, Meditation(med)),
            EegEvent(t_us, BandPowers(*powers)),
        ]

    def _raw_block(self) -> list[EegEvent]:
        out = []
        noise_env = self._scenario.noise
        for n in range(self._next_sample, self._next_sample + self._block):
            t = (n + 1) / self._rate
            v = 0.0
            for freq, env in self._carriers:
                w = env.value_at(t)
                if w:
                    v += w * _RAW_FULL_SCALE * math.sin(2.0 * math.pi * freq * t)
            u = self._rng.uniform()  # always drawn: keeps the stream aligned
            nz = noise_env.value_at(t)
            if nz:
                v += nz * _NOISE_FULL_SCALE * (2.0 * u - 1.0)
            value = min(32767, max(-32768, round(v)))
            out.append(EegEvent(round((n + 1) * 1e6 / self._rate), RawSample(value)))
        self._next_sample += self._block
        return out

    def poll(self, now_us: int) -> list[EegEvent]:
        events = []
        while True:
            marker_us = self._next_marker_s * 1_000_000
            block_end_us = round((self._next_sample + self._block) * 1e6 / self._rate)
            if marker_us <= now_us and marker_us < block_end_us:
                events.extend(self._marker_events(self._next_marker_s))
                self._next_marker_s += 1
            elif block_end_us <= now_us:
                events.extend(self._raw_block())
            else:
                return events

    def close(self):
        pass


def _open_serial(path, baud: int):
    """Open a serial device read-only in raw mode.

    termios keeps this dependency-free; on a pty (used by the tests) the
    baud setting is a no-op and failures to set it are ignored.
    """
    import termios

    fd = os.open(path, os.O_RDONLY | os.O_NONBLOCK | os.O_NOCTTY)
    try:
        attrs = termios.tcgetattr(fd)
        speed = {9600: termios.B9600, 57600: termios.B57600}.get(baud)
        if speed is None:
            raise SourceError(f"unsupported baud rate {baud}")
        attrs[0] = 0  # iflag: raw input
        attrs[1] = 0  # oflag
        attrs[2] = termios.CREAD | termios.CLOCAL | termios.CS8  # 8N1
        attrs[3] = 0  # lflag: non-canonical
        attrs[4] = speed
        attrs[5] = speed
        termios.tcsetattr(fd, termios.TCSANOW, attrs)
    except termios.error:
        pass  # not a real tty (pty/pipe): keep going with default attrs
    return fd


class DeviceSource:
    """Live telemetry from a serial path or TCP host:port.

    A reader thread drains the link into a byte buffer; poll() runs the
    stream parser over whatever has arrived, stamps events with the poll
    time, and back-spaces runs of raw samples so each block ends at its
    arrival time.
    """

    def __init__(self, descriptor: SourceDescriptor, serial_path=None, tcp=None, baud: int = 57600):
        self._descriptor = descriptor
        self._parser = StreamParser()
        self._buf = bytearray()
        self._lock = threading.Lock()
        self._error: str | None = None
        self._closed = False
        self._last_t_us = 0
        self.parse_errors = 0
        if (serial_path is None) == (tcp is None):
            raise SourceError("need exactly one of serial_path or tcp")
        if serial_path is not None:
            try:
                self._fd = _open_serial(serial_path, baud)
            except OSError as exc:
                raise SourceError(f"cannot open {serial_path}: {exc}") from None
            self._sock = None
        else:
            host, _, port = tcp.partition(":")
            try:
                self._sock = socket.create_connection((host, int(port)), timeout=5.0)
            except OSError as exc:
                raise SourceError(f"cannot connect to {tcp}: {exc}") from None
            self._fd = None
        self._thread = threading.Thread(target=self._reader, daemon=True)
        self._thread.start()

    def _reader(self):
        try:
            while not self._closed:
                if self._sock is not None:
                    chunk = self._sock.recv(4096)
                else:
                    try:
                        chunk = os.read(self._fd, 4096)
                    except BlockingIOError:
                        threading.Event().wait(0.005)
                        continue
                if not chunk:
                    if self._sock is not None:
                        raise OSError("connection closed")
                    threading.Event().wait(0.005)
                    continue
                with self._lock:
                    self._buf += chunk
        except OSError as exc:
            if not self._closed:
                self._error = str(exc)

    def poll(self, now_us: int) -> list[EegEvent]:
        if self._error:
            raise SourceError(self._error)
        with self._lock:
            chunk = bytes(self._buf)
            del self._buf[:]
        if not chunk:
            return []
        events, errors = self._parser.feed(chunk, now_us)
        self.parse_errors += len(errors)
        return self._respace_raw(events, now_us)

    def _respace_raw(self, events, now_us):
        """Spread consecutive raw samples 1/rate apart, ending at the
        arrival time, clamped so the stream stays non-decreasing."""
        step = 1e6 / self._descriptor.raw_rate_hz
        out = []
        i = 0
        while i < len(events):
            if isinstance(events[i].kind, RawSample):
                j = i
                while j < len(events) and isinstance(events[j].kind, RawSample):
                    j += 1
                run = events[i:j]
                for idx, ev in enumerate(run):
                    t = now_us - round((len(run) - 1 - idx) * step)
                    t = max(t, self._last_t_us)
                    self._last_t_us = t
                    out.append(EegEvent(t, ev.kind))
                i = j
            else:
                t = max(events[i].t_us, self._last_t_us)
                self._last_t_us = t
                out.append(EegEvent(t, events[i].kind))
                i += 1
        return out

    def close(self):
        self._closed = True
        if self._sock is not None:
            try:
                self._sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            self._sock.close()
        if self._fd is not None:
            os.close(self._fd)


def open_source(descriptor: SourceDescriptor, *, replay_path=None, no_wait=False,
                scenario=None, seed=0, serial_path=None, tcp=None, baud=57600):
    """Build the source named by the descriptor's mode."""
    if descriptor.mode == "replay":
        if replay_path is None:
            raise SourceError("replay mode needs a session path")
        return ReplaySource(replay_path, no_wait=no_wait)
    if descriptor.mode == "synthetic":
        return SyntheticSource(scenario or Scenario(), descriptor, seed=seed)
    return DeviceSource(descriptor, serial_path=serial_path, tcp=tcp, baud=baud)
