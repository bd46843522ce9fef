"""Tick-loop orchestration of the whole pipeline.

One tick: drain the source, run the DSP chain on any completed raw
epochs (dropping blink-flagged ones), fuse the MindState, then fan out to
the mappers on their own cadences (bars of MIDI, art frames, lamp
commands), all gated on signal quality. Everything is driven by the
virtual clock handed to tick(), so a run is a pure function of (config,
seed, source events): replaying a recording reproduces every output byte.

Threading contract: one acquisition producer (inside DeviceSource), one
tick thread, one control-service thread. Data crosses only as immutable
snapshots or queued messages; telemetry queues drop oldest, source events
are never dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import dsp
from .art import ArtState, Scene, circle_field_frame
from .config import BAND_PAIRS, EngineConfig
from .events import BAND_POWER_MAX, BlinkStrength, EegEvent, RawSample
from .lights import CommandEncoder, LampFrame, lamp_frame, spray_policy
from .mindstate import BAND_FIELDS, INITIAL_STATE, MindState, fuse, normalize_band_power
from .music import PatternBank, bank_from_rows, default_bank, render_bar
from .sources import SourceError


@dataclass(frozen=True)
class TelemetrySnapshot:
    state: MindState
    scene: Scene | None
    lamps: LampFrame | None
    counters: dict
    quality_hold: bool
    session_ended: bool
    stopped: bool
    diagnostic: str | None


@dataclass
class TickOutput:
    telemetry: TelemetrySnapshot | None
    midi: bytes = b""
    bar: list | None = None  # the bar's MidiMessages, for SMF export
    scene: Scene | None = None
    lamp_bytes: tuple[bytes, bytes, bytes] | None = None
    lamps: LampFrame | None = None


@dataclass(frozen=True)
class Override:
    attention: int | None = None
    relaxation: int | None = None
    bands: dict = field(default_factory=dict)

    def validate(self):
        for v in (self.attention, self.relaxation):
            if v is not None and not (isinstance(v, int) and 0 <= v <= 127):
                raise ValueError(f"override value {v!r} not an integer in 0..127")
        for name, v in self.bands.items():
            if name not in BAND_FIELDS:
                raise ValueError(f"unknown band {name!r}")
            if not (isinstance(v, int) and 0 <= v <= 100):
                raise ValueError(f"band override {v!r} not an integer in 0..100")


def _load_bank(spec) -> PatternBank:
    if spec is None:
        return default_bank()
    if isinstance(spec, str):
        import json

        with open(spec, encoding="utf-8") as fh:
            return bank_from_rows(json.load(fh))
    return bank_from_rows(spec)


class _Cadence:
    """Emit-at-fixed-rate helper on the virtual clock."""

    def __init__(self, rate_hz: float):
        self.period_us = round(1e6 / rate_hz)
        self.next_us = 0
        self.count = 0

    def due(self, now_us: int) -> bool:
        if now_us >= self.next_us:
            # realign past `now` so a transport pause never causes a
            # catch-up burst on restart
            while self.next_us <= now_us:
                self.next_us += self.period_us
            self.count += 1
            return True
        return False


class Engine:
    def __init__(self, config: EngineConfig, source):
        self.config = config
        self.source = source
        # _fused is the pure pipeline value; state is what mappers see
        # (operator overrides applied on top, reverted when cleared)
        self._fused: MindState = INITIAL_STATE
        self.state: MindState = INITIAL_STATE
        self.bank: PatternBank = _load_bank(config.pattern_bank)
        self.palette = [tuple(c) for c in config.palette]
        self._cc_band, self._div_band = BAND_PAIRS[config.band_pair]
        self._bar = _Cadence(config.bar_rate_hz)
        self._frame = _Cadence(config.frame_rate_hz)
        self._telemetry = _Cadence(config.telemetry_rate_hz)
        self._encoder = CommandEncoder(config.spray_link)
        self._raw = np.empty(0, dtype=np.float64)
        self._raw_t_us = np.empty(0, dtype=np.float64)  # per-sample stamps
        self._epoch_len = round(config.epoch_s * config.raw_rate_hz)
        self._recent_blinks: list[EegEvent] = []
        self._override: Override | None = None
        self._last_spray_s = -math.inf
        self._last_scene: Scene | None = None
        self._last_lamps: LampFrame | None = None
        self._recorder = None
        self._running = True
        self._diagnostic: str | None = None
        self._session_ended = False
        self.counters = {
            "events": 0,
            "raw_samples": 0,
            "epochs": 0,
            "epochs_flagged": 0,
            "bars": 0,
            "frames": 0,
            "lamp_bytes": 0,
            "quality_holds": 0,
            "record_failures": 0,
        }

    # -- control surface -------------------------------------------------

    @property
    def running(self) -> bool:
        return self._running

    def start(self):
        self._running = True

    def stop(self, diagnostic: str | None = None):
        self._running = False
        if diagnostic:
            self._diagnostic = diagnostic

    def set_override(self, override: Override):
        override.validate()  # reject bad values before touching state
        self._override = override

    def clear_override(self):
        self._override = None

    def set_source(self, source):
        if self.source is not None:
            self.source.close()
        self.source = source
        self._diagnostic = None

    #: config keys the engine reads per tick, safe to patch while running
    PATCHABLE_KEYS = frozenset(
        {
            "tempo_bpm",
            "att_cc",
            "med_cc",
            "note_len_ticks",
            "artifact_k",
            "band_source",
            "band_smoothing",
            "esense_smoothing",
            "quality_max_noise_pct",
            "seed",
            "band_pair",
            "interval_colors",
            "spray_min_relaxation",
            "spray_cooldown_s",
            "max_session_s",
        }
    )

    def patch_config(self, key: str, value):
        if key not in self.PATCHABLE_KEYS:
            raise ValueError(f"config key {key!r} cannot be patched at runtime")
        self.config = self.config.merged(**{key: value})
        self._cc_band, self._div_band = BAND_PAIRS[self.config.band_pair]

    def record_to(self, recorder):
        self._recorder = recorder

    # -- pipeline ---------------------------------------------------------

    def _drain(self, now_us: int) -> list[EegEvent]:
        if not self._running or self.source is None:
            return []
        try:
            events = self.source.poll(now_us)
        except SourceError as exc:
            self.stop(str(exc))
            return []
        if events and self._recorder is not None:
            before = self._recorder.failed
            self._recorder.write(events)
            if self._recorder.failed and not before:
                self.counters["record_failures"] += 1
                self._recorder = None  # recording stops, the engine continues
        self.counters["events"] += len(events)
        return events

    def _accumulate_raw(self, events):
        raws = [ev for ev in events if isinstance(ev.kind, RawSample)]
        if raws:
            self.counters["raw_samples"] += len(raws)
            self._raw = np.concatenate(
                [self._raw, np.asarray([e.kind.value for e in raws], dtype=np.float64)]
            )
            self._raw_t_us = np.concatenate(
                [self._raw_t_us, np.asarray([e.t_us for e in raws], dtype=np.float64)]
            )
        for ev in events:
            if isinstance(ev.kind, BlinkStrength):
                self._recent_blinks.append(ev)
        # keep only blinks young enough to matter for pending epochs
        if self._recent_blinks and len(self._raw_t_us):
            horizon = self._raw_t_us[0] - 5e6
            self._recent_blinks = [e for e in self._recent_blinks if e.t_us >= horizon]

    def _dsp_bands(self) -> dict[str, int] | None:
        """Consume completed epochs; return fresh scalars from the newest
        clean one (only when band_source is 'dsp')."""
        fresh = None
        rate = self.config.raw_rate_hz
        while len(self._raw) >= self._epoch_len:
            samples = self._raw[: self._epoch_len]
            start_s = float(self._raw_t_us[0]) / 1e6  # stream time, not index
            self._raw = self._raw[self._epoch_len :]
            self._raw_t_us = self._raw_t_us[self._epoch_len :]
            epoch = dsp.Epoch(start_s, samples, rate)
            self.counters["epochs"] += 1
            if dsp.detect_blink_artifact(epoch, self._recent_blinks, k=self.config.artifact_k):
                self.counters["epochs_flagged"] += 1
                continue
            if self.config.band_source == "dsp":
                fresh = self._bands_from_epoch(epoch)
        return fresh

    def _bands_from_epoch(self, epoch) -> dict[str, int]:
        """Band scalars from a raw-EEG spectrum: each band's share of the
        total in-band power, scaled onto the 24-bit wire domain and then
        through the same log normalization the device path uses."""
        spectrum = dsp.power_spectrum(epoch)
        powers = dsp.band_powers(spectrum)
        for name, band in dsp.SUB_BANDS.items():
            powers[name] = dsp.band_power(spectrum, band)
        main_total = sum(powers[b.name] for b in dsp.BANDS)
        if main_total <= 0:
            return {name: 0 for name in BAND_FIELDS}

        def scaled(name):
            share = powers[name] / main_total
            return normalize_band_power(min(BAND_POWER_MAX, round(share * BAND_POWER_MAX)))

        low_gamma, mid_gamma = scaled("low_gamma"), scaled("mid_gamma")
        return {
            "delta": scaled("delta"),
            "theta": scaled("theta"),
            "alpha": scaled("alpha"),
            "high_alpha": scaled("high_alpha"),
            "beta": scaled("low_beta"),
            "gamma": low_gamma,
            "avg_gamma": (low_gamma + mid_gamma + 1) // 2,
        }

    def _apply_override(self, state: MindState) -> MindState:
        ov = self._override
        if ov is None:
            return state
        fields = {}
        if ov.attention is not None:
            fields["attention"] = ov.attention
        if ov.relaxation is not None:
            fields["relaxation"] = ov.relaxation
        fields.update(ov.bands)
        return replace(state, **fields) if fields else state

    def tick(self, now_us: int) -> TickOutput:
        cfg = self.config
        if not self._session_ended and now_us >= cfg.max_session_s * 1e6:
            self._session_ended = True
            self.stop("session cap reached")

        events = self._drain(now_us)
        self._accumulate_raw(events)
        # epochs are always consumed (artifact accounting); the scalars
        # they yield are used only on the dsp band path
        fresh_bands = self._dsp_bands()
        self._fused = fuse(
            self._fused,
            events,
            now_us,
            fresh_bands=fresh_bands,
            band_smoothing=cfg.band_smoothing,
            esense_smoothing=cfg.esense_smoothing,
        )
        self.state = self._apply_override(self._fused)

        acceptable = (
            self.state.noise_pct < cfg.quality_max_noise_pct and not self.state.electrode_off
        )
        out = TickOutput(telemetry=None)

        bar_due = self._running and self._bar.due(now_us)
        frame_due = self._running and self._frame.due(now_us)
        if not acceptable:
            if bar_due or frame_due:
                self.counters["quality_holds"] += 1
        else:
            if bar_due:
                bar = render_bar(
                    self.state, self.bank, cfg.note_len_ticks, cfg.att_cc, cfg.med_cc
                )
                out.bar = bar
                out.midi = b"".join(m.to_bytes() for m in bar)
                self.counters["bars"] += 1
            if frame_due:
                art_state = ArtState(
                    cc=self.state.band(self._cc_band),
                    div=max(1, self.state.band(self._div_band)),
                    att=self.state.attention,
                    med=self.state.relaxation,
                    time_s=now_us / 1e6,
                    seed=cfg.seed,
                    width=cfg.width,
                    height=cfg.height,
                )
                out.scene = circle_field_frame(art_state, len(self.palette))
                self._last_scene = out.scene
                self.counters["frames"] += 1
            if self._running:
                now_s = now_us / 1e6
                frame = lamp_frame(self.state, tuple(cfg.interval_colors))
                if spray_policy(
                    self.state,
                    self._last_spray_s,
                    now_s,
                    cfg.spray_min_relaxation,
                    cfg.spray_cooldown_s,
                ):
                    frame = replace(frame, spray=True)
                    self._last_spray_s = now_s
                lamp_bytes = self._encoder.encode(frame)
                self._last_lamps = frame
                if any(lamp_bytes):
                    out.lamp_bytes = lamp_bytes
                    out.lamps = frame
                    self.counters["lamp_bytes"] += sum(len(b) for b in lamp_bytes)

        if self._telemetry.due(now_us):
            out.telemetry = self.snapshot(quality_hold=not acceptable)
        return out

    def snapshot(self, quality_hold: bool | None = None) -> TelemetrySnapshot:
        if quality_hold is None:
            quality_hold = not self.state.acceptable
        return TelemetrySnapshot(
            state=self.state,
            scene=self._last_scene,
            lamps=self._last_lamps,
            counters=dict(self.counters),
            quality_hold=quality_hold,
            session_ended=self._session_ended,
            stopped=not self._running,
            diagnostic=self._diagnostic,
        )
