"""Drives the engine's tick loop against real or virtual time and fans
outputs out to sinks (MIDI byte stream, frame files, serial links,
session recorder, control server).

All timing comes from the tick index, so two runs with the same config
and source events write identical bytes; pacing only sleeps between
ticks, it never feeds the clock.
"""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import dataclass

from . import control as control_mod
from .art import rasterize, write_ppm, write_scene, write_svg
from .config import EngineConfig
from .engine import Engine
from .sources import (
    Scenario,
    SessionRecorder,
    SourceDescriptor,
    open_source,
)


@dataclass
class Sinks:
    midi_path: str | None = None
    frames_dir: str | None = None
    serial_paths: tuple = ()
    record_path: str | None = None
    ppm: bool = False
    svg: bool = False


def descriptor_from_config(cfg: EngineConfig, mode: str | None = None) -> SourceDescriptor:
    return SourceDescriptor(
        mode=mode or cfg.mode,
        electrode_site=cfg.electrode_site,
        reference_site=cfg.reference_site,
        raw_rate_hz=cfg.raw_rate_hz,
        block_size=cfg.block_size,
    )


def build_source(cfg: EngineConfig, mode: str | None = None, scenario: Scenario | None = None):
    descriptor = descriptor_from_config(cfg, mode)
    if scenario is None and cfg.scenario is not None:
        scenario = Scenario.from_dict(cfg.scenario)
    return open_source(
        descriptor,
        replay_path=cfg.replay_path,
        scenario=scenario,
        seed=cfg.seed,
        serial_path=cfg.serial_port,
        tcp=cfg.tcp,
        baud=cfg.serial_baud,
    )


class _FrameWriter:
    def __init__(self, frames_dir, palette, ppm=False, svg=False):
        self._dir = frames_dir
        self._palette = palette
        self._ppm = ppm
        self._svg = svg
        self._count = 0
        os.makedirs(frames_dir, exist_ok=True)

    def write(self, scene):
        stem = os.path.join(self._dir, f"scene_{self._count:06d}")
        with open(stem + ".txt", "w", encoding="utf-8") as fh:
            fh.write(write_scene(scene))
        if self._ppm:
            with open(stem + ".ppm", "wb") as fh:
                fh.write(write_ppm(rasterize(scene, self._palette)))
        if self._svg:
            with open(stem + ".svg", "w", encoding="utf-8") as fh:
                fh.write(write_svg(scene, self._palette))
        self._count += 1


class _LampWriter:
    """One file handle per link; a single path multiplexes all links."""

    def __init__(self, paths):
        self._handles = [open(p, "wb") for p in paths]
        self._mux = len(self._handles) == 1

    def write(self, lamp_bytes):
        for link, data in enumerate(lamp_bytes):
            if not data:
                continue
            handle = self._handles[0] if self._mux else self._handles[link]
            handle.write(data)
            handle.flush()

    def close(self):
        for h in self._handles:
            h.close()


def run_engine(
    cfg: EngineConfig,
    sinks: Sinks,
    mode: str | None = None,
    scenario: Scenario | None = None,
    duration_s: float | None = None,
    pace: bool = False,
    control_port: int | None = None,
    source=None,
):
    """Run the full loop.

    Returns ``(engine, bars)``: the engine with its counters and the
    list of emitted bars (for MIDI file export), plus, as a side effect,
    everything the sinks captured. `duration_s` defaults to the session
    cap."""
    if source is None:
        source = build_source(cfg, mode, scenario)
    engine = Engine(cfg, source)
    recorder = None
    if sinks.record_path:
        recorder = SessionRecorder(sinks.record_path)
        engine.record_to(recorder)

    server = None
    if control_port is not None:
        server = control_mod.ControlServer(engine, control_port)
        print(f"control_port: {server.port}", flush=True)

    midi_fh = open(sinks.midi_path, "wb") if sinks.midi_path else None
    frames = (
        _FrameWriter(sinks.frames_dir, engine.palette, sinks.ppm, sinks.svg)
        if sinks.frames_dir
        else None
    )
    lamps = _LampWriter(sinks.serial_paths) if sinks.serial_paths else None

    if duration_s is None:
        duration_s = cfg.max_session_s
    n_ticks = max(1, math.ceil(duration_s * cfg.tick_rate_hz))
    tick_us = 1e6 / cfg.tick_rate_hz
    bars: list[list] = []
    last_quality = None
    wall_start = time.monotonic()

    try:
        for i in range(n_ticks):
            now_us = round(i * tick_us)
            if server is not None:
                server.apply_pending()
            out = engine.tick(now_us)

            if out.midi and midi_fh:
                midi_fh.write(out.midi)
                midi_fh.flush()
            if out.bar is not None:
                bars.append(out.bar)
            if out.scene is not None and frames is not None:
                frames.write(out.scene)
            if out.lamp_bytes is not None and lamps is not None:
                lamps.write(out.lamp_bytes)

            if server is not None:
                if out.telemetry is not None:
                    server.publish(control_mod.state_message(out.telemetry))
                if out.scene is not None:
                    server.publish(control_mod.scene_message(out.scene))
                if out.midi:
                    server.publish(control_mod.midi_message(out.midi))
                if out.lamps is not None:
                    server.publish(control_mod.lamps_message(out.lamps))
                quality = (engine.state.noise_pct, engine.state.electrode_off)
                if quality != last_quality:
                    server.publish(control_mod.quality_message(engine.state))
                    last_quality = quality

            if engine.snapshot().session_ended:
                break
            if not engine.running and server is None:
                break
            if pace:
                target = wall_start + (i + 1) * tick_us / 1e6
                delay = target - time.monotonic()
                if delay > 0:
                    time.sleep(delay)
    finally:
        if midi_fh:
            midi_fh.close()
        if lamps:
            lamps.close()
        if recorder:
            recorder.close()
        if server is not None:
            server.close()
        source.close()
    return engine, bars


def load_scenario_file(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return Scenario.from_dict(json.load(fh))
