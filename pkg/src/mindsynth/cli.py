"""Command-line interface.

Subcommands:
  run     live engine (synthetic, replay or device source)
  render  offline: session file -> frame files + Standard MIDI File
  parse   decode a hex/byte dump into an event table
  dsp     run one signal operation over a sample file
  probe   check a device link and report signal quality
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import dsp, music
from .config import EngineConfig, load_config
from .events import BandPowers, PoorSignal
from .mindstate import quality_from_poor_signal
from .protocol import parse_stream
from .runner import Sinks, build_source, load_scenario_file, run_engine
from .sources import ReplaySource, SourceError


def _load_cfg(args) -> EngineConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else EngineConfig()
    overrides = {}
    for name in ("seed",):
        v = getattr(args, name, None)
        if v is not None:
            overrides[name] = v
    for arg, key in (("serial_device", "serial_port"), ("tcp", "tcp"), ("replay", "replay_path")):
        v = getattr(args, arg, None)
        if v is not None:
            overrides[key] = v
    return cfg.merged(**overrides) if overrides else cfg


def _sinks_from_args(args) -> Sinks:
    return Sinks(
        midi_path=getattr(args, "midi_out", None),
        frames_dir=getattr(args, "frames_dir", None),
        serial_paths=tuple(getattr(args, "serial", None) or ()),
        record_path=getattr(args, "record", None),
        ppm=getattr(args, "ppm", False),
        svg=getattr(args, "svg", False),
    )


def cmd_run(args) -> int:
    cfg = _load_cfg(args)
    scenario = load_scenario_file(args.scenario) if args.scenario else None
    if args.no_control:
        control_port = None
    elif args.control_port is not None:
        control_port = args.control_port
    else:
        control_port = cfg.control_port
    try:
        engine, _ = run_engine(
            cfg,
            _sinks_from_args(args),
            mode=args.source,
            scenario=scenario,
            duration_s=args.duration,
            pace=not args.no_pace,
            control_port=control_port,
        )
    except SourceError as exc:
        print(f"source error: {exc}", file=sys.stderr)
        return 2
    snap = engine.snapshot()
    for key, value in sorted(snap.counters.items()):
        print(f"{key}: {value}")
    if snap.diagnostic:
        print(f"stopped: {snap.diagnostic}", file=sys.stderr)
        return 0 if snap.session_ended else 2
    return 0


def cmd_render(args) -> int:
    cfg = _load_cfg(args).merged(mode="replay", replay_path=args.session)
    duration = args.duration
    if duration is None:
        # one bar period past the last event so trailing state still sounds
        end_us = ReplaySource(args.session).end_time_us
        duration = end_us / 1e6 + 1.0 / cfg.bar_rate_hz
    engine, bars = run_engine(cfg, _sinks_from_args(args), duration_s=duration, pace=False)
    if args.smf:
        with open(args.smf, "wb") as fh:
            fh.write(music.write_smf(bars, cfg.tempo_bpm))
    print(f"bars: {len(bars)}  frames: {engine.snapshot().counters['frames']}")
    return 0


def _read_dump(args) -> bytes:
    if args.file:
        with open(args.file, "rb") as fh:
            return fh.read()
    text = " ".join(args.hex) if args.hex else sys.stdin.read()
    return bytes.fromhex(text.replace(",", " "))


def cmd_parse(args) -> int:
    data = _read_dump(args)
    events, consumed, errors = parse_stream(data, args.base_time)
    print("t_us\tkind\tvalue")
    for ev in events:
        kind = ev.kind
        name = type(kind).__name__
        if isinstance(kind, BandPowers):
            value = ",".join(str(v) for v in kind.as_tuple())
        else:
            (value,) = (getattr(kind, f.name) for f in kind.__dataclass_fields__.values())
        print(f"{ev.t_us}\t{name}\t{value}")
    print(f"# consumed {consumed} of {len(data)} bytes, {len(events)} events, {len(errors)} errors")
    for err in errors:
        print(f"# error at offset {err.offset}: {err.reason}", file=sys.stderr)
    return 0


def cmd_dsp(args) -> int:
    samples = np.loadtxt(args.infile, dtype=np.float64, ndmin=1)
    buf = dsp.SampleBuffer(args.rate, samples)
    if args.op == "spectrum":
        spec = dsp.power_spectrum(dsp.Epoch(0.0, buf.samples, buf.rate_hz))
        freqs = [spec.bin_freq(k) for k in range(len(spec.power))]
        out = np.column_stack([freqs, spec.power])
        np.savetxt(args.outfile, out, fmt="%.12g", header="freq_hz power")
        return 0
    if args.op == "bandpass":
        result = dsp.bandpass(buf, dsp.FilterSpec(args.lo, args.hi, args.order))
    elif args.op == "decimate":
        result = dsp.decimate(buf, args.factor)
    elif args.op == "average":
        result = dsp.moving_average(buf, args.window)
    else:
        raise AssertionError(args.op)
    np.savetxt(args.outfile, result.samples, fmt="%.12g", header=f"rate_hz {result.rate_hz}")
    return 0


def cmd_probe(args) -> int:
    cfg = _load_cfg(args)
    mode = "device"
    try:
        source = build_source(cfg.merged(mode=mode))
    except SourceError as exc:
        print(f"link failed: {exc}", file=sys.stderr)
        return 2
    import time

    deadline = time.monotonic() + args.seconds
    last = None
    counts = {"events": 0}
    try:
        while time.monotonic() < deadline:
            events = source.poll(round(time.monotonic() * 1e6))
            counts["events"] += len(events)
            for ev in events:
                if isinstance(ev.kind, PoorSignal):
                    noise, off, ok = quality_from_poor_signal(ev.kind.level)
                    last = (noise, off, ok)
                    if off:
                        print("electrode off (no forehead contact)")
                    elif ok:
                        print(f"signal quality acceptable - noise {noise}%")
                    else:
                        print(f"poor signal - noise {noise}%")
            time.sleep(0.05)
    except SourceError as exc:
        print(f"link dropped: {exc}", file=sys.stderr)
        return 2
    finally:
        source.close()
    print(f"{counts['events']} events in {args.seconds}s")
    if last is None:
        print("no quality report received", file=sys.stderr)
        return 2
    return 0 if last[2] else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mindsynth", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the live engine")
    run.add_argument("--source", choices=("device", "replay", "synthetic"), default=None)
    run.add_argument("--config")
    run.add_argument("--scenario", help="scenario JSON for the synthetic source")
    run.add_argument("--replay", help="session file for replay mode")
    run.add_argument("--serial-device", help="serial path for device mode")
    run.add_argument("--tcp", help="host:port for device mode")
    run.add_argument("--record", help="append every source event to this session file")
    run.add_argument("--control-port", type=int, default=None,
                     help="console protocol port (default: config, 8330; 0 = ephemeral)")
    run.add_argument("--no-control", action="store_true", help="do not serve the console protocol")
    run.add_argument("--midi-out", help="write raw MIDI bytes here")
    run.add_argument("--frames-dir", help="write one scene text file per frame here")
    run.add_argument("--serial", action="append", help="lamp link path (repeat up to 3x)")
    run.add_argument("--duration", type=float, help="seconds to run (default: session cap)")
    run.add_argument("--seed", type=int)
    run.add_argument("--no-pace", action="store_true", help="run the clock flat out")
    run.add_argument("--ppm", action="store_true", help="also rasterize frames to PPM")
    run.add_argument("--svg", action="store_true", help="also write frames as SVG")
    run.set_defaults(func=cmd_run)

    render = sub.add_parser("render", help="session file -> frames + SMF, offline")
    render.add_argument("session")
    render.add_argument("--config")
    render.add_argument("--frames-dir")
    render.add_argument("--smf", help="write a format-1 MIDI file here")
    render.add_argument("--duration", type=float)
    render.add_argument("--seed", type=int)
    render.add_argument("--ppm", action="store_true")
    render.add_argument("--svg", action="store_true")
    render.set_defaults(func=cmd_render)

    parse = sub.add_parser("parse", help="decode a hex dump of the wire protocol")
    parse.add_argument("hex", nargs="*", help="hex bytes, e.g. AA AA 02 04 32 C9")
    parse.add_argument("--file", help="read raw bytes from this file instead")
    parse.add_argument("--base-time", type=int, default=0)
    parse.set_defaults(func=cmd_parse)

    dspp = sub.add_parser("dsp", help="run one signal operation over a sample file")
    dspp.add_argument("--rate", type=float, required=True)
    dspp.add_argument("--op", choices=("spectrum", "bandpass", "decimate", "average"), required=True)
    dspp.add_argument("--lo", type=float, default=8.0)
    dspp.add_argument("--hi", type=float, default=12.0)
    dspp.add_argument("--order", type=int, default=4)
    dspp.add_argument("--factor", type=int, default=16)
    dspp.add_argument("--window", type=int, default=5)
    dspp.add_argument("infile")
    dspp.add_argument("outfile")
    dspp.set_defaults(func=cmd_dsp)

    probe = sub.add_parser("probe", help="check a device link, print signal quality")
    probe.add_argument("--serial-device")
    probe.add_argument("--tcp")
    probe.add_argument("--config")
    probe.add_argument("--seconds", type=float, default=3.0)
    probe.set_defaults(func=cmd_probe)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
