"""Telemetry event model and the line-oriented session format.

Every source (device parser, replay file, synthetic generator) emits the
same stream type: timestamped ``EegEvent`` records whose payload is one of
six variants. Session files store one event per line,
``t_us<TAB>kind<TAB>value[,value...]``, UTF-8, making record/replay diffs
trivially byte-comparable.
"""

from __future__ import annotations

from dataclasses import astuple, dataclass
from typing import Union

RAW_MIN, RAW_MAX = -32768, 32767
POOR_SIGNAL_MAX = 200
ESENSE_RAW_MAX = 100
BLINK_MAX = 255
BAND_POWER_MAX = (1 << 24) - 1

#: canonical order of the eight device sub-bands, on the wire and in files
BAND_ORDER = (
    "delta",
    "theta",
    "low_alpha",
    "high_alpha",
    "low_beta",
    "high_beta",
    "low_gamma",
    "mid_gamma",
)


@dataclass(frozen=True)
class RawSample:
    """One signed 16-bit ADC count from the electrode channel."""

    value: int


@dataclass(frozen=True)
class PoorSignal:
    """Contact-noise level 0..200; 200 means the electrode is off."""

    level: int


@dataclass(frozen=True)
class Attention:
    value: int


@dataclass(frozen=True)
class Meditation:
    value: int


@dataclass(frozen=True)
class BlinkStrength:
    value: int


@dataclass(frozen=True)
class BandPowers:
    """Eight unsigned 24-bit per-band powers in BAND_ORDER."""

    delta: int
    theta: int
    low_alpha: int
    high_alpha: int
    low_beta: int
    high_beta: int
    low_gamma: int
    mid_gamma: int

    def as_tuple(self) -> tuple:
        return astuple(self)


EventKind = Union[RawSample, PoorSignal, Attention, Meditation, BlinkStrength, BandPowers]


@dataclass(frozen=True)
class EegEvent:
    """A telemetry datum stamped in microseconds since stream start."""

    t_us: int
    kind: EventKind


_RANGES = {
    RawSample: (RAW_MIN, RAW_MAX),
    PoorSignal: (0, POOR_SIGNAL_MAX),
    Attention: (0, ESENSE_RAW_MAX),
    Meditation: (0, ESENSE_RAW_MAX),
    BlinkStrength: (0, BLINK_MAX),
}

_KIND_TOKENS = {
    RawSample: "raw",
    PoorSignal: "poor_signal",
    Attention: "attention",
    Meditation: "meditation",
    BlinkStrength: "blink",
    BandPowers: "bands",
}
_TOKEN_KINDS = {v: k for k, v in _KIND_TOKENS.items()}


def validate_kind(kind: EventKind) -> None:
    """Raise ValueError if any field is outside its wire range."""
    if isinstance(kind, BandPowers):
        for name, v in zip(BAND_ORDER, kind.as_tuple()):
            if not 0 <= v <= BAND_POWER_MAX:
                raise ValueError(f"band power {name}={v} outside 0..{BAND_POWER_MAX}")
        return
    try:
        lo, hi = _RANGES[type(kind)]
    except KeyError:
        raise ValueError(f"not an event kind: {kind!r}") from None
    (v,) = astuple(kind)
    if not lo <= v <= hi:
        raise ValueError(f"{type(kind).__name__} value {v} outside {lo}..{hi}")


def format_line(event: EegEvent) -> str:
    """Render one session line (no trailing newline)."""
    values = ",".join(str(v) for v in astuple(event.kind))
    return f"{event.t_us}\t{_KIND_TOKENS[type(event.kind)]}\t{values}"


def parse_line(line: str) -> EegEvent:
    """Parse one session line; raises ValueError on any malformation."""
    parts = line.rstrip("\n").split("\t")
    if len(parts) != 3:
        raise ValueError(f"expected 3 tab-separated fields, got {len(parts)}")
    t_us = int(parts[0])
    if t_us < 0:
        raise ValueError("negative timestamp")
    try:
        cls = _TOKEN_KINDS[parts[1]]
    except KeyError:
        raise ValueError(f"unknown event kind {parts[1]!r}") from None
    values = [int(v) for v in parts[2].split(",")]
    if cls is BandPowers:
        if len(values) != 8:
            raise ValueError(f"bands line needs 8 values, got {len(values)}")
        kind: EventKind = BandPowers(*values)
    else:
        if len(values) != 1:
            raise ValueError(f"{parts[1]} line needs 1 value, got {len(values)}")
        kind = cls(values[0])
    validate_kind(kind)
    return EegEvent(t_us, kind)
