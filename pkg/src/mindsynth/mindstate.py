"""Per-tick mental snapshot and the scaling rules feeding every mapper.

The device reports attention/meditation on 0-100 and band powers as raw
24-bit accumulator values; mappers all consume a MindState with eSense on
0-127 (the MIDI value domain) and seven band scalars on 0-100.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .events import (
    Attention,
    BandPowers,
    EegEvent,
    Meditation,
    PoorSignal,
)

ESENSE_MAX = 127
BAND_SCALAR_MAX = 100
NOISE_ACCEPT_PCT = 12.5

#: the six eSense value ranges driving the lamp colors, in order
INTERVALS = ((0, 20), (21, 40), (41, 60), (61, 90), (91, 110), (111, 127))

#: MindState band-scalar field names
BAND_FIELDS = ("delta", "theta", "alpha", "high_alpha", "beta", "gamma", "avg_gamma")

_LOG_FULL_SCALE = math.log10(1 << 24)


@dataclass(frozen=True)
class MindState:
    t_us: int
    attention: int  # 0..127
    relaxation: int  # 0..127
    delta: int  # band scalars, 0..100
    theta: int
    alpha: int
    high_alpha: int
    beta: int
    gamma: int
    avg_gamma: int
    noise_pct: float  # 0..100
    electrode_off: bool

    def band(self, name: str) -> int:
        if name not in BAND_FIELDS:
            raise ValueError(f"unknown band scalar {name!r}")
        return getattr(self, name)

    @property
    def acceptable(self) -> bool:
        return self.noise_pct < NOISE_ACCEPT_PCT and not self.electrode_off


#: before any telemetry arrives, assume the worst contact quality so the
#: mappers stay gated until a real PoorSignal reading opens them
INITIAL_STATE = MindState(
    t_us=0,
    attention=0,
    relaxation=0,
    delta=0,
    theta=0,
    alpha=0,
    high_alpha=0,
    beta=0,
    gamma=0,
    avg_gamma=0,
    noise_pct=100.0,
    electrode_off=False,
)


def scale_esense(raw: int) -> int:
    """Map 0..100 to 0..127, round half up; endpoints land exactly."""
    if not 0 <= raw <= 100:
        raise ValueError(f"eSense value {raw} outside 0..100")
    return (raw * 254 + 100) // 200


def normalize_band_power(raw: int) -> int:
    """Compress a raw 24-bit band power onto 0..100.

    log10(1+raw) scaled so the 24-bit ceiling hits 100; the curve keeps
    the low end (where the accumulators usually live) usable.
    """
    if not 0 <= raw < (1 << 24):
        raise ValueError(f"band power {raw} outside 24-bit range")
    return int(100.0 * math.log10(1.0 + raw) / _LOG_FULL_SCALE)


def classify_interval(v: int) -> int:
    """Index (1-6) of the interval containing an eSense value 0..127."""
    if not 0 <= v <= 127:
        raise ValueError(f"value {v} outside 0..127")
    for idx, (lo, hi) in enumerate(INTERVALS, start=1):
        if lo <= v <= hi:
            return idx
    raise AssertionError("intervals do not cover 0..127")


def quality_from_poor_signal(level: int):
    """(noise_pct, electrode_off, acceptable) from the 0-200 quality byte."""
    if not 0 <= level <= 200:
        raise ValueError(f"poor-signal level {level} outside 0..200")
    noise_pct = level / 2
    return noise_pct, level == 200, noise_pct < NOISE_ACCEPT_PCT


def _smooth(prev: int, fresh: int, coeff: float) -> int:
    """One exponential-smoothing step on an integer scalar.

    The carried state is the published integer, so a plain round could
    stall one count short of the target; nudge by one in that case to
    keep the filter convergent.
    """
    if coeff >= 1.0:
        return fresh
    stepped = round(prev + coeff * (fresh - prev))
    if stepped == prev and fresh != prev:
        stepped = prev + (1 if fresh > prev else -1)
    return stepped


def bands_from_device(powers: BandPowers) -> dict[str, int]:
    """Normalize one device band-power report into the seven scalars.

    The musical note table names bare "beta"/"gamma"; those map to the
    device's low sub-bands, and avg_gamma averages the two normalized
    gamma halves (rounding half up).
    """
    low_gamma = normalize_band_power(powers.low_gamma)
    mid_gamma = normalize_band_power(powers.mid_gamma)
    return {
        "delta": normalize_band_power(powers.delta),
        "theta": normalize_band_power(powers.theta),
        "alpha": normalize_band_power(powers.low_alpha),
        "high_alpha": normalize_band_power(powers.high_alpha),
        "beta": normalize_band_power(powers.low_beta),
        "gamma": low_gamma,
        "avg_gamma": (low_gamma + mid_gamma + 1) // 2,
    }


def fuse(
    prev: MindState,
    events: list[EegEvent],
    t_us: int,
    fresh_bands: dict[str, int] | None = None,
    band_smoothing: float = 0.3,
    esense_smoothing: float | None = None,
) -> MindState:
    """Fold a tick's events into the next snapshot.

    The latest attention/meditation/quality event of the tick wins; band
    scalars come either from `fresh_bands` (precomputed, e.g. from raw
    EEG spectra) or from the newest BandPowers event, smoothed against
    the previous snapshot. Fields with no fresh data carry forward.
    """
    attention = prev.attention
    relaxation = prev.relaxation
    noise_pct = prev.noise_pct
    electrode_off = prev.electrode_off
    device_bands = None

    for ev in events:
        kind = ev.kind
        if isinstance(kind, Attention):
            v = scale_esense(kind.value)
            attention = v if esense_smoothing is None else _smooth(attention, v, esense_smoothing)
        elif isinstance(kind, Meditation):
            v = scale_esense(kind.value)
            relaxation = v if esense_smoothing is None else _smooth(relaxation, v, esense_smoothing)
        elif isinstance(kind, PoorSignal):
            noise_pct, electrode_off, _ = quality_from_poor_signal(kind.level)
        elif isinstance(kind, BandPowers):
            device_bands = kind

    if fresh_bands is None and device_bands is not None:
        fresh_bands = bands_from_device(device_bands)

    band_values = {}
    for name in BAND_FIELDS:
        if fresh_bands is not None and name in fresh_bands:
            fresh = fresh_bands[name]
            if not 0 <= fresh <= BAND_SCALAR_MAX:
                raise ValueError(f"band scalar {name}={fresh} outside 0..100")
            band_values[name] = _smooth(getattr(prev, name), fresh, band_smoothing)
        else:
            band_values[name] = getattr(prev, name)

    return replace(
        prev,
        t_us=t_us,
        attention=attention,
        relaxation=relaxation,
        noise_pct=noise_pct,
        electrode_off=electrode_off,
        **band_values,
    )
