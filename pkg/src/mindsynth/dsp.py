"""Single-channel signal chain: epoching, averaging, decimation,
band-pass filtering, FFT power spectra, band powers and blink-spike
rejection.

Everything here is a pure function over immutable inputs; the engine owns
all buffering. Filters are designed with scipy and applied forward only
(causal), matching a streaming pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal as _sig

from .events import BlinkStrength


class ParameterError(ValueError):
    """An argument violates an operation's stated precondition."""


@dataclass(frozen=True)
class SampleBuffer:
    rate_hz: float
    samples: np.ndarray  # float64, finite

    def __post_init__(self):
        if self.rate_hz <= 0:
            raise ParameterError("rate_hz must be > 0")
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=np.float64))


@dataclass(frozen=True)
class Epoch:
    start_time_s: float
    samples: np.ndarray
    rate_hz: float


@dataclass(frozen=True)
class Spectrum:
    """One-sided power spectrum; bin k sits at k*rate_hz/N, bin 0 is DC."""

    rate_hz: float
    power: np.ndarray

    @property
    def n_fft(self) -> int:
        return 2 * (len(self.power) - 1)

    def bin_freq(self, k: int) -> float:
        return k * self.rate_hz / self.n_fft


@dataclass(frozen=True)
class Band:
    name: str
    lo_hz: float
    hi_hz: float

    def __post_init__(self):
        if not 0 <= self.lo_hz < self.hi_hz:
            raise ParameterError(f"bad band edges [{self.lo_hz}, {self.hi_hz})")


# Contiguous half-open edges; the classic table leaves gaps (7-8 Hz etc.)
# which would orphan bins, so each gap is folded into the band below it.
BANDS = (
    Band("delta", 0.5, 4.0),
    Band("theta", 4.0, 8.0),
    Band("alpha", 8.0, 12.0),
    Band("low_beta", 12.0, 16.0),
    Band("mid_beta", 16.0, 21.0),
    Band("high_beta", 21.0, 30.0),
    Band("gamma", 30.0, 100.0),
)

#: sub-bands used when band scalars are recomputed from raw EEG instead of
#: taken from the device (high alpha per the 10-12 Hz convention; the two
#: gamma halves mirror the device's low/mid gamma split)
SUB_BANDS = {
    "high_alpha": Band("high_alpha", 10.0, 12.0),
    "low_gamma": Band("low_gamma", 30.0, 50.0),
    "mid_gamma": Band("mid_gamma", 50.0, 100.0),
}


@dataclass(frozen=True)
class FilterSpec:
    """Band-pass description; `order` counts poles of the digital filter."""

    lo_hz: float
    hi_hz: float
    order: int = 4

    def __post_init__(self):
        if not 0 < self.lo_hz < self.hi_hz:
            raise ParameterError(f"bad band [{self.lo_hz}, {self.hi_hz}]")
        if self.order < 2 or self.order % 2:
            raise ParameterError("order must be an even integer >= 2")


def epoch_split(buf: SampleBuffer, duration_s: float, stride_s: float) -> list[Epoch]:
    """Cut the buffer into fixed windows; epoch i starts at i*stride_s.

    Only complete epochs are returned, so a buffer shorter than one
    window yields an empty list.
    """
    if duration_s <= 0 or stride_s <= 0:
        raise ParameterError("duration and stride must be > 0")
    length = round(duration_s * buf.rate_hz)
    if length < 1:
        raise ParameterError("epoch shorter than one sample")
    out = []
    i = 0
    while True:
        start = round(i * stride_s * buf.rate_hz)
        if start + length > len(buf.samples):
            return out
        out.append(Epoch(start / buf.rate_hz, buf.samples[start : start + length], buf.rate_hz))
        i += 1


def moving_average(buf: SampleBuffer, window: int) -> SampleBuffer:
    """Valid-mode uniform smoothing; output has length-window+1 samples."""
    if window < 1 or window > len(buf.samples):
        raise ParameterError(f"window {window} outside 1..{len(buf.samples)}")
    summed = np.convolve(buf.samples, np.ones(window), mode="valid")
    return SampleBuffer(buf.rate_hz, summed / window)


def design_lowpass(cutoff_hz: float, rate_hz: float, order: int = 8) -> np.ndarray:
    return _sig.butter(order, cutoff_hz, btype="lowpass", fs=rate_hz, output="sos")


def design_bandpass(spec: FilterSpec, rate_hz: float) -> np.ndarray:
    if spec.hi_hz >= rate_hz / 2:
        raise ParameterError(f"band edge {spec.hi_hz} Hz at or above Nyquist ({rate_hz / 2})")
    return _sig.butter(
        spec.order // 2, [spec.lo_hz, spec.hi_hz], btype="bandpass", fs=rate_hz, output="sos"
    )


def bandpass(buf: SampleBuffer, spec: FilterSpec) -> SampleBuffer:
    """Causal Butterworth band-pass in second-order sections."""
    sos = design_bandpass(spec, buf.rate_hz)
    return SampleBuffer(buf.rate_hz, _sig.sosfilt(sos, buf.samples))


def decimate(buf: SampleBuffer, factor: int) -> SampleBuffer:
    """Drop the rate by `factor`: anti-alias low-pass at 0.45 of the new
    rate, then keep every factor-th sample. Factor 1 is the identity."""
    if factor < 1:
        raise ParameterError("factor must be >= 1")
    if factor == 1:
        return SampleBuffer(buf.rate_hz, buf.samples.copy())
    new_rate = buf.rate_hz / factor
    sos = design_lowpass(0.45 * new_rate, buf.rate_hz)
    filtered = _sig.sosfilt(sos, buf.samples)
    return SampleBuffer(new_rate, filtered[::factor])


def power_spectrum(ep: Epoch, window: str | None = None) -> Spectrum:
    """One-sided power spectrum of one epoch.

    The epoch is zero-padded to the next power of two. Powers are
    |X_k|^2/N with the interior bins doubled so that the total equals the
    time-domain energy (Parseval). No window by default; "hann" tapers
    the epoch first (at the cost of exact energy equality).
    """
    x = np.asarray(ep.samples, dtype=np.float64)
    if len(x) < 2:
        raise ParameterError("epoch must hold at least 2 samples")
    if window == "hann":
        x = x * np.hanning(len(x))
    elif window is not None:
        raise ParameterError(f"unknown window {window!r}")
    n = 1 << (len(x) - 1).bit_length()
    spec = np.fft.rfft(x, n)
    power = (spec.real**2 + spec.imag**2) / n
    power[1:-1] *= 2.0
    return Spectrum(ep.rate_hz, power)


def band_power(spectrum: Spectrum, band: Band) -> float:
    """Sum of power over bins whose center lies in [lo_hz, hi_hz)."""
    n = spectrum.n_fft
    freqs = np.arange(len(spectrum.power)) * (spectrum.rate_hz / n)
    mask = (freqs >= band.lo_hz) & (freqs < band.hi_hz)
    return float(np.sum(spectrum.power[mask]))


def band_powers(spectrum: Spectrum, bands=BANDS) -> dict[str, float]:
    return {b.name: band_power(spectrum, b) for b in bands}


def detect_blink_artifact(ep: Epoch, events_in_window=(), k: float = 8.0) -> bool:
    """Flag an epoch whose samples spike beyond k*MAD of the median, or
    that overlaps a blink-strength event. Flagged epochs must not feed
    band-power updates: blinks ride on the frontal channel as large
    spikes and would swamp every band.
    """
    x = np.asarray(ep.samples, dtype=np.float64)
    if len(x):
        med = float(np.median(x))
        dev = np.abs(x - med)
        mad = float(np.median(dev))
        if float(np.max(dev)) > k * mad:
            return True
    end_s = ep.start_time_s + len(x) / ep.rate_hz
    for ev in events_in_window:
        if isinstance(ev.kind, BlinkStrength) and ep.start_time_s <= ev.t_us / 1e6 < end_s:
            return True
    return False


def sine_amplitude(samples: np.ndarray, rate_hz: float, freq_hz: float) -> float:
    """Least-squares amplitude of a known-frequency sinusoid (used by the
    CLI's probe/dsp reporting; tests carry their own copy as an oracle)."""
    t = np.arange(len(samples)) / rate_hz
    m = np.column_stack([np.sin(2 * math.pi * freq_hz * t), np.cos(2 * math.pi * freq_hz * t)])
    coef, *_ = np.linalg.lstsq(m, samples, rcond=None)
    return float(math.hypot(coef[0], coef[1]))
