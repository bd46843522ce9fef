"""Engine configuration: one JSON document, every default overridable.

Only keys that exist are accepted; a typo in a config file should fail
loudly at load, not silently fall back to a default.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, replace

from .art import DEFAULT_HEIGHT, DEFAULT_PALETTE, DEFAULT_SEED, DEFAULT_WIDTH
from .lights import (
    DEFAULT_COLOR_TABLE,
    DEFAULT_INTERVAL_COLORS,
    DEFAULT_SPRAY_COOLDOWN_S,
    DEFAULT_SPRAY_MIN_RELAXATION,
    make_color_table,
)
from .music import DEFAULT_ATT_CC, DEFAULT_MED_CC, DEFAULT_NOTE_LEN

#: which band scalars drive circle count / cell divisor; delta-gamma is
#: the pair used in production, the other studied pairs stay selectable
BAND_PAIRS = {
    "delta_gamma": ("delta", "gamma"),
    "alpha_high_alpha": ("alpha", "high_alpha"),
    "theta_beta": ("theta", "beta"),
}


@dataclass(frozen=True)
class EngineConfig:
    # acquisition
    mode: str = "synthetic"  # device | replay | synthetic
    electrode_site: str = "FP1"
    reference_site: str = "A1"
    raw_rate_hz: int = 512
    block_size: int = 32
    serial_port: str | None = None
    serial_baud: int = 57600
    tcp: str | None = None
    replay_path: str | None = None
    scenario: dict | None = None

    # cadence (Hz); the tick rate must divide evenly into all of them
    tick_rate_hz: float = 24.0
    bar_rate_hz: float = 1.0
    frame_rate_hz: float = 12.0
    telemetry_rate_hz: float = 4.0

    # processing
    epoch_s: float = 0.5
    artifact_k: float = 8.0
    band_source: str = "device"  # device | dsp
    band_smoothing: float = 0.3
    esense_smoothing: float | None = None
    quality_max_noise_pct: float = 12.5

    # music
    tempo_bpm: float = 120.0
    att_cc: int = DEFAULT_ATT_CC
    med_cc: int = DEFAULT_MED_CC
    note_len_ticks: int = DEFAULT_NOTE_LEN
    # rows of slot lists, or a path to a JSON file of rows; None = default
    pattern_bank: list | str | None = None

    # art
    seed: int = DEFAULT_SEED
    width: int = DEFAULT_WIDTH
    height: int = DEFAULT_HEIGHT
    palette: list = field(default_factory=lambda: [list(c) for c in DEFAULT_PALETTE])
    band_pair: str = "delta_gamma"

    # lights
    interval_colors: list = field(default_factory=lambda: list(DEFAULT_INTERVAL_COLORS))
    color_table: dict = field(default_factory=lambda: {k: list(v) for k, v in DEFAULT_COLOR_TABLE.items()})
    spray_link: int = 2
    spray_min_relaxation: int = DEFAULT_SPRAY_MIN_RELAXATION
    spray_cooldown_s: float = DEFAULT_SPRAY_COOLDOWN_S

    # session
    max_session_s: float = 300.0
    control_port: int = 8330

    def __post_init__(self):
        for name in ("tick_rate_hz", "bar_rate_hz", "frame_rate_hz", "telemetry_rate_hz"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.band_pair not in BAND_PAIRS:
            raise ValueError(f"band_pair must be one of {sorted(BAND_PAIRS)}")
        if self.band_source not in ("device", "dsp"):
            raise ValueError("band_source must be 'device' or 'dsp'")
        if len(self.interval_colors) != 6:
            raise ValueError("interval_colors needs 6 entries")
        make_color_table(self.color_table)  # validates the anchors

    def merged(self, **overrides) -> "EngineConfig":
        return replace(self, **overrides)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def load_config(path) -> EngineConfig:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    cfg = config_from_dict(doc)
    for ref in (cfg.replay_path, cfg.pattern_bank if isinstance(cfg.pattern_bank, str) else None):
        if ref and not os.path.exists(ref):
            raise ValueError(f"referenced file does not exist: {ref}")
    return cfg


def config_from_dict(doc: dict) -> EngineConfig:
    valid = set(EngineConfig.__dataclass_fields__)
    unknown = set(doc) - valid
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return EngineConfig(**doc)
