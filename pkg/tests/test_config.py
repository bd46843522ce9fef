"""Config loading: strict keys, file references, pattern bank sources."""

import json

import pytest

from mindsynth.config import EngineConfig, config_from_dict, load_config
from mindsynth.engine import Engine


def test_defaults_validate():
    cfg = EngineConfig()
    assert cfg.raw_rate_hz == 512 and cfg.block_size == 32
    assert cfg.electrode_site == "FP1" and cfg.reference_site == "A1"
    assert cfg.seed == 99999 and cfg.width == 1366 and cfg.height == 768
    assert cfg.max_session_s == 300.0
    assert cfg.control_port == 8330


def test_unknown_key_rejected():
    with pytest.raises(ValueError):
        config_from_dict({"not_a_key": 1})


def test_bad_values_rejected():
    with pytest.raises(ValueError):
        EngineConfig(frame_rate_hz=0)
    with pytest.raises(ValueError):
        EngineConfig(band_pair="delta_delta")
    with pytest.raises(ValueError):
        EngineConfig(interval_colors=["1", "2"])
    with pytest.raises(ValueError):
        EngineConfig(band_source="magic")


def test_round_trip_via_json(tmp_path):
    cfg = EngineConfig(seed=7, tempo_bpm=90.0)
    path = tmp_path / "cfg.json"
    path.write_text(cfg.to_json())
    assert load_config(path) == cfg


def test_missing_referenced_file_rejected(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"replay_path": str(tmp_path / "nope.session")}))
    with pytest.raises(ValueError):
        load_config(path)


def test_pattern_bank_from_file(tmp_path):
    bank_path = tmp_path / "bank.json"
    bank_path.write_text(json.dumps([[0], [0, 4], [0, 2, 4, 6]]))
    cfg = EngineConfig(pattern_bank=str(bank_path))
    engine = Engine(cfg, None)
    assert engine.bank.rows == ((0,), (0, 4), (0, 2, 4, 6))


def test_pattern_bank_inline():
    cfg = EngineConfig(pattern_bank=[[0, 1], [7]])
    engine = Engine(cfg, None)
    assert engine.bank.rows == ((0, 1), (7,))
