"""Lamp command mapping and the edge-triggered serial encoder."""

import random
from dataclasses import replace

import pytest

from mindsynth.lights import (
    COMMAND_ALPHABET,
    DEFAULT_COLOR_TABLE,
    DEFAULT_INTERVAL_COLORS,
    CommandEncoder,
    LampFrame,
    lamp_frame,
    make_color_table,
    spray_policy,
)
from mindsynth.mindstate import INITIAL_STATE, classify_interval


def state(att, med):
    return replace(INITIAL_STATE, attention=att, relaxation=med)


def test_color_table_defaults_valid():
    table = make_color_table(DEFAULT_COLOR_TABLE)
    assert len([k for k in table if k != "Z"]) == 16
    assert table["A"] == (255, 255, 0)
    assert table["Z"] == (0, 0, 0)


def test_color_table_anchors_enforced():
    bad = dict(DEFAULT_COLOR_TABLE)
    bad["A"] = (1, 2, 3)
    with pytest.raises(ValueError):
        make_color_table(bad)
    incomplete = {k: v for k, v in DEFAULT_COLOR_TABLE.items() if k != "7"}
    with pytest.raises(ValueError):
        make_color_table(incomplete)


def test_lamp_frame_same_interval_lights_both():
    frame = lamp_frame(state(10, 15))
    assert frame.lamp_attention == frame.lamp_relaxation == frame.lamp_both
    assert frame.lamp_both == DEFAULT_INTERVAL_COLORS[0]


def test_lamp_frame_differing_intervals_darken_both():
    frame = lamp_frame(state(30, 95))
    assert frame.lamp_attention == DEFAULT_INTERVAL_COLORS[1]
    assert frame.lamp_relaxation == DEFAULT_INTERVAL_COLORS[4]
    assert frame.lamp_both == "Z"


def test_lamp_frame_top_interval():
    assert lamp_frame(state(127, 0)).lamp_attention == DEFAULT_INTERVAL_COLORS[5]


def test_lamp_both_iff_equal_intervals_sampled():
    rng = random.Random(42)
    for _ in range(2000):
        att, med = rng.randrange(128), rng.randrange(128)
        frame = lamp_frame(state(att, med))
        same = classify_interval(att) == classify_interval(med)
        assert (frame.lamp_both != "Z") == same


def test_spray_policy_rules():
    assert not spray_policy(state(0, 50), last_spray_s=-100.0, now_s=0.0)
    assert spray_policy(state(0, 120), last_spray_s=0.0, now_s=10.0)
    assert not spray_policy(state(0, 120), last_spray_s=9.0, now_s=10.0)  # cooldown
    assert spray_policy(state(0, 111), last_spray_s=0.0, now_s=5.0)  # boundary
    with pytest.raises(ValueError):
        spray_policy(state(0, 120), last_spray_s=10.0, now_s=5.0)


def test_encoder_first_frame_emits_all_lamps():
    enc = CommandEncoder()
    out = enc.encode(LampFrame("1", "3", "Z", False))
    assert out == (b"1", b"3", b"Z")


def test_encoder_idempotent_on_repeat():
    enc = CommandEncoder()
    frame = LampFrame("1", "3", "Z", False)
    enc.encode(frame)
    assert enc.encode(frame) == (b"", b"", b"")


def test_encoder_emits_only_changes():
    enc = CommandEncoder()
    enc.encode(LampFrame("1", "3", "Z", False))
    out = enc.encode(LampFrame("1", "5", "Z", False))
    assert out == (b"", b"5", b"")


def test_encoder_spray_rising_edge_only():
    enc = CommandEncoder(spray_link=2)
    enc.encode(LampFrame("1", "1", "1", False))
    first = enc.encode(LampFrame("1", "1", "1", True))
    assert first == (b"", b"", b"S")
    held = enc.encode(LampFrame("1", "1", "1", True))
    assert held == (b"", b"", b"")
    enc.encode(LampFrame("1", "1", "1", False))
    again = enc.encode(LampFrame("1", "1", "1", True))
    assert again == (b"", b"", b"S")


def test_encoder_spray_link_selectable():
    enc = CommandEncoder(spray_link=0)
    out = enc.encode(LampFrame("1", "2", "3", True))
    assert out == (b"1S", b"2", b"3")


def test_all_emitted_bytes_in_alphabet():
    rng = random.Random(9)
    enc = CommandEncoder()
    for _ in range(500):
        frame = lamp_frame(state(rng.randrange(128), rng.randrange(128)))
        if rng.random() < 0.2:
            frame = replace(frame, spray=True)
        for link in enc.encode(frame):
            for byte in link:
                assert chr(byte) in COMMAND_ALPHABET


def test_lamp_frame_rejects_bad_command():
    with pytest.raises(ValueError):
        LampFrame("S", "1", "2", False)
    with pytest.raises(ValueError):
        LampFrame("x", "1", "2", False)
