"""Music mapper: note set, clamping, bar scheduling, SMF round trips."""

import random
from dataclasses import replace

import pytest

from mindsynth.mindstate import INITIAL_STATE
from mindsynth.music import (
    ASSIGNMENTS,
    NOTE_SET,
    MidiMessage,
    PatternBank,
    build_track,
    default_bank,
    dynamics_cc,
    render_bar,
    select_pattern_index,
    write_smf,
)

from oracles import read_smf


def state_with(**bands):
    return replace(INITIAL_STATE, **bands)


def random_state(rng):
    fields = {name: rng.randrange(101) for name in
              ("delta", "theta", "alpha", "high_alpha", "beta", "gamma", "avg_gamma")}
    return replace(
        INITIAL_STATE,
        attention=rng.randrange(128),
        relaxation=rng.randrange(128),
        **fields,
    )


def test_assignment_table_is_exact():
    table = {(a.note_name, a.midi_number, a.wave) for a in ASSIGNMENTS}
    assert table == {
        ("G4", 67, "theta"),
        ("B4", 71, "alpha"),
        ("D5", 74, "beta"),
        ("Gb5", 78, "gamma"),
        ("G2", 43, "delta"),
        ("D3", 50, "high_alpha"),
        ("G3", 55, "avg_gamma"),
    }


def test_select_pattern_index_clamps():
    bank = default_bank()
    assert select_pattern_index(3, bank) == 3
    assert select_pattern_index(200, bank) == 7
    assert select_pattern_index(0, bank) == 0


def test_select_pattern_index_clamp_idempotent():
    bank = default_bank()
    for v in range(0, 300, 7):
        assert select_pattern_index(v, bank) == select_pattern_index(min(v, 7), bank)


def test_select_pattern_rejects_negative():
    with pytest.raises(ValueError):
        select_pattern_index(-1, default_bank())


def test_empty_bank_rejected():
    with pytest.raises(ValueError):
        PatternBank(())
    with pytest.raises(ValueError):
        PatternBank(((0, 9),))


def test_build_track_single_slot():
    g4 = ASSIGNMENTS[0]
    msgs = build_track(g4, (0,))
    assert [(m.status, m.data1, m.data2, m.at_tick) for m in msgs] == [
        (0x90, 0x43, 0x64, 0),
        (0x80, 0x43, 0x00, 48),
    ]


def test_build_track_empty_row():
    assert build_track(ASSIGNMENTS[1], ()) == []


def test_build_track_full_row_covers_bar():
    msgs = build_track(ASSIGNMENTS[0], tuple(range(8)))
    ons = [m for m in msgs if m.status == 0x90]
    offs = [m for m in msgs if m.status == 0x80]
    assert len(ons) == len(offs) == 8
    assert [m.at_tick for m in ons] == [48 * s for s in range(8)]
    assert all(m.at_tick == on.at_tick + 48 for on, m in zip(ons, offs))


def test_dynamics_cc_bytes():
    st = replace(INITIAL_STATE, attention=127, relaxation=0)
    med, att = dynamics_cc(st)
    assert att.to_bytes() == bytes((0xB0, 0x0B, 0x7F))
    assert med.to_bytes() == bytes((0xB0, 0x01, 0x00))
    mid = dynamics_cc(replace(INITIAL_STATE, attention=64))[1]
    assert mid.data2 == 0x40


def test_render_bar_all_zero_state():
    bar = render_bar(state_with(), default_bank())
    ons = [m for m in bar if m.status == 0x90]
    assert len(ons) == 7
    assert all(m.at_tick == 0 for m in ons)
    assert {m.data1 for m in ons} == {67, 71, 74, 78, 43, 50, 55}
    assert all(m.data2 == 100 for m in ons)
    # controllers first, at tick 0
    assert bar[0].status == bar[1].status == 0xB0


def test_render_bar_theta_dense_others_sparse():
    bar = render_bar(state_with(theta=7), default_bank())
    g4_ons = [m for m in bar if m.status == 0x90 and m.data1 == 67]
    other_ons = [m for m in bar if m.status == 0x90 and m.data1 != 67]
    assert [m.at_tick for m in g4_ons] == [48 * s for s in range(8)]
    assert all(m.at_tick == 0 for m in other_ons)
    assert len(other_ons) == 6


def test_render_bar_deterministic():
    rng = random.Random(21)
    st = random_state(rng)
    assert render_bar(st, default_bank()) == render_bar(st, default_bank())


def test_note_set_and_velocity_on_random_states():
    rng = random.Random(33)
    bank = default_bank()
    for _ in range(200):
        bar = render_bar(random_state(rng), bank)
        for m in bar:
            if m.status == 0x90:
                assert m.data1 in NOTE_SET
                assert m.data2 == 100
            assert m.status & 0x80
            assert m.data1 < 128 and m.data2 < 128


def test_every_note_on_has_matching_later_off():
    rng = random.Random(34)
    for _ in range(50):
        bar = render_bar(random_state(rng), default_bank())
        opened = {}
        for m in sorted(bar, key=lambda m: m.at_tick):
            if m.status == 0x90:
                opened.setdefault(m.data1, []).append(m.at_tick)
        for m in bar:
            if m.status == 0x80:
                ons = opened[m.data1]
                starts = [t for t in ons if t < m.at_tick]
                assert starts, "note-off with no earlier note-on"


def test_midimessage_validation():
    with pytest.raises(ValueError):
        MidiMessage(0x10, 0, 0, 0)
    with pytest.raises(ValueError):
        MidiMessage(0x90, 200, 0, 0)


def test_write_smf_empty_is_conductor_only():
    data = write_smf([], tempo_bpm=120.0)
    fmt, division, tempos, events = read_smf(data)
    assert fmt == 1
    assert division == 96
    assert tempos == [(0, 500000)]
    assert events == []


def test_write_smf_round_trip_event_set():
    rng = random.Random(55)
    bars = [render_bar(random_state(rng), default_bank()) for _ in range(4)]
    data = write_smf(bars, tempo_bpm=120.0)
    fmt, division, tempos, events = read_smf(data)
    assert division == 96 and tempos[0] == (0, 500000)
    want = []
    for idx, bar in enumerate(bars):
        for m in bar:
            want.append((idx * 384 + m.at_tick, m.status, m.data1, m.data2))
    assert sorted(events) == sorted(want)


def test_write_smf_track_count():
    data = write_smf([render_bar(state_with(), default_bank())])
    assert data.count(b"MTrk") == 8  # conductor + 7 voices


def test_write_smf_rejects_bad_tempo():
    with pytest.raises(ValueError):
        write_smf([], tempo_bpm=0.0)
