"""Brainwave-to-MIDI mapper: G-major-triad note set, per-wave pattern
selection by clamping, eighth-note bar scheduling at velocity 100,
attention/relaxation controllers, and Standard MIDI File export.
"""

from __future__ import annotations

from dataclasses import dataclass

from .mindstate import MindState

PPQ = 96  # pulses per quarter note in exported files
SLOT_PULSES = 48  # one eighth-note slot
SLOTS_PER_BAR = 8
BAR_PULSES = SLOT_PULSES * SLOTS_PER_BAR

NOTE_ON = 0x90
NOTE_OFF = 0x80
CONTROL_CHANGE = 0xB0

VELOCITY = 100
DEFAULT_NOTE_LEN = SLOT_PULSES
DEFAULT_ATT_CC = 11  # expression: attention drives loudness
DEFAULT_MED_CC = 1  # mod wheel: relaxation


@dataclass(frozen=True)
class NoteAssignment:
    note_name: str
    midi_number: int
    wave: str  # MindState band-scalar field driving this voice


#: the seven fixed voices: G-major triad tones over octaves 2-5, one per
#: band scalar
ASSIGNMENTS = (
    NoteAssignment("G4", 67, "theta"),
    NoteAssignment("B4", 71, "alpha"),
    NoteAssignment("D5", 74, "beta"),
    NoteAssignment("Gb5", 78, "gamma"),
    NoteAssignment("G2", 43, "delta"),
    NoteAssignment("D3", 50, "high_alpha"),
    NoteAssignment("G3", 55, "avg_gamma"),
)

NOTE_SET = frozenset(a.midi_number for a in ASSIGNMENTS)


@dataclass(frozen=True)
class MidiMessage:
    status: int
    data1: int
    data2: int
    at_tick: int  # pulse offset inside the bar

    def __post_init__(self):
        if not self.status & 0x80:
            raise ValueError("status byte must have the high bit set")
        if not (0 <= self.data1 < 128 and 0 <= self.data2 < 128):
            raise ValueError("data bytes must be < 128")

    def to_bytes(self) -> bytes:
        return bytes((self.status, self.data1, self.data2))


@dataclass(frozen=True)
class PatternBank:
    """Rows of eighth-note slot positions (0-7); a wave's value picks the
    row, so higher bands reach denser rows."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not self.rows:
            raise ValueError("pattern bank needs at least one row")
        for row in self.rows:
            for tick in row:
                if not 0 <= tick < SLOTS_PER_BAR:
                    raise ValueError(f"slot {tick} outside 0..7")


def default_bank() -> PatternBank:
    # row r fires slots 0..r: density grows with the driving band value
    return PatternBank(tuple(tuple(range(r + 1)) for r in range(8)))


def bank_from_rows(rows) -> PatternBank:
    return PatternBank(tuple(tuple(int(t) for t in row) for row in rows))


def select_pattern_index(wave_value: int, bank: PatternBank) -> int:
    """Clamp the wave value onto the bank's row range."""
    if wave_value < 0:
        raise ValueError("wave value must be >= 0")
    return min(wave_value, len(bank.rows) - 1)


def build_track(
    assignment: NoteAssignment, row, note_len_ticks: int = DEFAULT_NOTE_LEN
) -> list[MidiMessage]:
    """Note-on/off pairs for one voice over one bar.

    Slots are visited in descending order (the original scheduler rebuilt
    tracks back to front); the result is then stable-sorted by pulse.
    """
    msgs = []
    for slot in sorted(row, reverse=True):
        on_pulse = slot * SLOT_PULSES
        msgs.append(MidiMessage(NOTE_ON, assignment.midi_number, VELOCITY, on_pulse))
        msgs.append(MidiMessage(NOTE_OFF, assignment.midi_number, 0, on_pulse + note_len_ticks))
    msgs.sort(key=lambda m: m.at_tick)
    return msgs


def dynamics_cc(
    state: MindState, att_cc: int = DEFAULT_ATT_CC, med_cc: int = DEFAULT_MED_CC
) -> list[MidiMessage]:
    """Relaxation and attention controllers (already 0-127) at tick 0."""
    return [
        MidiMessage(CONTROL_CHANGE, med_cc, state.relaxation, 0),
        MidiMessage(CONTROL_CHANGE, att_cc, state.attention, 0),
    ]


def render_bar(
    state: MindState,
    bank: PatternBank,
    note_len_ticks: int = DEFAULT_NOTE_LEN,
    att_cc: int = DEFAULT_ATT_CC,
    med_cc: int = DEFAULT_MED_CC,
) -> list[MidiMessage]:
    """One bar of output for one snapshot: controllers, then each voice
    playing the row its band value selects. Pure in (state, bank)."""
    msgs = dynamics_cc(state, att_cc, med_cc)
    for assignment in ASSIGNMENTS:
        row_idx = select_pattern_index(state.band(assignment.wave), bank)
        msgs.extend(build_track(assignment, bank.rows[row_idx], note_len_ticks))
    msgs.sort(key=lambda m: m.at_tick)
    return msgs


def _vlq(value: int) -> bytes:
    out = bytearray([value & 0x7F])
    value >>= 7
    while value:
        out.append(0x80 | (value & 0x7F))
        value >>= 7
    return bytes(reversed(out))


def _track_chunk(events) -> bytes:
    """`events` = iterable of (abs_pulse, payload bytes), already sorted."""
    body = bytearray()
    cursor = 0
    for pulse, payload in events:
        body += _vlq(pulse - cursor)
        body += payload
        cursor = pulse
    body += b"\x00\xff\x2f\x00"  # end of track
    return b"MTrk" + len(body).to_bytes(4, "big") + bytes(body)


def write_smf(bars, tempo_bpm: float = 120.0) -> bytes:
    """Format-1 file at 96 PPQ: a conductor track carrying the tempo and
    the controller messages, plus one track per voice. Bar b starts at
    pulse b*384."""
    if tempo_bpm <= 0:
        raise ValueError("tempo must be > 0")
    note_track = {a.midi_number: i for i, a in enumerate(ASSIGNMENTS)}
    conductor = [(0, b"\xff\x51\x03" + round(60e6 / tempo_bpm).to_bytes(3, "big"))]
    voice_events: list[list] = [[] for _ in ASSIGNMENTS]
    for bar_idx, bar in enumerate(bars):
        offset = bar_idx * BAR_PULSES
        for msg in bar:
            pulse = offset + msg.at_tick
            kind = msg.status & 0xF0
            if kind in (NOTE_ON, NOTE_OFF) and msg.data1 in note_track:
                voice_events[note_track[msg.data1]].append((pulse, msg.to_bytes()))
            else:
                conductor.append((pulse, msg.to_bytes()))
    ntracks = 1 + len(ASSIGNMENTS)
    header = b"MThd" + (6).to_bytes(4, "big") + (1).to_bytes(2, "big")
    header += ntracks.to_bytes(2, "big") + PPQ.to_bytes(2, "big")
    chunks = [_track_chunk(conductor)]
    chunks += [_track_chunk(evts) for evts in voice_events]
    return header + b"".join(chunks)
