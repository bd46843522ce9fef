"""Wire framing: hand-checked vectors, round trips, resync, fuzz."""

import random

import pytest

from mindsynth.events import (
    Attention,
    BandPowers,
    BlinkStrength,
    Meditation,
    PoorSignal,
    RawSample,
)
from mindsynth.protocol import StreamParser, encode_packet, parse_stream


def kinds(events):
    return [e.kind for e in events]


def test_attention_vector():
    events, consumed, errors = parse_stream(bytes.fromhex("AAAA020432C9"))
    assert kinds(events) == [Attention(50)]
    assert consumed == 6
    assert errors == []


def test_poor_signal_vector():
    events, consumed, errors = parse_stream(bytes.fromhex("AAAA020200FD"))
    assert kinds(events) == [PoorSignal(0)]
    assert consumed == 6
    assert errors == []


def test_checksum_failure_drops_packet():
    events, consumed, errors = parse_stream(bytes.fromhex("AAAA020432C8"))
    assert events == []
    assert consumed == 6
    assert [e.reason for e in errors] == ["bad_checksum"]


def test_encode_attention():
    assert encode_packet([Attention(50)]) == bytes.fromhex("AAAA020432C9")


def test_encode_empty():
    assert encode_packet([]) == b""


def test_encode_band_powers_zero():
    data = encode_packet([BandPowers(0, 0, 0, 0, 0, 0, 0, 0)])
    # sync + length byte + 26-byte payload + checksum
    assert len(data) == 30
    assert data[3] == 0x83 and data[4] == 0x18
    assert data[-1] == 0x64  # 255 - (0x83 + 0x18)
    events, consumed, errors = parse_stream(data)
    assert kinds(events) == [BandPowers(0, 0, 0, 0, 0, 0, 0, 0)]
    assert consumed == len(data) and not errors


def test_encode_rejects_out_of_range():
    with pytest.raises(ValueError):
        encode_packet([Attention(101)])
    with pytest.raises(ValueError):
        encode_packet([PoorSignal(201)])
    with pytest.raises(ValueError):
        encode_packet([RawSample(40000)])


def random_kind(rng):
    choice = rng.randrange(6)
    if choice == 0:
        return RawSample(rng.randrange(-32768, 32768))
    if choice == 1:
        return PoorSignal(rng.randrange(201))
    if choice == 2:
        return Attention(rng.randrange(101))
    if choice == 3:
        return Meditation(rng.randrange(101))
    if choice == 4:
        return BlinkStrength(rng.randrange(256))
    return BandPowers(*(rng.randrange(1 << 24) for _ in range(8)))


def test_round_trip_random_lists():
    rng = random.Random(7)
    for _ in range(200):
        events = [random_kind(rng) for _ in range(rng.randrange(20))]
        data = encode_packet(events)
        parsed, consumed, errors = parse_stream(data, 42)
        assert kinds(parsed) == events
        assert consumed == len(data)
        assert errors == []
        assert all(e.t_us == 42 for e in parsed)


def test_long_list_splits_into_multiple_packets():
    events = [BandPowers(*(i % 7,) * 8) for i in range(40)]  # 26 bytes/row
    data = encode_packet(events)
    assert len(data) > 170  # cannot fit one frame
    parsed, consumed, errors = parse_stream(data)
    assert kinds(parsed) == events and not errors and consumed == len(data)


def test_garbage_prefix_never_hides_packet():
    packet = encode_packet([Attention(50), Meditation(9)])
    rng = random.Random(3)
    for _ in range(300):
        garbage = bytes(rng.randrange(256) for _ in range(rng.randrange(40)))
        events, consumed, _ = parse_stream(garbage + packet)
        assert kinds(events)[-2:] == [Attention(50), Meditation(9)], garbage.hex()
        assert consumed == len(garbage) + len(packet)


def test_sync_run_prefix():
    # a stray extra 0xAA in front of a packet (the classic triple-sync)
    packet = encode_packet([Attention(1)])
    events, consumed, errors = parse_stream(b"\xaa" + packet)
    assert kinds(events) == [Attention(1)]
    assert consumed == 1 + len(packet)


def test_trailing_partial_packet_left_unconsumed():
    packet = encode_packet([Attention(50)])
    data = packet + packet[:4]
    events, consumed, errors = parse_stream(data)
    assert kinds(events) == [Attention(50)]
    assert consumed == len(packet)
    assert errors == []


def test_trailing_lone_sync_byte_held():
    data = b"\x01\x02\xaa"
    events, consumed, errors = parse_stream(data)
    assert events == []
    assert consumed == 2  # garbage consumed, possible sync start held
    assert [e.reason for e in errors] == ["bad_sync"]


def test_unknown_single_byte_row_skipped():
    payload = bytes((0x07, 0x11, 0x04, 0x32))  # unknown row, then attention
    packet = b"\xaa\xaa" + bytes((len(payload),)) + payload + bytes((~sum(payload) & 0xFF,))
    events, consumed, errors = parse_stream(packet)
    assert kinds(events) == [Attention(50)]
    assert [e.reason for e in errors] == ["unknown_row"]


def test_unknown_multibyte_row_skipped_by_length():
    payload = bytes((0x90, 0x03, 1, 2, 3, 0x04, 0x32))
    packet = b"\xaa\xaa" + bytes((len(payload),)) + payload + bytes((~sum(payload) & 0xFF,))
    events, consumed, errors = parse_stream(packet)
    assert kinds(events) == [Attention(50)]
    assert [e.reason for e in errors] == ["unknown_row"]


def test_truncated_row_inside_valid_packet():
    payload = bytes((0x80, 0x02, 0x01))  # raw row missing one value byte
    packet = b"\xaa\xaa" + bytes((len(payload),)) + payload + bytes((~sum(payload) & 0xFF,))
    events, consumed, errors = parse_stream(packet)
    assert events == []
    assert [e.reason for e in errors] == ["truncated"]
    assert consumed == len(packet)


def test_length_overflow_reported():
    events, consumed, errors = parse_stream(b"\xaa\xaa\xfe\x01\x02")
    assert events == []
    assert any(e.reason == "length_overflow" for e in errors)


def test_parse_is_pure():
    rng = random.Random(11)
    data = bytes(rng.randrange(256) for _ in range(5000))
    assert parse_stream(data) == parse_stream(data)


def test_fuzz_never_crashes_and_terminates():
    rng = random.Random(1234)
    data = bytes(rng.randrange(256) for _ in range(100_000))
    events, consumed, errors = parse_stream(data)
    assert consumed <= len(data)
    for err in errors:
        assert 0 <= err.offset < len(data)
    for ev in events:  # whatever decodes is at least range-valid
        from mindsynth.events import validate_kind

        validate_kind(ev.kind)


def test_stream_parser_byte_at_a_time():
    stream = encode_packet([Attention(10)]) + b"\x55" + encode_packet(
        [RawSample(-5), BandPowers(1, 2, 3, 4, 5, 6, 7, 8)]
    )
    whole, _, _ = parse_stream(stream, 0)
    parser = StreamParser()
    dribbled = []
    for i, byte in enumerate(stream):
        events, _ = parser.feed(bytes([byte]), 0)
        dribbled.extend(events)
    assert kinds(dribbled) == kinds(whole)
    assert parser.pending == 0


def test_timestamps_non_decreasing_within_stream():
    parser = StreamParser()
    all_events = []
    for t, chunk in ((0, encode_packet([Attention(1)])), (5, encode_packet([Attention(2)]))):
        events, _ = parser.feed(chunk, t)
        all_events.extend(events)
    times = [e.t_us for e in all_events]
    assert times == sorted(times)
