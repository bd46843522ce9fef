"""Binary framing for the headset telemetry stream.

Packet layout: ``0xAA 0xAA  PLENGTH  <payload>  CHKSUM`` with
PLENGTH <= 169 and ``CHKSUM = ~sum(payload) & 0xFF``. Payload rows:

====  ==================  =========================================
code  row                 value bytes
====  ==================  =========================================
0x02  poor signal         1 (0..200)
0x04  attention           1 (0..100)
0x05  meditation          1 (0..100)
0x16  blink strength      1 (0..255)
0x80  raw sample          length byte 0x02, then s16 big-endian
0x83  band powers         length byte 0x18, then 8 x u24 big-endian
====  ==================  =========================================

Codes >= 0x80 carry an explicit length byte; codes < 0x80 are one-byte
values. Unknown rows are skipped by that rule and reported, never fatal.
The parser is pure: same bytes in, same (events, consumed, errors) out.
"""

from __future__ import annotations

from dataclasses import dataclass

from .events import (
    Attention,
    BandPowers,
    BlinkStrength,
    EegEvent,
    EventKind,
    Meditation,
    PoorSignal,
    RawSample,
    validate_kind,
)

SYNC = 0xAA
PLENGTH_MAX = 169

CODE_POOR_SIGNAL = 0x02
CODE_ATTENTION = 0x04
CODE_MEDITATION = 0x05
CODE_BLINK = 0x16
CODE_RAW = 0x80
CODE_BANDS = 0x83

_SYNC_PAIR = bytes((SYNC, SYNC))


@dataclass(frozen=True)
class ParseError:
    """One recoverable defect found while scanning a byte stream."""

    offset: int
    reason: str  # bad_sync | length_overflow | bad_checksum | unknown_row | truncated


def checksum(payload) -> int:
    return ~sum(payload) & 0xFF


def _clamp(v, lo, hi):
    return lo if v < lo else hi if v > hi else v


def _parse_payload(payload, base, t_us, events, errors):
    """Decode rows of one checksum-verified payload.

    `base` is the absolute offset of the payload inside the original
    buffer, used only for error reporting.
    """
    k = 0
    n = len(payload)
    while k < n:
        code = payload[k]
        if code < 0x80:
            if k + 1 >= n:
                errors.append(ParseError(base + k, "truncated"))
                return
            v = payload[k + 1]
            if code == CODE_POOR_SIGNAL:
                events.append(EegEvent(t_us, PoorSignal(_clamp(v, 0, 200))))
            elif code == CODE_ATTENTION:
                events.append(EegEvent(t_us, Attention(_clamp(v, 0, 100))))
            elif code == CODE_MEDITATION:
                events.append(EegEvent(t_us, Meditation(_clamp(v, 0, 100))))
            elif code == CODE_BLINK:
                events.append(EegEvent(t_us, BlinkStrength(v)))
            else:
                errors.append(ParseError(base + k, "unknown_row"))
            k += 2
        else:
            if k + 1 >= n:
                errors.append(ParseError(base + k, "truncated"))
                return
            vlen = payload[k + 1]
            value = payload[k + 2 : k + 2 + vlen]
            if len(value) < vlen:
                errors.append(ParseError(base + k, "truncated"))
                return
            if code == CODE_RAW and vlen == 2:
                events.append(
                    EegEvent(t_us, RawSample(int.from_bytes(value, "big", signed=True)))
                )
            elif code == CODE_BANDS and vlen == 24:
                vals = [int.from_bytes(value[j : j + 3], "big") for j in range(0, 24, 3)]
                events.append(EegEvent(t_us, BandPowers(*vals)))
            else:
                errors.append(ParseError(base + k, "unknown_row"))
            k += 2 + vlen


def parse_stream(data, base_time_us: int = 0):
    """Scan `data` for packets.

    Returns ``(events, consumed, errors)``. Never raises on stream
    content: garbage is skipped (one ``bad_sync`` per run), corrupt
    packets are dropped with one error each, and a trailing partial
    packet is left unconsumed so the caller can retry once more bytes
    arrive. All events are stamped ``base_time_us``; arrival-based
    spacing of raw blocks is the source layer's job.
    """
    data = bytes(data)
    events: list[EegEvent] = []
    errors: list[ParseError] = []
    n = len(data)
    i = 0
    while True:
        j = data.find(_SYNC_PAIR, i)
        if j < 0:
            # No sync pair ahead. A trailing lone 0xAA may still become
            # one, so hold it back; everything else is garbage.
            keep = n
            if n > i and data[n - 1] == SYNC:
                keep = n - 1
            if keep > i:
                errors.append(ParseError(i, "bad_sync"))
            return events, keep, errors
        if j > i:
            errors.append(ParseError(i, "bad_sync"))
        if j + 2 >= n:
            return events, j, errors  # header incomplete
        plen = data[j + 2]
        if plen > PLENGTH_MAX:
            errors.append(ParseError(j + 2, "length_overflow"))
            i = j + 1  # a real packet may start inside (e.g. AA AA AA ..)
            continue
        end = j + 3 + plen + 1
        if end > n:
            return events, j, errors  # body incomplete
        payload = data[j + 3 : j + 3 + plen]
        if checksum(payload) != data[end - 1]:
            errors.append(ParseError(end - 1, "bad_checksum"))
            # A stray sync pair in garbage can open a bogus frame that
            # spans a real packet; rescan inside the failed span so the
            # real packet is not swallowed with it.
            p = data.find(_SYNC_PAIR, j + 2)
            i = p if 0 <= p < end else end
        else:
            _parse_payload(payload, j + 3, base_time_us, events, errors)
            i = end


def encode_rows(kind: EventKind) -> bytes:
    """Encode one event variant as its payload row bytes."""
    validate_kind(kind)
    if isinstance(kind, PoorSignal):
        return bytes((CODE_POOR_SIGNAL, kind.level))
    if isinstance(kind, Attention):
        return bytes((CODE_ATTENTION, kind.value))
    if isinstance(kind, Meditation):
        return bytes((CODE_MEDITATION, kind.value))
    if isinstance(kind, BlinkStrength):
        return bytes((CODE_BLINK, kind.value))
    if isinstance(kind, RawSample):
        return bytes((CODE_RAW, 2)) + kind.value.to_bytes(2, "big", signed=True)
    if isinstance(kind, BandPowers):
        out = bytearray((CODE_BANDS, 24))
        for v in kind.as_tuple():
            out += v.to_bytes(3, "big")
        return bytes(out)
    raise ValueError(f"cannot encode {kind!r}")


def encode_packet(kinds) -> bytes:
    """Frame event variants into packets (several if the payload budget
    of 169 bytes per packet overflows). Inverse of parse_stream:
    ``parse_stream(encode_packet(e))`` yields exactly ``e``, no errors.
    """
    out = bytearray()
    payload = bytearray()
    for kind in kinds:
        row = encode_rows(kind)
        if len(payload) + len(row) > PLENGTH_MAX:
            out += _frame(payload)
            payload = bytearray()
        payload += row
    if payload:
        out += _frame(payload)
    return bytes(out)


def _frame(payload) -> bytes:
    return _SYNC_PAIR + bytes((len(payload),)) + bytes(payload) + bytes((checksum(payload),))


class StreamParser:
    """Incremental wrapper holding back partial packets between feeds."""

    def __init__(self):
        self._buf = bytearray()

    def feed(self, chunk, t_us: int):
        self._buf += chunk
        events, consumed, errors = parse_stream(self._buf, t_us)
        del self._buf[:consumed]
        return events, errors

    @property
    def pending(self) -> int:
        return len(self._buf)
