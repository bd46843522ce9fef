"""Host side of the installation's lamp/spray link.

Three humidifier lamps listen on serial links for single ASCII command
characters: '0'-'9'/'A'-'F' select one of 16 colors, 'Z' switches off,
'S' fires one 200 ms spray pulse. The firmware latches a color until told
otherwise and needs at least 200 ms between visible changes, so the
encoder is edge-triggered: a byte goes out only when a lamp's command
actually changes, and 'S' only on the spray's rising edge.
"""

from __future__ import annotations

from dataclasses import dataclass

from .mindstate import MindState, classify_interval

COLOR_CHARS = "0123456789ABCDEF"
OFF = "Z"
SPRAY = "S"
COMMAND_ALPHABET = frozenset(COLOR_CHARS) | {OFF, SPRAY}

#: RGB for each command character; 'A' (yellow) and 'Z' (off) are fixed
#: by the firmware, the rest are this host's defaults and configurable
DEFAULT_COLOR_TABLE = {
    "0": (255, 0, 0),
    "1": (0, 0, 255),
    "2": (255, 128, 0),
    "3": (0, 128, 128),
    "4": (0, 255, 0),
    "5": (0, 128, 255),
    "6": (255, 0, 255),
    "7": (128, 0, 255),
    "8": (255, 64, 160),
    "9": (0, 255, 128),
    "A": (255, 255, 0),
    "B": (255, 200, 120),
    "C": (255, 160, 0),
    "D": (220, 20, 60),
    "E": (0, 255, 255),
    "F": (255, 80, 0),
    "Z": (0, 0, 0),
}

#: the color each of the six eSense intervals lights, cool to warm
DEFAULT_INTERVAL_COLORS = ("1", "3", "5", "A", "C", "F")

DEFAULT_SPRAY_MIN_RELAXATION = 111  # bottom of the top interval
DEFAULT_SPRAY_COOLDOWN_S = 5.0


def make_color_table(entries) -> dict[str, tuple[int, int, int]]:
    """Validate a 16-color table (plus 'Z'); 'A' must stay yellow and
    'Z' must stay off, both are anchored in the firmware."""
    table = {str(k).upper(): tuple(int(c) for c in v) for k, v in entries.items()}
    missing = [c for c in COLOR_CHARS if c not in table]
    if missing:
        raise ValueError(f"color table missing entries for {missing}")
    table.setdefault(OFF, (0, 0, 0))
    if table["A"] != (255, 255, 0):
        raise ValueError("'A' must map to yellow (255,255,0)")
    if table[OFF] != (0, 0, 0):
        raise ValueError("'Z' must map to (0,0,0)")
    for char, rgb in table.items():
        if len(rgb) != 3 or any(not 0 <= c <= 255 for c in rgb):
            raise ValueError(f"bad RGB triple for {char!r}: {rgb}")
    return table


@dataclass(frozen=True)
class LampFrame:
    lamp_attention: str
    lamp_relaxation: str
    lamp_both: str
    spray: bool

    def __post_init__(self):
        for c in (self.lamp_attention, self.lamp_relaxation, self.lamp_both):
            if c not in COMMAND_ALPHABET or c == SPRAY:
                raise ValueError(f"bad lamp command {c!r}")


def lamp_frame(state: MindState, interval_colors=DEFAULT_INTERVAL_COLORS) -> LampFrame:
    """First lamp shows the attention interval's color, second the
    relaxation interval's, third lights only when both intervals agree
    (sharing their color), otherwise it stays off."""
    if len(interval_colors) != 6:
        raise ValueError("need one color per interval (6)")
    ia = classify_interval(state.attention)
    ir = classify_interval(state.relaxation)
    color_a = interval_colors[ia - 1]
    color_r = interval_colors[ir - 1]
    both = color_a if ia == ir else OFF
    return LampFrame(color_a, color_r, both, spray=False)


def spray_policy(
    state: MindState,
    last_spray_s: float,
    now_s: float,
    min_relaxation: int = DEFAULT_SPRAY_MIN_RELAXATION,
    cooldown_s: float = DEFAULT_SPRAY_COOLDOWN_S,
) -> bool:
    """Fire the scent pulse on sustained top-interval relaxation, at most
    once per cooldown window."""
    if now_s < last_spray_s:
        raise ValueError("now_s must be >= last_spray_s")
    return state.relaxation >= min_relaxation and (now_s - last_spray_s) >= cooldown_s


class CommandEncoder:
    """Turns LampFrames into per-link bytes, emitting only changes.

    Links are indexed 0 (attention lamp), 1 (relaxation lamp),
    2 (both-lamp); the spray byte rides on `spray_link`. Feeding the same
    frame twice yields no bytes at all.
    """

    def __init__(self, spray_link: int = 2):
        if not 0 <= spray_link <= 2:
            raise ValueError("spray_link must be 0, 1 or 2")
        self._spray_link = spray_link
        self._last: LampFrame | None = None

    def encode(self, frame: LampFrame) -> tuple[bytes, bytes, bytes]:
        prev = self._last
        out = [b"", b"", b""]
        commands = (frame.lamp_attention, frame.lamp_relaxation, frame.lamp_both)
        previous = (
            (prev.lamp_attention, prev.lamp_relaxation, prev.lamp_both)
            if prev
            else (None, None, None)
        )
        for i, (cur, old) in enumerate(zip(commands, previous)):
            if cur != old:
                out[i] = cur.encode("ascii")
        if frame.spray and not (prev and prev.spray):
            out[self._spray_link] += SPRAY.encode("ascii")
        self._last = frame
        return tuple(out)

    def reset(self):
        self._last = None
