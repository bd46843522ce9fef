"""Deterministic generative art: rose curves, the random line-circle
study, and the brainwave-driven circle field, plus scene serialization
and a reference rasterizer.

The circle field reseeds its generator every frame and spends exactly 11
variates per glyph no matter which branches run, so glyph i sees the same
randomness at every point in time; only the time-scaled displacement,
size oscillation and color drift move. That is what makes frames cohere
into continuous motion instead of noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .rng import SplitMix64

DEFAULT_SEED = 99999
DEFAULT_WIDTH = 1366
DEFAULT_HEIGHT = 768
STROKE_ALPHA = 50  # every circle is outlined in black at this alpha

#: default 12-color palette (RGB); overridable from the config file
DEFAULT_PALETTE = (
    (235, 64, 52),
    (247, 127, 35),
    (252, 186, 3),
    (181, 217, 28),
    (78, 186, 73),
    (38, 166, 154),
    (41, 128, 185),
    (52, 73, 194),
    (124, 77, 255),
    (171, 71, 188),
    (236, 64, 122),
    (240, 240, 240),
)


@dataclass(frozen=True)
class RoseSpec:
    """Rhodonea curve r = cos(k*theta) with k = n/d."""

    n: int
    d: int
    samples: int = 720
    theta_max: float = 4 * math.pi

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be positive integers")
        if self.samples < 16:
            raise ValueError("need at least 16 samples")

    @property
    def k(self) -> float:
        return self.n / self.d


@dataclass(frozen=True)
class ArtState:
    """Inputs of one circle-field frame."""

    cc: int  # circle count (delta scalar by default)
    div: int  # screen divisor (gamma scalar), >= 1
    att: int  # 0..127
    med: int  # 0..127
    time_s: float
    seed: int = DEFAULT_SEED
    width: int = DEFAULT_WIDTH
    height: int = DEFAULT_HEIGHT

    def __post_init__(self):
        if self.cc < 0:
            raise ValueError("cc must be >= 0")
        if self.div < 1:
            raise ValueError("div must be >= 1")
        for v in (self.att, self.med):
            if not 0 <= v <= 127:
                raise ValueError("att/med must be 0..127")

    @property
    def cell_size(self) -> float:
        return self.width / self.div


@dataclass(frozen=True)
class CircleGlyph:
    x: float
    y: float
    diameter: float
    color_index: int
    alpha: float  # 0..255, landed in [min(att, med), max(att, med)]


@dataclass(frozen=True)
class Scene:
    width: int
    height: int
    glyphs: tuple[CircleGlyph, ...]


def rose_polyline(spec: RoseSpec) -> np.ndarray:
    """(samples, 2) points of the rose, uniformly sampled over theta."""
    theta = np.linspace(0.0, spec.theta_max, spec.samples)
    r = np.cos(spec.k * theta)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def random_line_circle(seed: int) -> list[tuple[float, float, float, float]]:
    """The 360-line study: segments (x1, 0) -> (0, y2) with x1 in
    [50, 150) and y2 in [150, 360), deterministic per seed."""
    rng = SplitMix64(seed)
    segments = []
    for _ in range(360):
        x1 = rng.uniform(50.0, 150.0)
        y2 = rng.uniform(150.0, 360.0)
        segments.append((x1, 0.0, 0.0, y2))
    return segments


def _wrap(v: float, extent: float, ss: float) -> float:
    # modular wrap into [-ss, extent+ss)
    period = extent + 2.0 * ss
    return ((v + ss) % period) - ss


def circle_field_frame(state: ArtState, palette_len: int = len(DEFAULT_PALETTE)) -> Scene:
    """One frame of the circle field.

    Per glyph, in draw order: u1/u2 pick the base cell position, u3/u4
    set displacement speed and direction, u5 picks the moving axis,
    u6..u8 the size oscillation, u9/u10 the color and its time drift,
    u11 the opacity between the attention and relaxation levels.
    """
    if palette_len < 1:
        raise ValueError("palette must have at least one color")
    rng = SplitMix64(state.seed)
    ss = state.cell_size
    alpha_lo = float(min(state.att, state.med))
    alpha_hi = float(max(state.att, state.med))
    t = state.time_s
    glyphs = []
    for _ in range(state.cc):
        u = [rng.uniform() for _ in range(11)]
        x = u[0] * (state.div + 1) * ss
        y = u[1] * (state.div + 1) * ss
        disp = t * (0.1 + 0.9 * u[2]) * 60.0 * (-1.0 if u[3] < 0.5 else 1.0)
        if u[4] > 0.5:
            x = _wrap(x + disp, state.width, ss)
        else:
            y = _wrap(y + disp, state.height, ss)
        diameter = ss * u[5] * (1.0 - math.cos(t * u[6]) * u[7])
        color = int(abs(u[8] * palette_len + t * (2.0 * u[9] - 1.0))) % palette_len
        alpha = alpha_lo + (alpha_hi - alpha_lo) * u[10]
        glyphs.append(CircleGlyph(x, y, diameter, color, alpha))
    return Scene(state.width, state.height, tuple(glyphs))


def rasterize(scene: Scene, palette=DEFAULT_PALETTE) -> np.ndarray:
    """Reference render: black background, glyphs composited in order
    with alpha-over, 1-pixel black stroke ring at alpha 50/255. Returns
    (height, width, 3) uint8."""
    img = np.zeros((scene.height, scene.width, 3), dtype=np.float64)
    stroke_a = STROKE_ALPHA / 255.0
    for g in scene.glyphs:
        rgb = palette[g.color_index]
        kernels.composite_circle(
            img,
            g.x,
            g.y,
            g.diameter / 2.0,
            float(rgb[0]),
            float(rgb[1]),
            float(rgb[2]),
            g.alpha / 255.0,
            stroke_a,
        )
    return np.floor(img + 0.5).astype(np.uint8)


def write_ppm(image: np.ndarray) -> bytes:
    """Binary PPM (P6, maxval 255)."""
    h, w = image.shape[0], image.shape[1]
    return b"P6\n%d %d\n255\n" % (w, h) + image.astype(np.uint8).tobytes()


class SceneFormatError(ValueError):
    def __init__(self, message, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def write_scene(scene: Scene) -> str:
    """Native lossless text form: header, then one glyph per line
    ``x y diameter color_index alpha`` (floats via repr, so reading the
    text back reproduces the scene exactly)."""
    lines = [f"scene {scene.width} {scene.height}"]
    for g in scene.glyphs:
        lines.append(f"{g.x!r} {g.y!r} {g.diameter!r} {g.color_index} {g.alpha!r}")
    return "\n".join(lines) + "\n"


def read_scene(text: str) -> Scene:
    lines = text.splitlines()
    if not lines:
        raise SceneFormatError("empty document", 1)
    head = lines[0].split()
    if len(head) != 3 or head[0] != "scene":
        raise SceneFormatError("expected header 'scene <width> <height>'", 1)
    try:
        width, height = int(head[1]), int(head[2])
    except ValueError:
        raise SceneFormatError("non-integer scene size", 1) from None
    glyphs = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 5:
            raise SceneFormatError(f"expected 5 fields, got {len(parts)}", lineno)
        try:
            glyphs.append(
                CircleGlyph(
                    float(parts[0]),
                    float(parts[1]),
                    float(parts[2]),
                    int(parts[3]),
                    float(parts[4]),
                )
            )
        except ValueError as exc:
            raise SceneFormatError(str(exc), lineno) from None
    return Scene(width, height, tuple(glyphs))


def write_svg(scene: Scene, palette=DEFAULT_PALETTE) -> str:
    """SVG 1.1 document; circle fill-opacity carries alpha/255."""
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{scene.width}" '
        f'height="{scene.height}" viewBox="0 0 {scene.width} {scene.height}">',
        f'<rect width="{scene.width}" height="{scene.height}" fill="black"/>',
    ]
    stroke_op = f"{STROKE_ALPHA / 255:.3f}"
    for g in scene.glyphs:
        r, gg, b = palette[g.color_index]
        out.append(
            f'<circle cx="{g.x:.3f}" cy="{g.y:.3f}" r="{g.diameter / 2:.3f}" '
            f'fill="rgb({r},{gg},{b})" fill-opacity="{g.alpha / 255:.3f}" '
            f'stroke="black" stroke-opacity="{stroke_op}" stroke-width="1"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
