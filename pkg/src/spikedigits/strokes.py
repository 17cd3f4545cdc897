"""Deterministic synthetic handwritten digits, drawn as jittered pen
strokes on a canvas and normalized through the preprocessing pipeline.

Each digit has a fixed stroke skeleton in unit coordinates; per-sample
randomness (rotation, anisotropic scale, shear, translation, point noise,
brush width) comes from a seed-derived generator, so a (seed, index) pair
always yields the same image.  This stands in for user drawings in tests
and demos, and for MNIST when the real files are not on disk.
"""
from __future__ import annotations

import numpy as np
from PIL import Image, ImageDraw

from .preprocess import preprocess_pipeline


def _arc(cx, cy, rx, ry, deg0, deg1, n=28) -> np.ndarray:
    theta = np.radians(np.linspace(deg0, deg1, n))
    return np.column_stack([cx + rx * np.cos(theta), cy + ry * np.sin(theta)])


def _line(*points) -> np.ndarray:
    return np.asarray(points, dtype=np.float64)


def stroke_points(digit: int) -> list[np.ndarray]:
    """Unit-box stroke skeletons (x right, y down) for one digit."""
    if digit == 0:
        return [_arc(0.50, 0.50, 0.26, 0.38, 0, 360, n=40)]
    if digit == 1:
        return [_line((0.38, 0.22), (0.54, 0.10), (0.54, 0.90))]
    if digit == 2:
        top = _arc(0.50, 0.30, 0.24, 0.20, 180, 385)
        return [np.vstack([top, _line((0.25, 0.88), (0.78, 0.88))])]
    if digit == 3:
        upper = _arc(0.45, 0.30, 0.22, 0.18, 210, 450)
        lower = _arc(0.45, 0.68, 0.24, 0.20, 270, 510)
        return [np.vstack([upper, lower])]
    if digit == 4:
        return [
            _line((0.58, 0.10), (0.24, 0.58), (0.80, 0.58)),
            _line((0.64, 0.26), (0.64, 0.90)),
        ]
    if digit == 5:
        bar = _line((0.72, 0.12), (0.32, 0.12), (0.30, 0.45))
        bowl = np.vstack([_line((0.30, 0.45)), _arc(0.45, 0.66, 0.26, 0.22, 270, 495)])
        return [bar, bowl]
    if digit == 6:
        sweep = _arc(0.55, 0.38, 0.26, 0.30, 300, 180, n=24)
        loop = _arc(0.47, 0.70, 0.21, 0.19, 180, 540, n=40)
        return [np.vstack([sweep, loop])]
    if digit == 7:
        return [_line((0.24, 0.14), (0.76, 0.14), (0.42, 0.90))]
    if digit == 8:
        return [
            _arc(0.50, 0.30, 0.195, 0.175, 0, 360, n=36),
            _arc(0.50, 0.70, 0.225, 0.200, 0, 360, n=36),
        ]
    if digit == 9:
        loop = _arc(0.52, 0.32, 0.20, 0.19, 0, 360, n=36)
        tail = _line((0.72, 0.32), (0.70, 0.62), (0.62, 0.90))
        return [loop, tail]
    raise ValueError(f"digit must be 0..9, got {digit}")


def _jitter(strokes: list[np.ndarray], rng: np.random.Generator) -> list[np.ndarray]:
    angle = rng.uniform(-0.14, 0.14)
    sx, sy = rng.uniform(0.85, 1.12, size=2)
    shear = rng.uniform(-0.10, 0.10)
    tx, ty = rng.uniform(-0.03, 0.03, size=2)
    rot = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    mat = rot @ np.array([[sx, shear * sx], [0.0, sy]])
    out = []
    for pts in strokes:
        moved = (pts - 0.5) @ mat.T + 0.5 + (tx, ty)
        moved = moved + rng.normal(0.0, 0.008, size=moved.shape)
        out.append(moved)
    return out


def render_digit_canvas(
    digit: int, rng: np.random.Generator, size: int = 96
) -> np.ndarray:
    """Rasterize one jittered digit: white ink on black, uint8 (size, size)."""
    margin = 0.14 * size
    span = size - 2 * margin
    width = max(2, int(round(0.10 * size * rng.uniform(0.8, 1.25))))
    img = Image.new("L", (size, size), 0)
    draw = ImageDraw.Draw(img)
    for pts in _jitter(stroke_points(digit), rng):
        px = margin + pts * span
        xy = [(float(x), float(y)) for x, y in px]
        draw.line(xy, fill=255, width=width, joint="curve")
        r = width / 2
        for x, y in (xy[0], xy[-1]):
            draw.ellipse([x - r, y - r, x + r, y + r], fill=255)
    return np.asarray(img, dtype=np.uint8)


def _sample_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def synthetic_canvases(
    n: int, seed: int = 0, size_range: tuple[int, int] = (72, 128)
) -> list[tuple[np.ndarray, int]]:
    """Raw drawn canvases cycling through the digits; sizes vary per sample."""
    out = []
    for i in range(n):
        rng = _sample_rng(seed, i)
        size = int(rng.integers(size_range[0], size_range[1] + 1))
        digit = i % 10
        out.append((render_digit_canvas(digit, rng, size), digit))
    return out


def synthetic_dataset(
    n_per_class: int, seed: int = 0, size: int = 96
) -> tuple[np.ndarray, np.ndarray]:
    """MNIST-statistics images: (n, 28, 28) uint8 plus digit labels."""
    images = []
    labels = []
    for i in range(n_per_class * 10):
        digit = i % 10
        canvas = render_digit_canvas(digit, _sample_rng(seed, i), size)
        images.append(preprocess_pipeline(canvas))
        labels.append(digit)
    return np.stack(images), np.asarray(labels, dtype=np.uint8)
