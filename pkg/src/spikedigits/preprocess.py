"""Turn an arbitrary user-drawn grayscale canvas into a 28x28 image with
MNIST statistics: threshold, crop to ink, resize the longer side to 20 px,
place by center of mass in a 28x28 box, then blur to grayscale.

Ink is high-valued (white on black).  The binarization threshold defaults
to the 128 midpoint and the blur is a normalized 3x3 Gaussian with
sigma 0.8; both are pinned here so outputs are reproducible.
"""
from __future__ import annotations

import numpy as np
from PIL import Image

OUT_SIDE = 28
CONTENT_SIDE = 20
BLUR_SIGMA = 0.8


class BlankDrawingError(ValueError):
    """The canvas holds no ink above the binarization threshold."""


def _as_canvas(canvas) -> np.ndarray:
    arr = np.asarray(canvas)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"canvas must be a 2-D grayscale array, got shape {arr.shape}")
    return arr


def binarize(canvas, threshold: int = 128) -> np.ndarray:
    """Boolean ink mask: pixels at or above ``threshold``."""
    if not 0 <= threshold <= 255:
        raise ValueError("threshold must lie in 0..255")
    return _as_canvas(canvas) >= threshold


def crop_to_ink(mask) -> tuple[int, int, int, int]:
    """Tight bounding box of True cells as half-open (r0, r1, c0, c1)."""
    mask = np.asarray(mask, dtype=bool)
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    if rows.size == 0:
        raise BlankDrawingError("blank drawing: no ink above threshold")
    return int(rows[0]), int(rows[-1]) + 1, int(cols[0]), int(cols[-1]) + 1


def resize_preserving_aspect(image, longest_side: int = CONTENT_SIDE) -> np.ndarray:
    """Bilinear resample so the longer dimension equals ``longest_side``.

    The shorter side is scaled proportionally and rounded to the nearest
    pixel, floored at 1.
    """
    arr = _as_canvas(image).astype(np.uint8)
    h, w = arr.shape
    if h >= w:
        new_h = longest_side
        new_w = max(1, int(np.floor(w * longest_side / h + 0.5)))
    else:
        new_w = longest_side
        new_h = max(1, int(np.floor(h * longest_side / w + 0.5)))
    resized = Image.fromarray(arr).resize((new_w, new_h), Image.Resampling.BILINEAR)
    return np.asarray(resized, dtype=np.uint8)


def center_by_mass(image, out_size: int = OUT_SIDE) -> np.ndarray:
    """Place the image in an out_size square so its intensity centroid
    lands on the box center, at the nearest whole-pixel offset.

    Offsets are clamped so no ink is pushed off the canvas.
    """
    arr = _as_canvas(image).astype(np.float64)
    h, w = arr.shape
    if h > out_size or w > out_size:
        raise ValueError(f"image {arr.shape} does not fit in {out_size}x{out_size}")
    total = arr.sum()
    if total == 0:
        raise BlankDrawingError("blank drawing: no mass to center")
    r_bar = float((arr.sum(axis=1) * np.arange(h)).sum() / total)
    c_bar = float((arr.sum(axis=0) * np.arange(w)).sum() / total)
    center = (out_size - 1) / 2.0
    dr = int(np.floor(center - r_bar + 0.5))
    dc = int(np.floor(center - c_bar + 0.5))
    dr = min(max(dr, 0), out_size - h)
    dc = min(max(dc, 0), out_size - w)
    out = np.zeros((out_size, out_size), dtype=np.uint8)
    out[dr : dr + h, dc : dc + w] = np.asarray(image, dtype=np.uint8)
    return out


def _gaussian_kernel_3x3(sigma: float = BLUR_SIGMA) -> np.ndarray:
    offsets = np.array([-1.0, 0.0, 1.0])
    gauss = np.exp(-(offsets[:, None] ** 2 + offsets[None, :] ** 2) / (2 * sigma**2))
    return gauss / gauss.sum()


def blur(image) -> np.ndarray:
    """Normalized 3x3 Gaussian blur with zero-padded borders, back to uint8."""
    arr = _as_canvas(image).astype(np.float64)
    kernel = _gaussian_kernel_3x3()
    padded = np.pad(arr, 1, mode="constant")
    out = np.zeros_like(arr)
    for a in range(3):
        for b in range(3):
            out += kernel[a, b] * padded[a : a + arr.shape[0], b : b + arr.shape[1]]
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def preprocess_pipeline(canvas, threshold: int = 128) -> np.ndarray:
    """Full canvas-to-28x28 pipeline; raises BlankDrawingError on empty ink."""
    mask = binarize(canvas, threshold)
    r0, r1, c0, c1 = crop_to_ink(mask)
    ink = np.where(mask[r0:r1, c0:c1], 255, 0).astype(np.uint8)
    resized = resize_preserving_aspect(ink, CONTENT_SIDE)
    placed = center_by_mass(resized, OUT_SIDE)
    return blur(placed)
