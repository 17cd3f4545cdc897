"""Input validation helpers shared by the estimator, CLI, and service."""
from __future__ import annotations

import numpy as np

IMAGE_SIDE = 28
N_PIXELS = IMAGE_SIDE * IMAGE_SIDE


def as_pixel_image(x) -> np.ndarray:
    """Coerce one image to a (28, 28) uint8 array of levels 0..255.

    Accepts (28, 28) or flat (784,) layouts and any numeric dtype whose
    values are whole numbers in range.
    """
    arr = np.asarray(x)
    if arr.shape == (N_PIXELS,):
        arr = arr.reshape(IMAGE_SIDE, IMAGE_SIDE)
    if arr.shape != (IMAGE_SIDE, IMAGE_SIDE):
        raise ValueError(f"expected a 28x28 image, got shape {arr.shape}")
    if arr.dtype == np.uint8:
        return arr
    values = arr.astype(np.float64)
    if not np.all(np.isfinite(values)):
        raise ValueError("image contains non-finite values")
    if np.any((values < 0) | (values > 255)):
        raise ValueError("pixel levels must lie in 0..255")
    if np.any(values != np.round(values)):
        raise ValueError("pixel levels must be whole numbers")
    return values.astype(np.uint8)


def as_pixel_batch(X) -> np.ndarray:
    """Coerce a batch to (n, 28, 28) uint8, accepting (n, 784) as well."""
    arr = np.asarray(X)
    if arr.ndim == 1:
        raise ValueError("expected a batch of images, got a single vector")
    if arr.ndim == 2 and arr.shape[1] == N_PIXELS:
        arr = arr.reshape(-1, IMAGE_SIDE, IMAGE_SIDE)
    if arr.ndim != 3 or arr.shape[1:] != (IMAGE_SIDE, IMAGE_SIDE):
        raise ValueError(f"expected (n, 784) or (n, 28, 28), got shape {arr.shape}")
    if arr.dtype == np.uint8:
        return arr
    return np.stack([as_pixel_image(img) for img in arr])


def check_weights(w, shape=None) -> np.ndarray:
    """Validate a weight matrix: 2-D, finite, optionally an exact shape."""
    arr = np.asarray(w, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"weights must be 2-D, got shape {arr.shape}")
    if shape is not None and arr.shape != tuple(shape):
        raise ValueError(f"expected weights of shape {tuple(shape)}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("weights contain non-finite values")
    return arr
