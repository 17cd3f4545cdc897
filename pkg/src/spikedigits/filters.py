"""The fixed 3x3 feature-extraction filter bank.

Twelve kernels: four Sobel-style oriented edge detectors, their four
sign-flipped complements, and four corner detectors built as 2x2 quadrant
contrast patterns.  Kernel values are dimensionless; each filter carries a
current gain (amperes per unit kernel value) chosen so that a maximally
active 3x3 patch of input drives a hidden neuron into the 100-300 Hz
band.  The bank is immutable after construction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

N_FILTERS = 12

# Peak synaptic drive reached by a filter's best-matching patch; sustains
# a hidden firing rate of 166 Hz, mid 100-300 Hz band (tools/calibrate.py).
DEFAULT_FILTER_DRIVE = 15e-9

_SOBEL_H = [[1, 2, 1], [0, 0, 0], [-1, -2, -1]]
_SOBEL_V = [[1, 0, -1], [2, 0, -2], [1, 0, -1]]
_SOBEL_D = [[2, 1, 0], [1, 0, -1], [0, -1, -2]]
_SOBEL_AD = [[0, 1, 2], [-1, 0, 1], [-2, -1, 0]]

# Zero-sum contrast of one 2x2 quadrant against the remaining five cells.
_CORNER_TL = [[5, 5, -4], [5, 5, -4], [-4, -4, -4]]
_CORNER_TR = [[-4, 5, 5], [-4, 5, 5], [-4, -4, -4]]
_CORNER_BL = [[-4, -4, -4], [5, 5, -4], [5, 5, -4]]
_CORNER_BR = [[-4, -4, -4], [-4, 5, 5], [-4, 5, 5]]


@dataclass(frozen=True)
class FilterBank:
    """Twelve 3x3 kernels plus per-filter current gains."""

    kernels: np.ndarray  # (12, 3, 3) dimensionless
    gains: np.ndarray  # (12,) amperes per unit kernel value

    def __post_init__(self):
        kernels = np.asarray(self.kernels, dtype=np.float64)
        gains = np.asarray(self.gains, dtype=np.float64)
        if kernels.shape != (N_FILTERS, 3, 3):
            raise ValueError(f"expected {(N_FILTERS, 3, 3)} kernels, got {kernels.shape}")
        if gains.shape != (N_FILTERS,):
            raise ValueError(f"expected {N_FILTERS} gains, got {gains.shape}")
        if not (np.all(np.isfinite(kernels)) and np.all(np.isfinite(gains))):
            raise ValueError("filter bank contains non-finite values")
        kernels = kernels.copy()
        gains = gains.copy()
        kernels.setflags(write=False)
        gains.setflags(write=False)
        object.__setattr__(self, "kernels", kernels)
        object.__setattr__(self, "gains", gains)

    @property
    def weighted(self) -> np.ndarray:
        """Kernels scaled by their gains: (12, 3, 3) in amperes."""
        return self.kernels * self.gains[:, None, None]


def default_filter_bank(drive: float = DEFAULT_FILTER_DRIVE) -> FilterBank:
    """The edge/corner bank with gains normalized per filter.

    Each gain is ``drive`` divided by the filter's positive-weight sum, so
    a patch that lights exactly the positive cells at unit kernel trace
    produces the same peak current for every filter.
    """
    kernels = np.array(
        [
            _SOBEL_H,
            _SOBEL_V,
            _SOBEL_D,
            _SOBEL_AD,
            np.negative(_SOBEL_H),
            np.negative(_SOBEL_V),
            np.negative(_SOBEL_D),
            np.negative(_SOBEL_AD),
            _CORNER_TL,
            _CORNER_TR,
            _CORNER_BL,
            _CORNER_BR,
        ],
        dtype=np.float64,
    )
    positive_sums = np.clip(kernels, 0.0, None).sum(axis=(1, 2))
    return FilterBank(kernels=kernels, gains=drive / positive_sums)
