"""Normalized approximate-descent learning for the output synapses.

Per step, the low-pass-filtered hidden kernel trace d_hat says how much
each synapse would move the output membrane; whenever observed and desired
output spikes disagree, the unit-normalized d_hat direction (times the
error sign and dt) is added to the pending weight delta.  The accumulated
delta is applied once per presentation.  Only the 8112x10 feed-forward
weights learn; the lateral inhibitory weights stay fixed.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .filters import FilterBank
from .network import (
    N_HIDDEN,
    N_OUTPUTS,
    NetworkConfig,
    classify,
    desired_spike_train,
    run_presentation,
)
from .validation import as_pixel_batch, as_pixel_image

# Time constant of the neuron impulse response h(t) = (1/C) exp(-t/tau).
TAU_LEARN = 1e-3

# Pinned by tools/calibrate.py: the two-class probe converges monotonically
# over several decades of rate (the normalization bounds every update), so
# the default is the cleanest converger on the ten-class probe.  Roughly
# dt-invariant: each error step contributes a unit-norm direction times dt.
DEFAULT_LEARNING_RATE = 2e-7


class NumericFailureError(RuntimeError):
    """Training produced non-finite weights."""


@dataclass
class LearnConfig:
    learning_rate: float = DEFAULT_LEARNING_RATE
    norm_epsilon: float = 1e-12

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.norm_epsilon < 0:
            raise ValueError("norm_epsilon must be non-negative")


@dataclass
class TraceState:
    """Mutable per-presentation learning state.

    ``d_hat`` is the filtered kernel trace per hidden neuron; ``delta_w``
    the pending weight update.  Both start at zero and are reset when the
    update is applied.
    """

    d_hat: np.ndarray
    delta_w: np.ndarray


def trace_state(n_hidden: int = N_HIDDEN, n_outputs: int = N_OUTPUTS) -> TraceState:
    return TraceState(
        d_hat=np.zeros(n_hidden, dtype=np.float64),
        delta_w=np.zeros((n_hidden, n_outputs), dtype=np.float64),
    )


def dhat_step(
    trace: TraceState, c, dt: float, capacitance: float, tau: float = TAU_LEARN
) -> TraceState:
    """Advance d_hat by one step: decay by exp(-dt/tau), add c * dt / C.

    Mutates and returns ``trace``.
    """
    trace.d_hat *= math.exp(-dt / tau)
    trace.d_hat += np.asarray(c, dtype=np.float64) * (dt / capacitance)
    return trace


def error_signal(desired, observed):
    """Spike-stream error: +1 desired-only, -1 observed-only, 0 agreement."""
    d = np.asarray(desired)
    o = np.asarray(observed)
    return d.astype(np.int8) - o.astype(np.int8)


def accumulate_update(
    trace: TraceState, errors, dt: float, eps: float = 1e-12
) -> TraceState:
    """Fold one step's spike errors into the pending weight delta.

    Only steps with some nonzero error contribute, and only when the
    d_hat norm clears ``eps`` (the normalized direction is undefined at
    zero).  Each contribution is the unit-normalized d_hat, scaled by the
    per-output error sign and dt.  Mutates and returns ``trace``.
    """
    errors = np.atleast_1d(np.asarray(errors))
    nonzero = np.flatnonzero(errors)
    if nonzero.size == 0:
        return trace
    norm = float(np.linalg.norm(trace.d_hat))
    if norm <= eps:
        return trace
    # Errors touch only a few outputs per step; update those columns only.
    for l in nonzero:
        trace.delta_w[:, l] += trace.d_hat * (float(errors[l]) * dt / norm)
    return trace


def apply_update(weights: np.ndarray, trace: TraceState, r: float) -> np.ndarray:
    """End-of-presentation weight update: w + r * delta_w, trace reset.

    Raises NumericFailureError if the result is not finite.
    """
    new_weights = weights + r * trace.delta_w
    if not np.all(np.isfinite(new_weights)):
        raise NumericFailureError("weight update produced non-finite values")
    trace.d_hat[:] = 0.0
    trace.delta_w[:] = 0.0
    return new_weights


def desired_mask(label: int, cfg: NetworkConfig) -> np.ndarray:
    """(n_steps, 10) boolean target: the label neuron fires the desired
    train, every other neuron stays silent."""
    mask = np.zeros((cfg.n_steps, N_OUTPUTS), dtype=bool)
    steps = desired_spike_train(
        cfg.t, cfg.dt, cfg.desired_rate, cfg.output_lif.refractory
    )
    mask[steps, int(label)] = True
    return mask


def train_presentation(
    image,
    label: int,
    weights: np.ndarray,
    filters: FilterBank,
    cfg: NetworkConfig,
    learn: LearnConfig,
) -> tuple[np.ndarray, np.ndarray]:
    """One supervised presentation; returns (updated weights, spike counts)."""
    targets = desired_mask(label, cfg)
    trace = trace_state()
    dt = cfg.dt
    capacitance = cfg.output_lif.capacitance
    eps = learn.norm_epsilon

    def hook(step: int, c_hidden: np.ndarray, out_spiked: np.ndarray) -> None:
        dhat_step(trace, c_hidden, dt, capacitance)
        errors = error_signal(targets[step], out_spiked)
        accumulate_update(trace, errors, dt, eps)

    counts = run_presentation(image, weights, filters, cfg, on_step=hook)
    return apply_update(weights, trace, learn.learning_rate), counts


@dataclass
class EpochStats:
    """Online classification tally over one training epoch."""

    n_images: int = 0
    n_errors: int = 0
    wall_seconds: float = 0.0
    error_counts: list = field(default_factory=lambda: [0] * N_OUTPUTS)

    @property
    def error_rate(self) -> float:
        return self.n_errors / self.n_images if self.n_images else 0.0


def train_epoch(
    images,
    labels,
    weights: np.ndarray,
    filters: FilterBank,
    cfg: NetworkConfig,
    learn: LearnConfig,
) -> tuple[np.ndarray, EpochStats]:
    """One sequential online pass over (images, labels) in the given order.

    Returns the updated weights and per-epoch classification stats; the
    caller owns shuffling and the zero initialization of the first epoch.
    """
    images = as_pixel_batch(images)
    labels = np.asarray(labels)
    if len(labels) != len(images):
        raise ValueError("images and labels length mismatch")
    if len(labels) and (labels.min() < 0 or labels.max() >= N_OUTPUTS):
        raise ValueError("labels must be digits 0..9")
    stats = EpochStats()
    start = time.perf_counter()
    for img, label in zip(images, labels):
        weights, counts = train_presentation(img, int(label), weights, filters, cfg, learn)
        stats.n_images += 1
        if classify(counts) != int(label):
            stats.n_errors += 1
            stats.error_counts[int(label)] += 1
    stats.wall_seconds = time.perf_counter() - start
    return weights, stats
