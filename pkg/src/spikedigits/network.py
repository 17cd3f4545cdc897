"""Three-layer spiking network for 28x28 digit images.

Layer one turns pixel levels into spike trains (one LIF neuron per pixel,
driven by a constant encoded current).  Twelve fixed 3x3 filters convolve
the input spike kernels into currents for 12 * 26 * 26 = 8112 hidden
neurons.  Ten output neurons integrate the hidden kernels through a
learned 8112x10 weight matrix and inhibit each other laterally; the
output neuron with the most spikes names the digit.

The per-presentation simulation is deterministic: identical image, weights
and config produce bit-identical spike records.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .filters import FilterBank
from .neurons import (
    TAU_SYN_FAST,
    TAU_SYN_SLOW,
    LifParams,
    kernel_state,
    kernel_step,
    lif_state,
    lif_step,
    min_spiking_current,
)
from .validation import as_pixel_image, check_weights

IMAGE_SIDE = 28
FEATURE_SIDE = 26
N_FEATURE_MAPS = 12
N_INPUTS = IMAGE_SIDE * IMAGE_SIDE
N_HIDDEN = N_FEATURE_MAPS * FEATURE_SIDE * FEATURE_SIDE
N_OUTPUTS = 10


def parameter_count() -> int:
    """Number of learned synapses: the hidden-to-output weight matrix."""
    return N_HIDDEN * N_OUTPUTS


def zero_weights() -> np.ndarray:
    """Fresh all-zero weight matrix, the starting point of training."""
    return np.zeros((N_HIDDEN, N_OUTPUTS), dtype=np.float64)


@dataclass(frozen=True)
class EncodingParams:
    """Pixel-to-current encoding i(k) = i_0 + k * i_p.

    ``i_0`` equals the input layer's rheobase so a zero pixel sits exactly
    at the no-spike asymptote.
    """

    i_0: float = 2700e-12
    i_p: float = 101.2e-12

    def __post_init__(self):
        if not self.i_0 > 0:
            raise ValueError("i_0 must be positive")
        if not self.i_p > 0:
            raise ValueError("i_p must be positive")


def encode_pixel_current(k, params: EncodingParams = EncodingParams()):
    """Constant drive current for pixel level(s) ``k`` in 0..255."""
    k = np.asarray(k)
    if np.any((k < 0) | (k > 255)):
        raise ValueError("pixel level out of range 0..255")
    return params.i_0 + k * params.i_p


def single_synapse_rate_weight(
    params: LifParams,
    rate: float,
    tau_slow: float = TAU_SYN_SLOW,
    tau_fast: float = TAU_SYN_FAST,
) -> float:
    """Weight at which a lone synapse carrying a ``rate`` spike train
    sustains postsynaptic firing at that same rate.

    Uses the mean-current approximation: a spike train at ``rate`` through
    the double-exponential kernel carries mean trace rate * (tau_slow -
    tau_fast), and sustained firing at ``rate`` needs the constant current
    that recharges rest-to-threshold in (1/rate - t_ref).
    """
    if rate <= 0:
        raise ValueError("rate must be positive")
    charge_time = 1.0 / rate - params.refractory
    if charge_time <= 0:
        raise ValueError("rate is infeasible under the refractory period")
    i_needed = min_spiking_current(params) / -math.expm1(-charge_time / params.tau_m)
    mean_trace = rate * (tau_slow - tau_fast)
    return i_needed / mean_trace


@dataclass(frozen=True)
class NetworkConfig:
    """Presentation timing, encoding, and per-layer neuron constants.

    ``inhibition_weight`` (amperes per unit kernel trace, negative) scales
    the lateral connections among output neurons; the default is minus the
    weight a single desired-rate excitatory synapse would need, so one
    winner firing at the target rate can hold the others down.
    """

    t: float = 0.100
    dt: float = 1e-3
    desired_rate: float = 285.0
    inhibition_weight: Optional[float] = None
    encoding: EncodingParams = EncodingParams()
    input_lif: LifParams = LifParams()
    hidden_lif: LifParams = LifParams()
    output_lif: LifParams = LifParams()

    def __post_init__(self):
        if not (self.t > 0 and self.dt > 0):
            raise ValueError("t and dt must be positive")
        steps = self.t / self.dt
        if abs(steps - round(steps)) > 1e-6 * max(1.0, steps):
            raise ValueError(f"t/dt = {steps} is not an integer number of steps")
        if self.desired_rate < 0:
            raise ValueError("desired_rate must be non-negative")
        if self.desired_rate * self.output_lif.refractory >= 1.0:
            raise ValueError("desired_rate is infeasible under the output refractory period")
        if not math.isclose(
            self.encoding.i_0, min_spiking_current(self.input_lif), rel_tol=1e-9
        ):
            raise ValueError("encoding i_0 must equal the input layer rheobase")
        if self.inhibition_weight is None:
            # calibrated to the desired rate; no rate, nothing to suppress
            default = (
                -single_synapse_rate_weight(self.output_lif, self.desired_rate)
                if self.desired_rate > 0
                else 0.0
            )
            object.__setattr__(self, "inhibition_weight", default)
        elif self.inhibition_weight > 0:
            raise ValueError("inhibition_weight must be non-positive")

    @property
    def n_steps(self) -> int:
        return int(round(self.t / self.dt))


@dataclass
class SpikeRecord:
    """Spike rasters of one presentation, as per-neuron step-index lists."""

    input_spikes: list  # 784 lists, row-major over pixels
    hidden_spikes: list  # 8112 lists, (row * 26 + col) * 12 + feature
    output_spikes: list  # 10 lists
    output_counts: np.ndarray  # (10,) int64

    def __post_init__(self):
        counts = np.asarray(self.output_counts, dtype=np.int64)
        if counts.shape != (N_OUTPUTS,):
            raise ValueError("output_counts must have 10 entries")
        if [len(s) for s in self.output_spikes] != counts.tolist():
            raise ValueError("output counts disagree with spike lists")
        object.__setattr__(self, "output_counts", counts)


def desired_spike_train(
    t: float, dt: float, rate: float, refractory: float = 3e-3
) -> np.ndarray:
    """Evenly spaced target spike step indices for one presentation.

    The period is 1/rate rounded to the nearest whole step; the first
    spike lands one full period in (never at step zero), then the train
    repeats until the presentation ends.  A zero rate yields an empty
    train; a rate the refractory period cannot support is rejected.
    """
    if not (t > 0 and dt > 0):
        raise ValueError("t and dt must be positive")
    if rate < 0:
        raise ValueError("rate must be non-negative")
    if rate == 0:
        return np.empty(0, dtype=np.int64)
    if rate * refractory >= 1.0:
        raise ValueError(
            f"rate {rate} Hz infeasible: period shorter than refractory {refractory}"
        )
    n_steps = int(round(t / dt))
    period = max(1, int(math.floor(1.0 / (rate * dt) + 0.5)))
    return np.arange(period - 1, n_steps, period, dtype=np.int64)


def conv_currents(c_map, kernel, gain: float = 1.0) -> np.ndarray:
    """Valid-region spatial correlation of one filter over a kernel map.

    out(i, j) = gain * sum_{a,b} kernel(a, b) * c(i+a, j+b); a 28x28 map
    yields the 26x26 current grid of one feature map.
    """
    c_map = np.asarray(c_map, dtype=np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    if c_map.ndim != 2 or kernel.ndim != 2:
        raise ValueError("c_map and kernel must be 2-D")
    if not np.all(np.isfinite(c_map)):
        raise ValueError("c_map contains non-finite values")
    windows = sliding_window_view(c_map, kernel.shape)
    return gain * np.einsum("ijab,ab->ij", windows, kernel)


def _conv_bank_series(c_series: np.ndarray, filters: FilterBank) -> np.ndarray:
    """Apply the whole bank to every step at once: (n, 28, 28) -> (n, 8112).

    Hidden neurons are laid out row-major over the 26x26 grid with the
    twelve features innermost: index = (row * 26 + col) * 12 + feature.
    This matches the tensordot output layout, so the flattening is free.
    """
    windows = sliding_window_view(c_series, (3, 3), axis=(1, 2))
    out = np.tensordot(windows, filters.weighted, axes=([3, 4], [1, 2]))
    return out.reshape(c_series.shape[0], -1)


@lru_cache(maxsize=8)
def _input_tables(encoding: EncodingParams, lif: LifParams, dt: float, n_steps: int):
    """Per-pixel-level input layer responses, simulated once per config.

    Input neurons see constant currents, so their spike trains depend only
    on the pixel level; all 256 levels are simulated together and looked
    up per image afterwards.  Returns (spike_table, c_table), both
    (n_steps, 256) and read-only.
    """
    currents = encode_pixel_current(np.arange(256), encoding)
    state = lif_state(lif, (256,))
    kern = kernel_state((256,))
    spikes = np.zeros((n_steps, 256), dtype=bool)
    c = np.zeros((n_steps, 256), dtype=np.float64)
    for n in range(n_steps):
        state, spiked = lif_step(state, lif, currents, dt, n)
        kern, c_n = kernel_step(kern, dt, spiked)
        spikes[n] = spiked
        c[n] = c_n
    spikes.setflags(write=False)
    c.setflags(write=False)
    return spikes, c


@lru_cache(maxsize=8)
def _input_spike_lists(encoding: EncodingParams, lif: LifParams, dt: float, n_steps: int):
    spikes, _ = _input_tables(encoding, lif, dt, n_steps)
    return tuple(np.flatnonzero(spikes[:, k]).tolist() for k in range(256))


def input_kernel_series(image, cfg: NetworkConfig) -> np.ndarray:
    """Kernel traces of the 784 input neurons for every step: (n_steps, 784)."""
    levels = as_pixel_image(image)
    _, c_table = _input_tables(cfg.encoding, cfg.input_lif, cfg.dt, cfg.n_steps)
    return c_table[:, levels.ravel()]


def hidden_current_series(image, filters: FilterBank, cfg: NetworkConfig) -> np.ndarray:
    """Feature-map currents for every step and hidden neuron: (n_steps, 8112)."""
    c_in = input_kernel_series(image, cfg)
    return _conv_bank_series(c_in.reshape(-1, IMAGE_SIDE, IMAGE_SIDE), filters)


def run_presentation(
    image,
    weights: np.ndarray,
    filters: FilterBank,
    cfg: NetworkConfig,
    on_step: Optional[Callable[[int, np.ndarray, np.ndarray], None]] = None,
    _record_into: Optional[dict] = None,
) -> np.ndarray:
    """Simulate one image for T/dt steps and return the output spike counts.

    ``on_step(step, c_hidden, output_spiked)`` is invoked once per step
    after the output layer has fired; the learning rule hangs off this
    hook.  All per-presentation state is local, so presentations of
    different images may run in parallel against shared read-only weights.
    """
    weights = check_weights(weights)
    i_hidden = hidden_current_series(image, filters, cfg)
    if not np.all(np.isfinite(i_hidden)):
        raise ValueError("hidden currents contain non-finite values")

    dt = cfg.dt
    n_steps = cfg.n_steps
    inh = cfg.inhibition_weight
    hidden = lif_state(cfg.hidden_lif, (N_HIDDEN,))
    hidden_kern = kernel_state((N_HIDDEN,))
    out = lif_state(cfg.output_lif, (N_OUTPUTS,))
    out_kern = kernel_state((N_OUTPUTS,))
    out_prev = np.zeros(N_OUTPUTS, dtype=bool)
    counts = np.zeros(N_OUTPUTS, dtype=np.int64)

    record = _record_into is not None
    if record:
        hidden_mask = np.zeros((n_steps, N_HIDDEN), dtype=bool)
        out_lists = [[] for _ in range(N_OUTPUTS)]

    for n in range(n_steps):
        hidden, h_spiked = lif_step(
            hidden, cfg.hidden_lif, i_hidden[n], dt, n, validate=False
        )
        hidden_kern, c_hidden = kernel_step(hidden_kern, dt, h_spiked)

        # Lateral inhibition sees output spikes with a one-step lag, the
        # same latency the kernel gives the feed-forward path.
        out_kern, c_out = kernel_step(out_kern, dt, out_prev)
        i_out = c_hidden @ weights + inh * (c_out.sum() - c_out)
        out, o_spiked = lif_step(out, cfg.output_lif, i_out, dt, n, validate=False)
        out_prev = o_spiked
        counts += o_spiked

        if record:
            hidden_mask[n] = h_spiked
            for l in np.flatnonzero(o_spiked):
                out_lists[l].append(int(n))
        if on_step is not None:
            on_step(n, c_hidden, o_spiked)

    if record:
        _record_into["hidden_mask"] = hidden_mask
        _record_into["output_lists"] = out_lists
    return counts


def forward_pass(
    image, weights: np.ndarray, filters: FilterBank, cfg: NetworkConfig
) -> SpikeRecord:
    """Simulate one presentation and collect the full spike record."""
    levels = as_pixel_image(image)
    scratch: dict = {}
    counts = run_presentation(levels, weights, filters, cfg, _record_into=scratch)
    level_lists = _input_spike_lists(cfg.encoding, cfg.input_lif, cfg.dt, cfg.n_steps)
    input_spikes = [list(level_lists[k]) for k in levels.ravel()]
    hidden_spikes = [
        np.flatnonzero(col).tolist() for col in scratch["hidden_mask"].T
    ]
    return SpikeRecord(
        input_spikes=input_spikes,
        hidden_spikes=hidden_spikes,
        output_spikes=scratch["output_lists"],
        output_counts=counts,
    )


def classify(record) -> int:
    """Digit with the highest output spike count; ties go to the smallest
    digit index, so an all-silent record reads as 0."""
    counts = getattr(record, "output_counts", record)
    counts = np.asarray(counts)
    if counts.shape != (N_OUTPUTS,):
        raise ValueError("expected 10 output counts")
    return int(np.argmax(counts))
