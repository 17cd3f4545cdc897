"""Leaky integrate-and-fire membrane dynamics and the double-exponential
synaptic kernel recursion.

These are the numerical primitives shared by all three layers of the digit
network.  Every function here is a pure step function over plain numpy
state: no globals, no locks, safe to drive from parallel workers on
disjoint state.  Scalars and arrays of any shape broadcast alike.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# Synaptic kernel time constants: slow decay carries the envelope, fast
# decay is subtracted to shape the rise.
TAU_SYN_SLOW = 5e-3
TAU_SYN_FAST = 1.25e-3


@dataclass(frozen=True)
class LifParams:
    """Constants of one LIF neuron population, SI units.

    Defaults follow the digit network: C = 300 pF, g_L = 30 nS,
    t_ref = 3 ms, and a 90 mV gap between rest and threshold so that the
    rheobase current is exactly 2700 pA.  Absolute potentials are pinned
    at -70 mV rest / +20 mV threshold.
    """

    capacitance: float = 300e-12
    leak_conductance: float = 30e-9
    rest_potential: float = -70e-3
    threshold: float = 20e-3
    refractory: float = 3e-3

    def __post_init__(self):
        if not self.capacitance > 0:
            raise ValueError("capacitance must be positive")
        if not self.leak_conductance > 0:
            raise ValueError("leak_conductance must be positive")
        if not self.threshold > self.rest_potential:
            raise ValueError("threshold must exceed rest_potential")
        if self.refractory < 0:
            raise ValueError("refractory must be non-negative")

    @property
    def tau_m(self) -> float:
        """Membrane time constant C / g_L, seconds."""
        return self.capacitance / self.leak_conductance


def min_spiking_current(params: LifParams) -> float:
    """Rheobase: the smallest constant current that can ever elicit a spike.

    Equals g_L * (V_T - E_L); 2700 pA for the default parameters.
    """
    return params.leak_conductance * (params.threshold - params.rest_potential)


@dataclass
class LifState:
    """Membrane state of a neuron population.

    ``last_spike`` holds the step index of the most recent spike per
    neuron, ``-inf`` while a neuron has never spiked.
    """

    v: np.ndarray
    last_spike: np.ndarray


def lif_state(params: LifParams, shape=()) -> LifState:
    """Fresh population at rest with an empty spike history."""
    return LifState(
        v=np.full(shape, params.rest_potential, dtype=np.float64),
        last_spike=np.full(shape, -np.inf, dtype=np.float64),
    )


def lif_step(
    state: LifState,
    params: LifParams,
    i_in,
    dt: float,
    step: int,
    validate: bool = True,
) -> tuple[LifState, np.ndarray]:
    """Advance membrane potentials by one step of second-order Runge-Kutta.

    ``step`` is the index of the update being performed; a spike fired here
    is recorded with that index.  Neurons inside their refractory window
    (step <= last_spike + t_ref/dt) are frozen at rest and their input is
    discarded.  On a threshold crossing the potential is reset to rest.

    Returns the new state and a boolean spike mask of the same shape.
    ``validate=False`` skips the finiteness check for callers that have
    already validated a whole current series.
    """
    i_in = np.asarray(i_in, dtype=np.float64)
    if validate:
        if not (np.isscalar(dt) and dt > 0 and math.isfinite(dt)):
            raise ValueError(f"dt must be a positive finite scalar, got {dt!r}")
        if not np.all(np.isfinite(i_in)):
            raise ValueError("input current contains non-finite values")

    g = params.leak_conductance
    e_l = params.rest_potential
    c = params.capacitance

    active = step > state.last_spike + params.refractory / dt

    # Two-stage Runge-Kutta with the same current in both stages; for this
    # linear ODE the stages collapse to v + beta * (I - g * (v - E_L)) with
    # beta = dt * (2 - g * dt / C) / (2 * C).
    beta = dt * (2.0 - g * dt / c) / (2.0 * c)
    v_new = state.v + beta * (i_in - g * (state.v - e_l))
    # Inhibitory drive may not pull the membrane below rest.
    v_new = np.maximum(v_new, e_l)

    spiked = active & (v_new >= params.threshold)
    v = np.where(active, np.where(spiked, e_l, v_new), state.v)
    last = np.where(spiked, float(step), state.last_spike)
    return LifState(v=v, last_spike=last), spiked


@dataclass
class SynKernelState:
    """The (a, b) decay pair of the double-exponential synaptic kernel.

    ``a`` carries the slow exponential, ``b`` the fast one; the kernel
    output is c = a - b.
    """

    a: np.ndarray
    b: np.ndarray


def kernel_state(shape=()) -> SynKernelState:
    return SynKernelState(
        a=np.zeros(shape, dtype=np.float64),
        b=np.zeros(shape, dtype=np.float64),
    )


@lru_cache(maxsize=None)
def _decay(dt: float, tau: float) -> float:
    return math.exp(-dt / tau)


def kernel_step(
    state: SynKernelState,
    dt: float,
    spike_in,
    tau_slow: float = TAU_SYN_SLOW,
    tau_fast: float = TAU_SYN_FAST,
) -> tuple[SynKernelState, np.ndarray]:
    """One step of the synaptic kernel recursion.

    Both exponentials decay by their per-dt factor, then incoming spikes
    add a unit impulse to each.  Returns the new state and the kernel
    output c = a - b.
    """
    if not (np.isscalar(dt) and dt > 0 and math.isfinite(dt)):
        raise ValueError(f"dt must be a positive finite scalar, got {dt!r}")
    bump = np.asarray(spike_in, dtype=np.float64)
    a = state.a * _decay(dt, tau_slow) + bump
    b = state.b * _decay(dt, tau_fast) + bump
    return SynKernelState(a=a, b=b), a - b
