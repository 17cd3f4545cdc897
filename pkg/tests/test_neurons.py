"""Membrane and synaptic-kernel primitives against analytic oracles."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spikedigits.neurons import (
    TAU_SYN_FAST,
    TAU_SYN_SLOW,
    LifParams,
    SynKernelState,
    kernel_state,
    kernel_step,
    lif_state,
    lif_step,
    min_spiking_current,
)

PARAMS = LifParams()
I_RHEO = 2700e-12


def first_spike_time(current, dt, horizon, params=PARAMS):
    """Simulated first spike time (seconds) under constant current."""
    state = lif_state(params)
    for n in range(int(round(horizon / dt))):
        state, spiked = lif_step(state, params, current, dt, n)
        if spiked:
            return (n + 1) * dt
    return None


def spike_steps(current_series, dt, params=PARAMS):
    state = lif_state(params)
    out = []
    for n, i in enumerate(current_series):
        state, spiked = lif_step(state, params, i, dt, n)
        if spiked:
            out.append(n)
    return out


class TestLifStep:
    def test_rest_is_fixed_point(self):
        state = lif_state(PARAMS)
        for n in range(50):
            state, spiked = lif_step(state, PARAMS, 0.0, 1e-4, n)
            assert not spiked
            assert state.v == PARAMS.rest_potential

    def test_first_spike_matches_analytic_time(self):
        # tau_m * ln(I / (I - I0)) = 10 ms * ln 2 for 5400 pA
        t = first_spike_time(5400e-12, 1e-4, 0.05)
        assert t is not None
        assert abs(t - PARAMS.tau_m * math.log(2)) <= 0.2e-3

    def test_rheobase_asymptote_never_spikes(self):
        state = lif_state(PARAMS)
        for n in range(10_000):
            state, spiked = lif_step(state, PARAMS, I_RHEO, 1e-4, n)
            assert not spiked
        assert state.v < PARAMS.threshold

    def test_invalid_inputs_rejected(self):
        state = lif_state(PARAMS)
        with pytest.raises(ValueError):
            lif_step(state, PARAMS, float("nan"), 1e-4, 0)
        with pytest.raises(ValueError):
            lif_step(state, PARAMS, float("inf"), 1e-4, 0)
        with pytest.raises(ValueError):
            lif_step(state, PARAMS, 0.0, 0.0, 0)
        with pytest.raises(ValueError):
            lif_step(state, PARAMS, 0.0, -1e-4, 0)

    def test_reset_lands_exactly_on_rest(self):
        state = lif_state(PARAMS)
        for n in range(2000):
            state, spiked = lif_step(state, PARAMS, 8000e-12, 1e-4, n)
            if spiked:
                assert state.v == PARAMS.rest_potential
                assert state.last_spike == n

    def test_refractory_separates_spikes(self):
        dt = 1e-4
        rng = np.random.default_rng(5)
        series = rng.uniform(0, 4e-8, size=5000)
        steps = spike_steps(series, dt)
        assert len(steps) > 5
        gaps = np.diff(steps) * dt
        assert np.all(gaps > PARAMS.refractory)

    def test_membrane_stays_within_bounds(self):
        # Mixed excitation and inhibition; bounds hold at every boundary.
        dt = 1e-4
        rng = np.random.default_rng(6)
        series = rng.uniform(-3e-8, 3e-8, size=4000)
        state = lif_state(PARAMS)
        for n, i in enumerate(series):
            state, _ = lif_step(state, PARAMS, i, dt, n)
            assert PARAMS.rest_potential <= state.v <= PARAMS.threshold

    def test_refractory_freezes_and_discards_input(self):
        dt = 1e-4
        state = lif_state(PARAMS)
        n = 0
        while True:
            state, spiked = lif_step(state, PARAMS, 2e-8, dt, n)
            n += 1
            if spiked:
                break
        frozen_steps = int(PARAMS.refractory / dt)
        for k in range(frozen_steps):
            state, spiked = lif_step(state, PARAMS, 5e-8, dt, n + k)
            assert not spiked
            assert state.v == PARAMS.rest_potential

    def test_rk2_error_halves_with_dt(self):
        # Frozen instance: 160 target times spread over 3..24 ms; mean
        # first-spike error must at least halve per dt halving.
        rng = np.random.default_rng(3)
        t_targets = rng.uniform(3e-3, 24e-3, 160)
        currents = I_RHEO / (1 - np.exp(-t_targets / PARAMS.tau_m))
        means = []
        for dt in (4e-4, 2e-4, 1e-4):
            errs = [
                abs(first_spike_time(i, dt, 0.2) - t)
                for i, t in zip(currents, t_targets)
            ]
            means.append(np.mean(errs))
        assert means[0] / means[1] >= 2.0
        assert means[1] / means[2] >= 2.0

    def test_vectorized_matches_scalar(self):
        dt = 1e-4
        currents = np.array([0.0, 3e-9, 6e-9, 1e-8])
        vec = lif_state(PARAMS, currents.shape)
        scalars = [lif_state(PARAMS) for _ in currents]
        for n in range(400):
            vec, v_spk = lif_step(vec, PARAMS, currents, dt, n)
            for j, i in enumerate(currents):
                scalars[j], s_spk = lif_step(scalars[j], PARAMS, i, dt, n)
                assert bool(v_spk[j]) == bool(s_spk)
                assert vec.v[j] == scalars[j].v


class TestMinSpikingCurrent:
    def test_default_parameters(self):
        assert min_spiking_current(PARAMS) == pytest.approx(2700e-12, rel=1e-12)

    def test_linear_in_conductance(self):
        doubled = LifParams(leak_conductance=60e-9)
        assert min_spiking_current(doubled) == pytest.approx(5400e-12, rel=1e-12)

    def test_linear_in_gap(self):
        narrow = LifParams(rest_potential=-70e-3, threshold=-25e-3)
        assert min_spiking_current(narrow) == pytest.approx(1350e-12, rel=1e-12)


def kernel_closed_form(t):
    return math.exp(-t / TAU_SYN_SLOW) - math.exp(-t / TAU_SYN_FAST)


def kernel_series(spikes, dt, n_steps):
    state = kernel_state()
    out = np.zeros(n_steps)
    spikes = set(spikes)
    for n in range(n_steps):
        state, c = kernel_step(state, dt, n in spikes)
        out[n] = c
    return out


def kernel_oracle(spikes, dt, n_steps):
    """Direct sum over past impulses of the double exponential."""
    impulses = np.zeros(n_steps)
    impulses[list(spikes)] = 1.0
    lags = np.arange(n_steps) * dt
    response = np.exp(-lags / TAU_SYN_SLOW) - np.exp(-lags / TAU_SYN_FAST)
    return np.convolve(impulses, response)[:n_steps]


class TestKernelStep:
    def test_silence_stays_zero(self):
        out = kernel_series([], 1e-4, 500)
        assert np.all(out == 0.0)

    def test_single_spike_matches_closed_form_peak(self):
        dt = 1e-5
        n_steps = 1000
        out = kernel_series([0], dt, n_steps)
        t_star = (
            math.log(TAU_SYN_SLOW / TAU_SYN_FAST)
            * TAU_SYN_SLOW
            * TAU_SYN_FAST
            / (TAU_SYN_SLOW - TAU_SYN_FAST)
        )
        peak = kernel_closed_form(t_star)
        assert peak == pytest.approx(0.4724, abs=1e-4)
        n_max = int(np.argmax(out))
        assert abs(out[n_max] - peak) < 1e-6
        # spike lands at step 0, so step n holds the kernel at lag n*dt
        assert abs(n_max * dt - t_star) <= dt

    def test_recursion_equals_direct_convolution(self):
        dt = 1e-4
        n_steps = 1000
        rng = np.random.default_rng(12)
        for _ in range(20):
            spikes = np.flatnonzero(rng.random(n_steps) < 0.05)
            got = kernel_series(spikes, dt, n_steps)
            want = kernel_oracle(spikes, dt, n_steps)
            assert np.max(np.abs(got - want)) < 1e-9

    def test_superposition_of_trains(self):
        dt = 1e-4
        n_steps = 800
        rng = np.random.default_rng(13)
        s1 = np.flatnonzero(rng.random(n_steps) < 0.03)
        s2 = np.flatnonzero(rng.random(n_steps) < 0.03)
        both = np.concatenate([s1, s2])  # union with multiplicity via impulse add
        state = kernel_state()
        impulses = np.zeros(n_steps)
        impulses[s1] += 1
        impulses[s2] += 1
        summed = np.zeros(n_steps)
        for n in range(n_steps):
            state, c = kernel_step(state, dt, impulses[n])
            summed[n] = c
        want = kernel_series(s1, dt, n_steps) + kernel_series(s2, dt, n_steps)
        assert np.max(np.abs(summed - want)) < 1e-12

    @given(st.lists(st.integers(min_value=0, max_value=399), max_size=40))
    @settings(max_examples=40, deadline=None)
    def test_slow_component_dominates(self, spike_list):
        # Unit impulses: a >= b >= 0, hence c >= 0, at every step.
        state = kernel_state()
        spikes = set(spike_list)
        for n in range(400):
            state, c = kernel_step(state, 1e-4, n in spikes)
            assert state.a >= state.b >= 0.0
            assert c >= 0.0

    def test_bad_dt_rejected(self):
        with pytest.raises(ValueError):
            kernel_step(kernel_state(), 0.0, True)

    def test_decay_factors_exact(self):
        state = SynKernelState(a=np.float64(1.0), b=np.float64(1.0))
        state, _ = kernel_step(state, 1e-3, False)
        assert state.a == math.exp(-1e-3 / TAU_SYN_SLOW)
        assert state.b == math.exp(-1e-3 / TAU_SYN_FAST)
