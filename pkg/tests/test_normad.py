"""Learning rule: trace recursion, error accumulation, and convergence."""
import dataclasses
import math

import numpy as np
import pytest

from spikedigits.estimator import epoch_permutation
from spikedigits.network import NetworkConfig, desired_spike_train, zero_weights
from spikedigits.neurons import LifParams, kernel_state, kernel_step, lif_state, lif_step
from spikedigits.normad import (
    TAU_LEARN,
    LearnConfig,
    NumericFailureError,
    TraceState,
    accumulate_update,
    apply_update,
    dhat_step,
    error_signal,
    train_epoch,
    train_presentation,
    trace_state,
)

C_OUT = 300e-12


class TestDhatStep:
    def test_zero_input_stays_zero(self):
        trace = trace_state(8, 2)
        for _ in range(100):
            dhat_step(trace, np.zeros(8), 1e-3, C_OUT)
        assert np.all(trace.d_hat == 0.0)

    def test_single_impulse_decays_exponentially(self):
        trace = trace_state(1, 1)
        dt = 1e-3
        dhat_step(trace, np.array([1.0]), dt, C_OUT)
        first = trace.d_hat[0]
        assert first == pytest.approx(dt / C_OUT, rel=1e-12)
        for n in range(1, 20):
            dhat_step(trace, np.array([0.0]), dt, C_OUT)
            want = (dt / C_OUT) * math.exp(-n * dt / TAU_LEARN)
            assert trace.d_hat[0] == pytest.approx(want, rel=1e-9)

    def test_recursion_equals_direct_convolution(self):
        dt = 1e-4
        n_steps = 1000
        rng = np.random.default_rng(3)
        c_seq = rng.uniform(0, 2.0, size=(n_steps, 16))
        trace = trace_state(16, 1)
        got = np.zeros((n_steps, 16))
        for n in range(n_steps):
            dhat_step(trace, c_seq[n], dt, C_OUT)
            got[n] = trace.d_hat
        decay = np.exp(-np.arange(n_steps) * dt / TAU_LEARN)
        want = np.zeros_like(got)
        for k in range(16):
            want[:, k] = np.convolve(c_seq[:, k], decay)[:n_steps] * (dt / C_OUT)
        scale = np.abs(want).max()
        assert np.max(np.abs(got - want)) / scale < 1e-9

    def test_constant_input_geometric_limit(self):
        dt = 1e-3
        trace = trace_state(1, 1)
        for _ in range(200):
            dhat_step(trace, np.array([1.0]), dt, C_OUT)
        want = (dt / C_OUT) / (1.0 - math.exp(-dt / TAU_LEARN))
        assert trace.d_hat[0] == pytest.approx(want, rel=1e-9)


class TestErrorSignal:
    @pytest.mark.parametrize(
        "desired,observed,want",
        [(True, True, 0), (False, False, 0), (True, False, 1), (False, True, -1)],
    )
    def test_truth_table(self, desired, observed, want):
        assert error_signal(desired, observed) == want

    def test_vectorized(self):
        got = error_signal([True, False, True, False], [True, True, False, False])
        assert got.tolist() == [0, -1, 1, 0]


class TestAccumulateUpdate:
    def test_no_error_no_change(self):
        trace = trace_state(4, 3)
        trace.d_hat[:] = [1.0, 2.0, 3.0, 4.0]
        accumulate_update(trace, np.zeros(3, dtype=int), 1e-3)
        assert np.all(trace.delta_w == 0.0)

    def test_one_hot_direction_adds_dt(self):
        trace = trace_state(5, 10)
        trace.d_hat[2] = 7.5
        errors = np.zeros(10, dtype=int)
        errors[4] = 1
        accumulate_update(trace, errors, 1e-3)
        want = np.zeros((5, 10))
        want[2, 4] = 1e-3
        assert np.allclose(trace.delta_w, want, atol=1e-18)

    def test_norm_guard_skips_zero_trace(self):
        trace = trace_state(5, 10)
        errors = np.ones(10, dtype=int)
        accumulate_update(trace, errors, 1e-3)
        assert np.all(trace.delta_w == 0.0)
        assert np.all(np.isfinite(trace.delta_w))

    def test_each_contribution_has_norm_dt(self):
        rng = np.random.default_rng(8)
        dt = 1e-3
        trace = trace_state(64, 10)
        for _ in range(50):
            before = trace.delta_w.copy()
            trace.d_hat[:] = rng.uniform(0, 3, size=64)
            errors = np.zeros(10, dtype=int)
            errors[rng.integers(0, 10)] = rng.choice([-1, 1])
            accumulate_update(trace, errors, dt)
            step_l2 = np.linalg.norm(trace.delta_w - before)
            assert step_l2 == pytest.approx(dt, rel=1e-12)

    def test_matches_brute_force_integral(self):
        rng = np.random.default_rng(9)
        dt = 1e-3
        n_steps = 100
        d_seq = rng.uniform(0, 5, size=(n_steps, 32))
        e_seq = rng.integers(-1, 2, size=(n_steps, 10))
        trace = trace_state(32, 10)
        for n in range(n_steps):
            trace.d_hat[:] = d_seq[n]
            accumulate_update(trace, e_seq[n], dt)

        want = np.zeros((32, 10))
        for n in range(n_steps):
            if not np.any(e_seq[n]):
                continue
            norm = np.linalg.norm(d_seq[n])
            if norm <= 1e-12:
                continue
            want += np.outer(d_seq[n] / norm, e_seq[n]) * dt
        assert np.max(np.abs(trace.delta_w - want)) / np.abs(want).max() < 1e-9

    def test_direction_scale_invariant(self):
        rng = np.random.default_rng(10)
        dt = 1e-3
        c_seq = rng.uniform(0, 2, size=(40, 16))
        e_seq = rng.integers(-1, 2, size=(40, 4))

        def run(gamma):
            trace = trace_state(16, 4)
            for n in range(40):
                dhat_step(trace, gamma * c_seq[n], dt, C_OUT)
                accumulate_update(trace, e_seq[n], dt)
            return trace.delta_w.copy()

        base = run(1.0)
        scaled = run(37.5)
        assert np.max(np.abs(base - scaled)) < 1e-12


class TestApplyUpdate:
    def test_zero_delta_identity(self):
        w = np.full((6, 3), 2.5)
        trace = trace_state(6, 3)
        out = apply_update(w, trace, 0.1)
        assert np.array_equal(out, w)

    def test_zero_rate_identity(self):
        trace = trace_state(6, 3)
        trace.delta_w[:] = 1.0
        w = np.full((6, 3), 2.5)
        out = apply_update(w, trace, 0.0)
        assert np.array_equal(out, w)

    def test_resets_trace(self):
        trace = trace_state(6, 3)
        trace.delta_w[:] = 1.0
        trace.d_hat[:] = 2.0
        apply_update(np.zeros((6, 3)), trace, 0.5)
        assert np.all(trace.delta_w == 0.0)
        assert np.all(trace.d_hat == 0.0)

    def test_non_finite_aborts(self):
        trace = trace_state(2, 2)
        trace.delta_w[:] = np.inf
        with pytest.raises(NumericFailureError):
            apply_update(np.zeros((2, 2)), trace, 1.0)


class TestZeroErrorFixedPoint:
    def test_silent_target_and_silent_network(self, bank):
        # desired_rate 0 plus zero weights: observed == desired == silence,
        # so the accumulated update must be exactly zero.
        cfg = NetworkConfig(desired_rate=0.0)
        w0 = zero_weights()
        w1, counts = train_presentation(
            np.full((28, 28), 40, dtype=np.uint8), 3, w0, bank, cfg, LearnConfig()
        )
        assert counts.tolist() == [0] * 10
        assert np.array_equal(w1, w0)


def _mini_output_run(weights, input_trains, desired_steps, dt=1e-3, n_steps=100):
    """5-synapse, single-output simulation built from the primitives."""
    params = LifParams()
    kern = kernel_state((5,))
    out_state = lif_state(params)
    trace = trace_state(5, 1)
    desired = np.zeros(n_steps, dtype=bool)
    desired[list(desired_steps)] = True
    spikes = 0
    for n in range(n_steps):
        kern, c = kernel_step(kern, dt, input_trains[n])
        out_state, spiked = lif_step(out_state, params, float(c @ weights), dt, n)
        spikes += bool(spiked)
        dhat_step(trace, c, dt, params.capacitance)
        accumulate_update(trace, error_signal(desired[n], spiked), dt)
    return trace, spikes


class TestToyConvergence:
    def test_single_output_spike_count_non_decreasing(self):
        rng = np.random.default_rng(2)
        n_steps = 100
        input_trains = rng.random((n_steps, 5)) < 0.15
        desired_steps = desired_spike_train(0.1, 1e-3, 200.0)
        weights = np.zeros(5)
        counts = []
        for _ in range(5):
            trace, spikes = _mini_output_run(weights, input_trains, desired_steps)
            counts.append(spikes)
            weights = apply_update(weights[:, None], trace, 5e-8)[:, 0]
        assert counts == sorted(counts)
        assert counts[-1] > 0

    def test_two_class_toy_reaches_perfect_accuracy(self, bank, toy_two_class):
        images, labels = toy_two_class
        cfg = NetworkConfig()
        weights = zero_weights()
        learn = LearnConfig()
        stats = None
        for epoch in range(5):
            order = epoch_permutation(0, epoch, len(images))
            weights, stats = train_epoch(
                images[order], labels[order], weights, bank, cfg, learn
            )
        assert stats.n_errors == 0


class TestTrainEpoch:
    def test_empty_dataset_is_identity(self, bank, cfg):
        w0 = zero_weights()
        w1, stats = train_epoch(
            np.zeros((0, 28, 28), dtype=np.uint8), np.zeros(0, dtype=int),
            w0, bank, cfg, LearnConfig(),
        )
        assert np.array_equal(w1, w0)
        assert stats.n_images == 0
        assert stats.error_rate == 0.0

    def test_label_out_of_range_rejected(self, bank, cfg):
        with pytest.raises(ValueError):
            train_epoch(
                np.zeros((1, 28, 28), dtype=np.uint8), np.array([10]),
                zero_weights(), bank, cfg, LearnConfig(),
            )

    def test_mismatched_lengths_rejected(self, bank, cfg):
        with pytest.raises(ValueError):
            train_epoch(
                np.zeros((2, 28, 28), dtype=np.uint8), np.array([1]),
                zero_weights(), bank, cfg, LearnConfig(),
            )
