"""Scikit-learn estimator wrapping the spiking digit network.

`SpikingDigitClassifier` exposes the usual fit/predict surface so the
network slots into sklearn pipelines, grid search, and cross-validation.
Images are pixel-level arrays (n, 784) or (n, 28, 28) with values 0..255;
labels are digits.  Training is online and order-sensitive, so runs are
made reproducible by shuffling with a per-epoch seeded permutation.
"""
from __future__ import annotations

import dataclasses

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .evaluate import batch_counts
from .filters import DEFAULT_FILTER_DRIVE, default_filter_bank
from .network import N_OUTPUTS, NetworkConfig, classify, zero_weights
from .normad import DEFAULT_LEARNING_RATE, LearnConfig, train_epoch
from .validation import as_pixel_batch


def epoch_permutation(seed: int, epoch: int, n: int) -> np.ndarray:
    """The fixed shuffling every trainer uses: one permutation per epoch."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, epoch]))
    return rng.permutation(n)


class SpikingDigitClassifier(ClassifierMixin, BaseEstimator):
    """Three-layer LIF spiking network classifier for 28x28 digit images.

    Parameters
    ----------
    epochs : number of online passes over the training set.
    learning_rate : scale of the per-presentation weight update.
    t_ms, dt_ms : presentation duration and integration step, milliseconds.
    desired_rate_hz : target firing rate of the labeled output neuron.
    inhibition_weight : lateral weight among output neurons (amperes per
        unit kernel trace, <= 0); None picks the calibrated default.
    filter_drive : peak current of a filter's best-matching patch, amperes.
    norm_epsilon : trace-norm floor below which updates are skipped.
    shuffle : reshuffle the training order each epoch (seeded).
    random_state : seed for the epoch permutations.
    verbose : print one line of stats per epoch when nonzero.

    Attributes (after fit)
    ----------------------
    weights_ : (8112, 10) learned synapse matrix.
    config_, filters_ : the network configuration and filter bank used.
    history_ : list of per-epoch EpochStats.
    classes_ : the ten digits.
    """

    def __init__(
        self,
        epochs: int = 5,
        learning_rate: float = DEFAULT_LEARNING_RATE,
        t_ms: float = 100.0,
        dt_ms: float = 1.0,
        desired_rate_hz: float = 285.0,
        inhibition_weight: float | None = None,
        filter_drive: float = DEFAULT_FILTER_DRIVE,
        norm_epsilon: float = 1e-12,
        shuffle: bool = True,
        random_state: int = 0,
        verbose: int = 0,
    ):
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.t_ms = t_ms
        self.dt_ms = dt_ms
        self.desired_rate_hz = desired_rate_hz
        self.inhibition_weight = inhibition_weight
        self.filter_drive = filter_drive
        self.norm_epsilon = norm_epsilon
        self.shuffle = shuffle
        self.random_state = random_state
        self.verbose = verbose

    def _network(self):
        cfg = NetworkConfig(
            t=self.t_ms * 1e-3,
            dt=self.dt_ms * 1e-3,
            desired_rate=self.desired_rate_hz,
            inhibition_weight=self.inhibition_weight,
        )
        return cfg, default_filter_bank(self.filter_drive)

    def fit(self, X, y):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        images = as_pixel_batch(X)
        labels = np.asarray(y)
        if labels.shape != (len(images),):
            raise ValueError("y must be one digit per image")
        cfg, filters = self._network()
        learn = LearnConfig(
            learning_rate=self.learning_rate, norm_epsilon=self.norm_epsilon
        )
        weights = zero_weights()
        history = []
        for epoch in range(self.epochs):
            if self.shuffle:
                order = epoch_permutation(self.random_state, epoch, len(images))
            else:
                order = np.arange(len(images))
            weights, stats = train_epoch(
                images[order], labels[order], weights, filters, cfg, learn
            )
            history.append(stats)
            if self.verbose:
                print(
                    f"epoch {epoch}: train_error {100 * stats.error_rate:.2f}% "
                    f"({stats.n_errors}/{stats.n_images}) {stats.wall_seconds:.1f}s"
                )
        self.weights_ = weights
        self.config_ = cfg
        self.filters_ = filters
        self.history_ = history
        self.classes_ = np.arange(N_OUTPUTS)
        self.n_features_in_ = images[0].size
        return self

    def predict_counts(self, X, workers: int = 1) -> np.ndarray:
        """Output spike counts per image, (n, 10)."""
        check_is_fitted(self, "weights_")
        return batch_counts(
            X, self.weights_, self.filters_, self.config_, workers=workers
        )

    def predict(self, X) -> np.ndarray:
        counts = self.predict_counts(X)
        return np.array([classify(c) for c in counts])

    def with_timing(self, t_ms: float, dt_ms: float) -> NetworkConfig:
        """The fitted config rebased to different presentation timing."""
        check_is_fitted(self, "config_")
        return dataclasses.replace(self.config_, t=t_ms * 1e-3, dt=dt_ms * 1e-3)
