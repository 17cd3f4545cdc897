"""Batch evaluation: spike counts, accuracy, confusion, and timing.

Inference presentations are independent, so evaluation can fan out across
processes; weights are shared read-only and results are concatenated in
input order, keeping reports deterministic for any worker count.
"""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .filters import FilterBank
from .network import N_OUTPUTS, NetworkConfig, classify, run_presentation
from .validation import as_pixel_batch


def _counts_chunk(args) -> np.ndarray:
    images, weights, filters, cfg = args
    return np.stack(
        [run_presentation(img, weights, filters, cfg) for img in images]
    )


def batch_counts(
    images, weights, filters: FilterBank, cfg: NetworkConfig, workers: int = 1
) -> np.ndarray:
    """Output spike counts per image: (n, 10) int64."""
    images = as_pixel_batch(images)
    if len(images) == 0:
        return np.zeros((0, N_OUTPUTS), dtype=np.int64)
    if workers <= 1 or len(images) < 2 * workers:
        return _counts_chunk((images, weights, filters, cfg))
    chunks = np.array_split(images, workers)
    jobs = [(chunk, weights, filters, cfg) for chunk in chunks if len(chunk)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_counts_chunk, jobs))
    return np.concatenate(parts)


@dataclass
class EvalReport:
    n_images: int
    n_correct: int
    confusion: np.ndarray  # (true, predicted) counts, 10x10
    mean_image_ms: float
    no_spike_count: int  # images whose outputs stayed silent
    t_ms: float = 0.0
    dt_ms: float = 0.0

    @property
    def accuracy(self) -> float:
        return self.n_correct / self.n_images if self.n_images else 0.0

    def to_dict(self) -> dict:
        return {
            "t_ms": self.t_ms,
            "dt_ms": self.dt_ms,
            "n_images": self.n_images,
            "accuracy": self.accuracy,
            "confusion": self.confusion.tolist(),
            "mean_image_ms": self.mean_image_ms,
            "no_spike": self.no_spike_count,
        }


def evaluate_dataset(
    images,
    labels,
    weights,
    filters: FilterBank,
    cfg: NetworkConfig,
    workers: int = 1,
) -> EvalReport:
    images = as_pixel_batch(images)
    labels = np.asarray(labels)
    start = time.perf_counter()
    counts = batch_counts(images, weights, filters, cfg, workers=workers)
    elapsed_ms = (time.perf_counter() - start) * 1e3
    predicted = np.array([classify(c) for c in counts])
    confusion = np.zeros((N_OUTPUTS, N_OUTPUTS), dtype=np.int64)
    for t, p in zip(labels, predicted):
        confusion[int(t), int(p)] += 1
    return EvalReport(
        n_images=len(images),
        n_correct=int((predicted == labels).sum()),
        confusion=confusion,
        mean_image_ms=elapsed_ms / len(images) if len(images) else 0.0,
        no_spike_count=int((counts.sum(axis=1) == 0).sum()),
        t_ms=cfg.t * 1e3,
        dt_ms=cfg.dt * 1e3,
    )
