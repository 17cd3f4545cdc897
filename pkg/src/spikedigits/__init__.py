"""Spiking-network handwritten digit classification.

A three-layer leaky integrate-and-fire network: pixel-to-current spike
encoding, twelve fixed 3x3 feature maps, and a learned 8112x10 output
layer trained online with a normalized approximate-descent rule.  Ships
with MNIST IDX ingestion, a canvas preprocessing pipeline, a CLI, an HTTP
inference service, and a scikit-learn estimator wrapper.
"""

from .estimator import SpikingDigitClassifier
from .filters import FilterBank, default_filter_bank
from .network import (
    NetworkConfig,
    SpikeRecord,
    classify,
    forward_pass,
    parameter_count,
    zero_weights,
)
from .neurons import LifParams, LifState, SynKernelState, kernel_step, lif_step, min_spiking_current
from .normad import LearnConfig, TraceState, train_epoch

__all__ = [
    "SpikingDigitClassifier",
    "FilterBank",
    "default_filter_bank",
    "NetworkConfig",
    "SpikeRecord",
    "classify",
    "forward_pass",
    "parameter_count",
    "zero_weights",
    "LifParams",
    "LifState",
    "SynKernelState",
    "kernel_step",
    "lif_step",
    "min_spiking_current",
    "LearnConfig",
    "TraceState",
    "train_epoch",
]

__version__ = "0.1.0"
