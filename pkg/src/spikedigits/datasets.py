"""MNIST IDX ingestion and checkpoint persistence, both bit-exact.

IDX files are the original MNIST container: a big-endian magic word
(0x00000803 for images, 0x00000801 for labels), big-endian 32-bit counts
and dimensions, then raw unsigned bytes.  Gzipped files are handled
transparently by extension.

Checkpoints use a fixed little-endian binary layout::

    bytes 0-3    magic "SNNW"
    bytes 4-7    u32 version (currently 1)
    bytes 8-15   u32 rows, u32 cols
    ...          rows*cols float64 weights, row-major
    ...          u32 config length, then that many UTF-8 bytes of
                 config text (see config.config_to_text)

Weights are stored as float64 regardless of engine precision; the embedded
config snapshot makes a checkpoint self-sufficient for inference.
"""
from __future__ import annotations

import gzip
import os
import struct

import numpy as np

from .config import config_from_text, config_to_text
from .filters import FilterBank
from .network import N_HIDDEN, N_OUTPUTS, NetworkConfig

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801

CHECKPOINT_MAGIC = b"SNNW"
CHECKPOINT_VERSION = 1

TRAIN_IMAGES = "train-images-idx3-ubyte"
TRAIN_LABELS = "train-labels-idx1-ubyte"
TEST_IMAGES = "t10k-images-idx3-ubyte"
TEST_LABELS = "t10k-labels-idx1-ubyte"


class IdxFormatError(ValueError):
    """An IDX file failed validation; the message names the byte offset."""


class CheckpointFormatError(ValueError):
    """A checkpoint file failed validation."""


def _open_maybe_gzip(path, mode: str):
    if str(path).endswith(".gz"):
        return gzip.open(path, mode)
    return open(path, mode)


def _read_exact(f, n: int, offset: int, what: str) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise IdxFormatError(
            f"truncated {what}: wanted {n} bytes at offset {offset}, got {len(data)}"
        )
    return data


def read_idx_images(path) -> np.ndarray:
    """Parse an IDX image file into a (n, 28, 28) uint8 array."""
    with _open_maybe_gzip(path, "rb") as f:
        header = _read_exact(f, 16, 0, "header")
        magic, count, rows, cols = struct.unpack(">IIII", header)
        if magic == IDX_LABEL_MAGIC:
            raise IdxFormatError("label file passed where images expected (magic at offset 0)")
        if magic != IDX_IMAGE_MAGIC:
            raise IdxFormatError(f"bad image magic 0x{magic:08x} at offset 0")
        if rows != 28 or cols != 28:
            raise IdxFormatError(f"expected 28x28 images, header says {rows}x{cols} (offset 8)")
        payload = _read_exact(f, count * rows * cols, 16, "pixel payload")
    return np.frombuffer(payload, dtype=np.uint8).reshape(count, rows, cols)


def read_idx_labels(path) -> np.ndarray:
    """Parse an IDX label file into a (n,) uint8 array of digits."""
    with _open_maybe_gzip(path, "rb") as f:
        header = _read_exact(f, 8, 0, "header")
        magic, count = struct.unpack(">II", header)
        if magic == IDX_IMAGE_MAGIC:
            raise IdxFormatError("image file passed where labels expected (magic at offset 0)")
        if magic != IDX_LABEL_MAGIC:
            raise IdxFormatError(f"bad label magic 0x{magic:08x} at offset 0")
        payload = _read_exact(f, count, 8, "label payload")
    labels = np.frombuffer(payload, dtype=np.uint8)
    bad = np.flatnonzero(labels > 9)
    if bad.size:
        i = int(bad[0])
        raise IdxFormatError(
            f"label byte 0x{labels[i]:02x} out of range 0..9 at index {i} (offset {8 + i})"
        )
    return labels


def write_idx_images(path, images) -> None:
    """Write images back out in IDX layout (fixtures and synthetic corpora)."""
    images = np.ascontiguousarray(np.asarray(images, dtype=np.uint8))
    if images.ndim != 3 or images.shape[1:] != (28, 28):
        raise ValueError(f"expected (n, 28, 28) images, got {images.shape}")
    with _open_maybe_gzip(path, "wb") as f:
        f.write(struct.pack(">IIII", IDX_IMAGE_MAGIC, images.shape[0], 28, 28))
        f.write(images.tobytes())


def write_idx_labels(path, labels) -> None:
    labels = np.asarray(labels, dtype=np.uint8)
    if labels.ndim != 1 or np.any(labels > 9):
        raise ValueError("labels must be a flat array of digits 0..9")
    with _open_maybe_gzip(path, "wb") as f:
        f.write(struct.pack(">II", IDX_LABEL_MAGIC, labels.shape[0]))
        f.write(labels.tobytes())


def _find_idx(dirpath, stem: str) -> str:
    for name in (stem, stem + ".gz"):
        candidate = os.path.join(dirpath, name)
        if os.path.exists(candidate):
            return candidate
    raise FileNotFoundError(f"no {stem}[.gz] under {dirpath}")


def load_mnist_split(dirpath, split: str = "train") -> tuple[np.ndarray, np.ndarray]:
    """Load (images, labels) for 'train' or 'test' from an MNIST directory."""
    if split == "train":
        image_stem, label_stem = TRAIN_IMAGES, TRAIN_LABELS
    elif split == "test":
        image_stem, label_stem = TEST_IMAGES, TEST_LABELS
    else:
        raise ValueError(f"split must be 'train' or 'test', got {split!r}")
    images = read_idx_images(_find_idx(dirpath, image_stem))
    labels = read_idx_labels(_find_idx(dirpath, label_stem))
    if len(images) != len(labels):
        raise IdxFormatError(
            f"image/label count mismatch: {len(images)} images vs {len(labels)} labels"
        )
    return images, labels


def save_checkpoint(path, weights: np.ndarray, cfg: NetworkConfig, filters: FilterBank) -> None:
    """Persist weights plus a config snapshot; round-trips bit-exactly."""
    weights = np.ascontiguousarray(np.asarray(weights, dtype="<f8"))
    if weights.ndim != 2:
        raise ValueError(f"weights must be 2-D, got shape {weights.shape}")
    config_bytes = config_to_text(cfg, filters).encode("utf-8")
    with open(path, "wb") as f:
        f.write(CHECKPOINT_MAGIC)
        f.write(struct.pack("<I", CHECKPOINT_VERSION))
        f.write(struct.pack("<II", weights.shape[0], weights.shape[1]))
        f.write(weights.tobytes())
        f.write(struct.pack("<I", len(config_bytes)))
        f.write(config_bytes)


def load_checkpoint(
    path, expected_shape: tuple | None = (N_HIDDEN, N_OUTPUTS)
) -> tuple[np.ndarray, NetworkConfig, FilterBank]:
    """Load (weights, config, filters); validates magic, version, and dims.

    ``expected_shape=None`` accepts any dimensions (used by tools and
    round-trip tests); the network loader keeps the 8112x10 default.
    """

    def need(f, n: int, what: str) -> bytes:
        data = f.read(n)
        if len(data) != n:
            raise CheckpointFormatError(f"truncated checkpoint: short {what}")
        return data

    with open(path, "rb") as f:
        if need(f, 4, "magic") != CHECKPOINT_MAGIC:
            raise CheckpointFormatError("bad checkpoint magic (not an SNNW file)")
        (version,) = struct.unpack("<I", need(f, 4, "version"))
        if version != CHECKPOINT_VERSION:
            raise CheckpointFormatError(
                f"unsupported checkpoint version {version}, expected {CHECKPOINT_VERSION}"
            )
        rows, cols = struct.unpack("<II", need(f, 8, "dimensions"))
        if expected_shape is not None and (rows, cols) != tuple(expected_shape):
            raise CheckpointFormatError(
                f"checkpoint holds {rows}x{cols} weights, expected "
                f"{expected_shape[0]}x{expected_shape[1]}"
            )
        payload = need(f, rows * cols * 8, "weight payload")
        weights = np.frombuffer(payload, dtype="<f8").reshape(rows, cols).copy()
        (config_len,) = struct.unpack("<I", need(f, 4, "config length"))
        config_text = need(f, config_len, "config block").decode("utf-8")
    from .config import ConfigFormatError

    try:
        cfg, filters = config_from_text(config_text)
    except ConfigFormatError as exc:
        raise CheckpointFormatError(f"embedded config invalid: {exc}") from exc
    return weights, cfg, filters
