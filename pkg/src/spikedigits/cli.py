"""Command-line driver: train, eval, infer, serve.

Exit codes: 0 ok, 2 usage, 3 IO/parse failure, 4 numeric failure,
5 blank drawing (infer only).
"""
from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from .config import ConfigFormatError
from .datasets import (
    CheckpointFormatError,
    IdxFormatError,
    load_checkpoint,
    load_mnist_split,
    save_checkpoint,
)
from .estimator import epoch_permutation
from .evaluate import evaluate_dataset
from .filters import DEFAULT_FILTER_DRIVE, default_filter_bank
from .network import NetworkConfig, classify, parameter_count, run_presentation, zero_weights
from .normad import DEFAULT_LEARNING_RATE, LearnConfig, NumericFailureError, train_epoch
from .preprocess import BlankDrawingError, preprocess_pipeline
from .validation import as_pixel_image

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERIC = 4
EXIT_BLANK = 5

# Permutation slot reserved for subset selection, clear of any epoch index.
_SELECTION_EPOCH = 2**32


def _timing_args(parser, t_default="100", dt_default="1000"):
    parser.add_argument("--t-ms", default=t_default, help="presentation time, ms")
    parser.add_argument("--dt-us", default=dt_default, help="integration step, microseconds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spikedigits",
        description="Spiking-network digit classifier: train, evaluate, infer, serve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train from zero weights on an MNIST-format dataset")
    p_train.add_argument("--mnist-dir", required=True, help="directory with IDX files")
    p_train.add_argument("--epochs", type=int, default=5)
    _timing_args(p_train)
    p_train.add_argument("--rate-hz", type=float, default=285.0, help="desired output rate")
    p_train.add_argument("--lr", type=float, default=DEFAULT_LEARNING_RATE)
    p_train.add_argument("--subset", type=int, default=None, help="total images, class-balanced")
    p_train.add_argument("--classes", default=None, help="comma-separated digits to keep")
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--out", required=True, help="checkpoint path, written every epoch")

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint on the test split")
    p_eval.add_argument("--weights", required=True)
    p_eval.add_argument("--mnist-dir", required=True)
    _timing_args(p_eval, t_default="100", dt_default="1000")
    p_eval.add_argument("--subset", type=int, default=None)
    p_eval.add_argument("--classes", default=None)
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--workers", type=int, default=1)

    p_infer = sub.add_parser("infer", help="classify one image file")
    p_infer.add_argument("--weights", required=True)
    p_infer.add_argument("image", help="PNG/PGM/NPY image, raw 784-byte file, or canvas image")
    _timing_args(p_infer, t_default="75", dt_default="1000")

    p_serve = sub.add_parser("serve", help="run the HTTP inference service")
    p_serve.add_argument("--weights", default=None)
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    _timing_args(p_serve, t_default="75", dt_default="1000")

    return parser


def _parse_timing(args) -> tuple[float, float]:
    try:
        t_ms = float(args.t_ms)
        dt_us = float(args.dt_us)
    except ValueError:
        raise UsageError("--t-ms and --dt-us must be numbers")
    if t_ms <= 0 or dt_us <= 0:
        raise UsageError("--t-ms and --dt-us must be positive")
    return t_ms, dt_us


class UsageError(ValueError):
    pass


def _parse_classes(spec) -> list[int]:
    if spec is None:
        return list(range(10))
    try:
        digits = sorted({int(tok) for tok in spec.split(",") if tok != ""})
    except ValueError:
        raise UsageError(f"bad --classes value {spec!r}")
    if not digits or any(d < 0 or d > 9 for d in digits):
        raise UsageError("--classes must name digits 0..9")
    return digits


def select_subset(images, labels, subset, classes, seed) -> tuple[np.ndarray, np.ndarray]:
    """Class-filtered, class-balanced selection under the seed permutation.

    ``subset`` is the total count; it is split evenly over the kept
    classes (remainder to the lower digits), taking the first matches of
    the seed-permuted order so small subsets stay balanced.
    """
    labels = np.asarray(labels)
    keep = np.isin(labels, classes)
    images, labels = images[keep], labels[keep]
    order = epoch_permutation(seed, _SELECTION_EPOCH, len(images))
    images, labels = images[order], labels[order]
    if subset is None:
        return images, labels
    base, extra = divmod(subset, len(classes))
    picked = []
    for i, digit in enumerate(classes):
        want = base + (1 if i < extra else 0)
        idx = np.flatnonzero(labels == digit)[:want]
        if len(idx) < want:
            raise UsageError(
                f"not enough class-{digit} images: wanted {want}, have {len(idx)}"
            )
        picked.append(idx)
    chosen = np.sort(np.concatenate(picked))
    return images[chosen], labels[chosen]


def cmd_train(args) -> int:
    if args.epochs < 1:
        raise UsageError("--epochs must be >= 1")
    t_ms, dt_us = _parse_timing(args)
    classes = _parse_classes(args.classes)
    images, labels = load_mnist_split(args.mnist_dir, "train")
    images, labels = select_subset(images, labels, args.subset, classes, args.seed)
    if len(images) == 0:
        raise UsageError("training selection is empty")

    cfg = NetworkConfig(t=t_ms * 1e-3, dt=dt_us * 1e-6, desired_rate=args.rate_hz)
    filters = default_filter_bank(DEFAULT_FILTER_DRIVE)
    learn = LearnConfig(learning_rate=args.lr)
    weights = zero_weights()
    stats_path = f"{args.out}.stats.jsonl"

    for epoch in range(args.epochs):
        order = epoch_permutation(args.seed, epoch, len(images))
        weights, stats = train_epoch(
            images[order], labels[order], weights, filters, cfg, learn
        )
        save_checkpoint(args.out, weights, cfg, filters)
        record = {
            "epoch": epoch,
            "train_error_pct": 100.0 * stats.error_rate,
            "n_images": stats.n_images,
            "wall_s": round(stats.wall_seconds, 3),
        }
        line = json.dumps(record, sort_keys=True)
        print(line)
        with open(stats_path, "a", encoding="utf-8") as f:
            f.write(line + "\n")
    return EXIT_OK


def _parse_float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in str(text).split(",") if tok != ""]
    except ValueError:
        raise UsageError(f"bad numeric list {text!r}")


def cmd_eval(args) -> int:
    classes = _parse_classes(args.classes)
    weights, cfg, filters = load_checkpoint(args.weights)
    images, labels = load_mnist_split(args.mnist_dir, "test")
    images, labels = select_subset(images, labels, args.subset, classes, args.seed)

    results = []
    for t_ms in _parse_float_list(args.t_ms):
        for dt_us in _parse_float_list(args.dt_us):
            run_cfg = NetworkConfig(
                t=t_ms * 1e-3,
                dt=dt_us * 1e-6,
                desired_rate=cfg.desired_rate,
                inhibition_weight=cfg.inhibition_weight,
                encoding=cfg.encoding,
                input_lif=cfg.input_lif,
                hidden_lif=cfg.hidden_lif,
                output_lif=cfg.output_lif,
            )
            report = evaluate_dataset(
                images, labels, weights, filters, run_cfg, workers=args.workers
            )
            results.append(report.to_dict())
    print(
        json.dumps(
            {"learned_synapses": parameter_count(), "results": results}, sort_keys=True
        )
    )
    return EXIT_OK


def _load_image_file(path) -> np.ndarray:
    """Grayscale array from PNG/PGM/NPY files or raw 784-byte dumps."""
    if str(path).endswith(".npy"):
        return np.load(path)
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) == 28 * 28:
        return np.frombuffer(blob, dtype=np.uint8).reshape(28, 28)
    import io

    from PIL import Image, UnidentifiedImageError

    try:
        img = Image.open(io.BytesIO(blob)).convert("L")
    except UnidentifiedImageError as exc:
        raise IdxFormatError(f"unrecognized image file {path}") from exc
    return np.asarray(img, dtype=np.uint8)


def cmd_infer(args) -> int:
    t_ms, dt_us = _parse_timing(args)
    weights, cfg, filters = load_checkpoint(args.weights)
    raw = _load_image_file(args.image)

    start = time.perf_counter()
    if raw.shape == (28, 28):
        image = as_pixel_image(raw)  # already network-sized; fed directly
    else:
        image = preprocess_pipeline(raw)
    preprocess_ms = (time.perf_counter() - start) * 1e3

    run_cfg = NetworkConfig(
        t=t_ms * 1e-3,
        dt=dt_us * 1e-6,
        desired_rate=cfg.desired_rate,
        inhibition_weight=cfg.inhibition_weight,
        encoding=cfg.encoding,
        input_lif=cfg.input_lif,
        hidden_lif=cfg.hidden_lif,
        output_lif=cfg.output_lif,
    )
    start = time.perf_counter()
    counts = run_presentation(image, weights, filters, run_cfg)
    inference_ms = (time.perf_counter() - start) * 1e3
    print(
        json.dumps(
            {
                "digit": classify(counts),
                "counts": counts.tolist(),
                "preprocess_ms": round(preprocess_ms, 3),
                "inference_ms": round(inference_ms, 3),
            },
            sort_keys=True,
        )
    )
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    t_ms, dt_us = _parse_timing(args)
    app = create_app(args.weights, t_ms=t_ms, dt_ms=dt_us * 1e-3)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "train": cmd_train,
        "eval": cmd_eval,
        "infer": cmd_infer,
        "serve": cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BlankDrawingError as exc:
        print(f"blank drawing: {exc}", file=sys.stderr)
        return EXIT_BLANK
    except NumericFailureError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (IdxFormatError, CheckpointFormatError, ConfigFormatError, OSError) as exc:
        print(f"io/parse error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
