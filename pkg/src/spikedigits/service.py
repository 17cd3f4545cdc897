"""Low-latency local HTTP service for digit inference.

POST /api/infer accepts either a raw user canvas (preprocessed
server-side) or a ready 28x28 image, runs one presentation against the
loaded checkpoint, and reports the digit, per-class spike counts, and the
preprocess/simulation timings.  GET /api/health is a liveness probe.

Requests share the immutable checkpoint and nothing else; each request
simulates its own network state, so concurrent calls never interleave.
Checkpoint (re)loads swap one atomic reference.
"""
from __future__ import annotations

import base64
import binascii
import dataclasses
import time
from typing import Literal, Optional

import numpy as np
from fastapi import FastAPI, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .datasets import load_checkpoint
from .network import NetworkConfig, classify, run_presentation
from .normad import NumericFailureError
from .preprocess import BlankDrawingError, preprocess_pipeline

MAX_CANVAS_SIDE = 1024

DEFAULT_T_MS = 75.0
DEFAULT_DT_MS = 1.0

T_MS_BOUNDS = (10.0, 500.0)
DT_MS_BOUNDS = (0.05, 5.0)


class InferRequest(BaseModel):
    format: Literal["raw", "mnist28"]
    pixels: str
    width: Optional[int] = None
    height: Optional[int] = None


@dataclasses.dataclass
class _Loaded:
    weights: np.ndarray
    cfg: NetworkConfig
    filters: object


class InferenceEngine:
    """Holds the current checkpoint; ``load`` swaps it atomically."""

    def __init__(self, t_ms: float = DEFAULT_T_MS, dt_ms: float = DEFAULT_DT_MS):
        self.t_ms = t_ms
        self.dt_ms = dt_ms
        self._loaded: Optional[_Loaded] = None

    @property
    def weights_loaded(self) -> bool:
        return self._loaded is not None

    def load(self, checkpoint_path) -> None:
        weights, cfg, filters = load_checkpoint(checkpoint_path)
        self._loaded = _Loaded(weights=weights, cfg=cfg, filters=filters)

    def infer(self, image, t_ms: float, dt_ms: float) -> tuple[int, np.ndarray, float]:
        """Returns (digit, counts, inference milliseconds)."""
        loaded = self._loaded
        if loaded is None:
            raise RuntimeError("no checkpoint loaded")
        cfg = dataclasses.replace(loaded.cfg, t=t_ms * 1e-3, dt=dt_ms * 1e-3)
        start = time.perf_counter()
        counts = run_presentation(image, loaded.weights, loaded.filters, cfg)
        elapsed_ms = (time.perf_counter() - start) * 1e3
        return classify(counts), counts, elapsed_ms


def _error(status: int, code: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": code})


def create_app(
    checkpoint_path=None,
    t_ms: float = DEFAULT_T_MS,
    dt_ms: float = DEFAULT_DT_MS,
) -> FastAPI:
    app = FastAPI(title="spikedigits inference service")
    app.add_middleware(
        CORSMiddleware,
        allow_origin_regex=r"https?://(localhost|127\.0\.0\.1)(:\d+)?",
        allow_methods=["*"],
        allow_headers=["*"],
    )
    engine = InferenceEngine(t_ms=t_ms, dt_ms=dt_ms)
    if checkpoint_path is not None:
        engine.load(checkpoint_path)
    app.state.engine = engine

    @app.get("/api/health")
    def health():
        return {"status": "ok", "weights_loaded": engine.weights_loaded}

    @app.post("/api/infer")
    def infer(
        body: InferRequest,
        t_ms: Optional[float] = Query(default=None),
        dt_ms: Optional[float] = Query(default=None),
    ):
        if not engine.weights_loaded:
            return _error(503, "weights_not_loaded")

        use_t = engine.t_ms if t_ms is None else t_ms
        use_dt = engine.dt_ms if dt_ms is None else dt_ms
        if not (T_MS_BOUNDS[0] <= use_t <= T_MS_BOUNDS[1]):
            return _error(400, "t_ms_out_of_range")
        if not (DT_MS_BOUNDS[0] <= use_dt <= DT_MS_BOUNDS[1]):
            return _error(400, "dt_ms_out_of_range")
        steps = use_t / use_dt
        if abs(steps - round(steps)) > 1e-6 * max(1.0, steps):
            return _error(400, "t_not_multiple_of_dt")

        try:
            pixels = base64.b64decode(body.pixels, validate=True)
        except (binascii.Error, ValueError):
            return _error(400, "bad_base64")

        preprocess_ms = 0.0
        if body.format == "raw":
            if body.width is None or body.height is None:
                return _error(400, "missing_dimensions")
            if body.width < 1 or body.height < 1:
                return _error(400, "bad_dimensions")
            if body.width > MAX_CANVAS_SIDE or body.height > MAX_CANVAS_SIDE:
                return _error(413, "canvas_too_large")
            if len(pixels) != body.width * body.height:
                return _error(400, "bad_pixels_length")
            canvas = np.frombuffer(pixels, dtype=np.uint8).reshape(
                body.height, body.width
            )
            start = time.perf_counter()
            try:
                image = preprocess_pipeline(canvas)
            except BlankDrawingError:
                return _error(400, "blank_drawing")
            preprocess_ms = (time.perf_counter() - start) * 1e3
        else:
            if len(pixels) != 28 * 28:
                return _error(400, "bad_pixels_length")
            image = np.frombuffer(pixels, dtype=np.uint8).reshape(28, 28)

        try:
            digit, counts, inference_ms = engine.infer(image, use_t, use_dt)
        except (NumericFailureError, FloatingPointError, ValueError):
            return _error(500, "numeric_failure")

        return {
            "digit": digit,
            "counts": counts.tolist(),
            "preprocess_ms": preprocess_ms,
            "inference_ms": inference_ms,
            "t_ms": use_t,
            "dt_ms": use_dt,
        }

    return app
