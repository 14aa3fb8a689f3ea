"""Wall-time comparison of plain bilinear resizing against the full resizer."""

from __future__ import annotations

import time

import numpy as np

from .core import MullerParams, muller_forward
from .resize import resize_bilinear


def _summary(samples) -> dict:
    s = np.asarray(samples) * 1e3
    return {"median_ms": float(np.median(s)), "p90_ms": float(np.percentile(s, 90))}


def time_resizers(img, params: MullerParams, out_h: int, out_w: int, reps: int = 20, warmup: int = 2) -> dict:
    """Interleaved timings so both sides see the same machine state."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    for _ in range(warmup):
        resize_bilinear(img, out_h, out_w)
        muller_forward(img, params, out_h, out_w)
    plain, full = [], []
    for _ in range(reps):
        t0 = time.perf_counter()
        resize_bilinear(img, out_h, out_w)
        t1 = time.perf_counter()
        muller_forward(img, params, out_h, out_w)
        t2 = time.perf_counter()
        plain.append(t1 - t0)
        full.append(t2 - t1)
    result = {"reps": reps, "bilinear": _summary(plain), "muller": _summary(full)}
    result["overhead_ratio"] = result["muller"]["median_ms"] / result["bilinear"]["median_ms"]
    return result
