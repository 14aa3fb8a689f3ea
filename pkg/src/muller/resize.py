"""Base resizers: bilinear and nearest (half-pixel centers) and AREA box downscaling.

Each method is separable; per-axis sampling tables are cached because the
same (in, out) pairs recur for every subband and every training batch.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .filtering import COL_AXIS, ROW_AXIS

METHODS = ("bilinear", "nearest", "area")


@dataclass(frozen=True)
class ResizeSpec:
    in_h: int
    in_w: int
    out_h: int
    out_w: int
    method: str = "bilinear"
    antialias_input: bool = False

    def __post_init__(self):
        if min(self.in_h, self.in_w, self.out_h, self.out_w) < 1:
            raise ValueError("all resize dimensions must be >= 1")
        if self.method not in METHODS:
            raise ValueError(f"unknown resize method {self.method!r}")


def _check_out(out_h, out_w):
    if out_h < 1 or out_w < 1:
        raise ValueError(f"target dimensions must be >= 1, got {out_h}x{out_w}")


def _source_coords(n_in: int, n_out: int) -> np.ndarray:
    t = np.arange(n_out, dtype=np.float64)
    return (t + 0.5) * (n_in / n_out) - 0.5


@lru_cache(maxsize=256)
def _bilinear_table(n_in: int, n_out: int):
    s = np.clip(_source_coords(n_in, n_out), 0.0, n_in - 1)
    i0 = np.floor(s).astype(np.intp)
    i1 = np.minimum(i0 + 1, n_in - 1)
    w1 = s - i0
    w0 = 1.0 - w1
    for a in (i0, i1, w0, w1):
        a.setflags(write=False)
    return i0, i1, w0, w1


@lru_cache(maxsize=256)
def _nearest_table(n_in: int, n_out: int):
    idx = np.floor(_source_coords(n_in, n_out) + 0.5).astype(np.intp)
    idx = np.clip(idx, 0, n_in - 1)
    idx.setflags(write=False)
    return idx


@lru_cache(maxsize=256)
def _area_matrix(n_in: int, n_out: int) -> np.ndarray:
    # output pixel t covers source interval [t*scale, (t+1)*scale)
    scale = n_in / n_out
    m = np.zeros((n_out, n_in))
    for t in range(n_out):
        lo, hi = t * scale, (t + 1) * scale
        for j in range(int(np.floor(lo)), min(int(np.ceil(hi)), n_in)):
            m[t, j] = min(hi, j + 1) - max(lo, j)
        m[t] /= m[t].sum()
    m.setflags(write=False)
    return m


def _shape(img):
    img = np.asarray(img, dtype=np.float64)
    if img.ndim < 3:
        raise ValueError(f"expected (..., H, W, C) image, got shape {img.shape}")
    return img


def _bilinear_axis(x, n_out, axis):
    n_in = x.shape[axis]
    if n_in == n_out:
        return x
    i0, i1, _, w1 = _bilinear_table(n_in, n_out)
    shape = [1] * x.ndim
    shape[axis] = n_out
    # lerp form keeps constant regions exactly constant
    lo = np.take(x, i0, axis=axis)
    return lo + w1.reshape(shape) * (np.take(x, i1, axis=axis) - lo)


def resize_bilinear(img, out_h: int, out_w: int) -> np.ndarray:
    _check_out(out_h, out_w)
    x = _shape(img)
    return _bilinear_axis(_bilinear_axis(x, out_h, ROW_AXIS), out_w, COL_AXIS)


def resize_nearest(img, out_h: int, out_w: int) -> np.ndarray:
    _check_out(out_h, out_w)
    x = _shape(img)
    x = np.take(x, _nearest_table(x.shape[ROW_AXIS], out_h), axis=ROW_AXIS)
    return np.take(x, _nearest_table(x.shape[COL_AXIS], out_w), axis=COL_AXIS)


def resize_area(img, out_h: int, out_w: int) -> np.ndarray:
    """Box-average downscale with fractional edge coverage."""
    _check_out(out_h, out_w)
    x = _shape(img)
    in_h, in_w = x.shape[ROW_AXIS], x.shape[COL_AXIS]
    if out_h > in_h or out_w > in_w:
        raise ValueError(f"area resize only downscales: {in_h}x{in_w} -> {out_h}x{out_w}")
    if out_h != in_h:
        x = np.moveaxis(np.tensordot(_area_matrix(in_h, out_h), np.moveaxis(x, ROW_AXIS, 0), axes=1), 0, ROW_AXIS)
    if out_w != in_w:
        x = np.moveaxis(np.tensordot(_area_matrix(in_w, out_w), np.moveaxis(x, COL_AXIS, 0), axes=1), 0, COL_AXIS)
    return x


def _bilinear_axis_vjp(g, n_in, axis):
    n_out = g.shape[axis]
    if n_in == n_out:
        return g
    i0, i1, w0, w1 = _bilinear_table(n_in, n_out)
    g = np.moveaxis(g, axis, 0)
    wshape = (n_out,) + (1,) * (g.ndim - 1)
    out = np.zeros((n_in,) + g.shape[1:])
    np.add.at(out, i0, g * w0.reshape(wshape))
    np.add.at(out, i1, g * w1.reshape(wshape))
    return np.moveaxis(out, 0, axis)


def resize_bilinear_vjp(img_dims, out_h: int, out_w: int, cotangent) -> np.ndarray:
    """Adjoint of :func:`resize_bilinear` for source dims ``(in_h, in_w)``."""
    in_h, in_w = img_dims[0], img_dims[1]
    g = _shape(cotangent)
    if g.shape[ROW_AXIS] != out_h or g.shape[COL_AXIS] != out_w:
        raise ValueError(f"cotangent shape {g.shape} does not match output {out_h}x{out_w}")
    return _bilinear_axis_vjp(_bilinear_axis_vjp(g, in_w, COL_AXIS), in_h, ROW_AXIS)


def resize(img, out_h: int, out_w: int, method: str = "bilinear") -> np.ndarray:
    try:
        fn = {"bilinear": resize_bilinear, "nearest": resize_nearest, "area": resize_area}[method]
    except KeyError:
        raise ValueError(f"unknown resize method {method!r}") from None
    return fn(img, out_h, out_w)
