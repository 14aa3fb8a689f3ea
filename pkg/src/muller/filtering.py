"""Gaussian kernels, separable replicate-edge convolution and the iterated filter bank.

All functions operate on the last three axes ``(H, W, C)`` so a leading batch
axis passes through untouched.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np
from numba import njit

ROW_AXIS = -3
COL_AXIS = -2


@dataclass(frozen=True)
class GaussianKernel1D:
    taps: np.ndarray
    std: float

    @property
    def ksize(self) -> int:
        return len(self.taps)

    @property
    def radius(self) -> int:
        return len(self.taps) // 2


def gaussian_kernel(ksize: int, std: float) -> GaussianKernel1D:
    """Sampled, unit-sum Gaussian with ``ksize`` taps (odd) and the given std."""
    if int(ksize) != ksize or ksize < 1 or ksize % 2 == 0:
        raise ValueError(f"ksize must be a positive odd integer, got {ksize}")
    if not std > 0:
        raise ValueError(f"std must be positive, got {std}")
    d = np.arange(ksize, dtype=np.float64) - (ksize - 1) / 2
    taps = np.exp(-(d**2) / (2.0 * std**2))
    taps /= taps.sum()
    # exact symmetry regardless of summation order
    taps = 0.5 * (taps + taps[::-1])
    taps.setflags(write=False)
    return GaussianKernel1D(taps=taps, std=float(std))


def default_kernel() -> GaussianKernel1D:
    return gaussian_kernel(5, 1.0)


@njit(cache=True)
def _accumulate(out, left, center, right, t):
    for q in range(out.shape[0]):
        c = center[q]
        out[q] += t * ((left[q] - c) + (right[q] - c))


_BLOCK = 4096


@njit(cache=True)
def _strided_pass(x, taps, stride, out):
    # Filters each row of x (A, M) along its axis of length M // stride.
    # Written as c + sum t_d * ((left - c) + (right - c)) so constants pass
    # through bit-exactly. The interior is processed in cache-sized blocks.
    A, M = x.shape
    L = M // stride
    r = taps.shape[0] // 2
    lo = min(r, L) * stride
    hi = max(L - r, min(r, L)) * stride
    for a in range(A):
        xa = x[a]
        oa = out[a]
        for b0 in range(lo, hi, _BLOCK):
            b1 = min(b0 + _BLOCK, hi)
            oa[b0:b1] = xa[b0:b1]
            for d in range(1, r + 1):
                s = d * stride
                _accumulate(oa[b0:b1], xa[b0 - s : b1 - s], xa[b0:b1], xa[b0 + s : b1 + s], taps[r + d])
        for i in range(L):
            if r <= i < L - r:
                continue
            seg = oa[i * stride : (i + 1) * stride]
            seg[:] = xa[i * stride : (i + 1) * stride]
            for d in range(1, r + 1):
                il = max(i - d, 0)
                ir = min(i + d, L - 1)
                _accumulate(
                    seg,
                    xa[il * stride : (il + 1) * stride],
                    xa[i * stride : (i + 1) * stride],
                    xa[ir * stride : (ir + 1) * stride],
                    taps[r + d],
                )


_local = threading.local()
_SCRATCH_LIMIT = 1 << 22  # elements kept alive per thread (32 MiB)


def _scratch(size: int) -> np.ndarray:
    # Reusing the intermediate buffer avoids re-faulting fresh pages on every call.
    if size > _SCRATCH_LIMIT:
        return np.empty(size)
    buf = getattr(_local, "buf", None)
    if buf is None or buf.size < size:
        buf = np.empty(size)
        _local.buf = buf
    return buf[:size]


def separable_convolve(img: np.ndarray, kernel: GaussianKernel1D) -> np.ndarray:
    """Horizontal then vertical pass with replicate-edge padding."""
    x = np.ascontiguousarray(img, dtype=np.float64)
    if x.ndim < 3:
        raise ValueError(f"expected (..., H, W, C) image, got shape {x.shape}")
    h, w, c = x.shape[-3:]
    n = x.size // (h * w * c) if x.size else 0
    taps = np.ascontiguousarray(kernel.taps)
    tmp = _scratch(x.size).reshape(x.shape)
    out = np.empty(x.shape)
    if x.size:
        _strided_pass(x.reshape(n * h, w * c), taps, c, tmp.reshape(n * h, w * c))
        _strided_pass(tmp.reshape(n, h * w * c), taps, w * c, out.reshape(n, h * w * c))
    return out


def _convolve_axis_adjoint(g: np.ndarray, taps: np.ndarray, axis: int) -> np.ndarray:
    g = np.moveaxis(g, axis, 0)
    n = g.shape[0]
    r = len(taps) // 2
    padded = np.zeros((n + 2 * r,) + g.shape[1:])
    for j, t in enumerate(taps):
        padded[j : j + n] += t * g
    out = padded[r : r + n].copy()
    # fold the replicated border back onto the edge pixels
    out[0] += padded[:r].sum(axis=0)
    out[-1] += padded[r + n :].sum(axis=0)
    return np.moveaxis(out, 0, axis)


def separable_convolve_adjoint(cot: np.ndarray, kernel: GaussianKernel1D) -> np.ndarray:
    """Transpose of :func:`separable_convolve` (replicate boundary included)."""
    cot = np.asarray(cot, dtype=np.float64)
    g = _convolve_axis_adjoint(cot, kernel.taps, ROW_AXIS)
    return _convolve_axis_adjoint(g, kernel.taps, COL_AXIS)


@dataclass(frozen=True)
class FilterBank:
    """``smoothed[i] = W^(k-i) x`` for ``i = 0..k``; the last entry is ``x`` itself.

    Index ``i`` here corresponds to layer ``i + 1`` in the usual 1-based
    numbering, so ``smoothed[0]`` is the smoothest image.
    """

    smoothed: list
    kernel: GaussianKernel1D

    @property
    def k(self) -> int:
        return len(self.smoothed) - 1


def filter_bank(img: np.ndarray, k: int, ksize: int = 5, std: float = 1.0) -> FilterBank:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    kernel = gaussian_kernel(ksize, std)
    img = np.asarray(img, dtype=np.float64)
    smoothed = [img]
    for _ in range(k):
        smoothed.append(separable_convolve(smoothed[-1], kernel))
    smoothed.reverse()
    return FilterBank(smoothed=smoothed, kernel=kernel)


def laplacian_subbands(bank: FilterBank) -> list:
    """Band-pass layers ``(W_l - W_{l+1}) x``, finest band last."""
    s = bank.smoothed
    return [s[i] - s[i + 1] for i in range(bank.k)]
