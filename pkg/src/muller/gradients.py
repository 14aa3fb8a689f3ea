"""Reverse-mode gradients of the resizer and a central-difference oracle."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import Decomposition, MullerParams, decompose, layer_preactivation, muller_forward
from .filtering import gaussian_kernel, separable_convolve_adjoint
from .resize import resize_bilinear_vjp


@dataclass
class GradBuffer:
    d_alpha: np.ndarray
    d_beta: np.ndarray
    d_input: Optional[np.ndarray] = None

    def flat(self) -> np.ndarray:
        parts = [self.d_alpha, self.d_beta]
        if self.d_input is not None:
            parts.append(self.d_input.ravel())
        return np.concatenate(parts)


def _act_grad(u, nonlinearity):
    if nonlinearity == "tanh":
        t = np.tanh(u)
        return 1.0 - t * t
    return np.ones_like(u)


def param_grads(dec: Decomposition, params: MullerParams, cot: np.ndarray):
    """Gradients w.r.t. (alpha, beta) plus the per-layer band cotangents.

    The band cotangent ``alpha_l * act'(u_l) * cot`` is what flows back into
    the subband ``l``; it is returned so callers can continue to the input.
    """
    k = params.k
    d_alpha = np.zeros(k)
    d_beta = np.zeros(k)
    band_cots = []
    for ell, (band, a, b) in enumerate(zip(dec.bands, params.alpha, params.beta)):
        u = layer_preactivation(band, a, b, params.eq2_reading)
        g = cot * _act_grad(u, params.nonlinearity)
        if params.eq2_reading == "scale_shift":
            d_alpha[ell] = np.sum(g * band)
            d_beta[ell] = np.sum(g)
        else:
            d_alpha[ell] = np.sum(g * (band + b))
            d_beta[ell] = a * np.sum(g)
        band_cots.append(a * g)
    return d_alpha, d_beta, band_cots


def muller_vjp(img, params: MullerParams, out_dims, cotangent, with_input: bool = False) -> GradBuffer:
    """Pull ``cotangent`` (shaped like the output) back to (alpha, beta) and optionally ``img``."""
    out_h, out_w = out_dims
    img = np.asarray(img, dtype=np.float64)
    cot = np.asarray(cotangent, dtype=np.float64)
    expected = img.shape[:-3] + (out_h, out_w, img.shape[-1])
    if cot.shape != expected:
        raise ValueError(f"cotangent shape {cot.shape} != output shape {expected}")
    if with_input and params.base_method != "bilinear":
        raise ValueError("input gradients are only available for the bilinear base method")

    dec = decompose(img, params, out_h, out_w)
    d_alpha, d_beta, band_cots = param_grads(dec, params, cot)
    if not with_input:
        return GradBuffer(d_alpha, d_beta)

    # band_l = R(W_l x) - R(W_{l+1} x); level i holds W^(k-i) x, level k is x
    k = params.k
    in_dims = img.shape[-3:-1]
    level_cots = [np.zeros_like(cot) for _ in range(k)] + [cot.copy()]
    for ell, g in enumerate(band_cots):
        level_cots[ell] += g
        level_cots[ell + 1] -= g
    kernel = gaussian_kernel(params.ksize, params.std)
    acc = resize_bilinear_vjp(in_dims, out_h, out_w, level_cots[0])
    for i in range(1, k + 1):
        acc = separable_convolve_adjoint(acc, kernel) + resize_bilinear_vjp(in_dims, out_h, out_w, level_cots[i])
    return GradBuffer(d_alpha, d_beta, acc)


def finite_diff_grads(
    img,
    params: MullerParams,
    out_dims,
    loss: Callable[[np.ndarray], float],
    eps: float = 1e-6,
    with_input: bool = False,
) -> GradBuffer:
    """Central differences of ``loss(muller_forward(...))`` per parameter (and pixel)."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    out_h, out_w = out_dims
    img = np.asarray(img, dtype=np.float64)

    def f(p, x=img):
        return loss(muller_forward(x, p, out_h, out_w))

    alpha = np.array(params.alpha)
    beta = np.array(params.beta)
    d_alpha = np.zeros(params.k)
    d_beta = np.zeros(params.k)
    for ell in range(params.k):
        for vec, out in ((alpha, d_alpha), (beta, d_beta)):
            hi, lo = vec.copy(), vec.copy()
            hi[ell] += eps
            lo[ell] -= eps
            if vec is alpha:
                p_hi, p_lo = params.with_values(hi, beta), params.with_values(lo, beta)
            else:
                p_hi, p_lo = params.with_values(alpha, hi), params.with_values(alpha, lo)
            out[ell] = (f(p_hi) - f(p_lo)) / (2 * eps)

    d_input = None
    if with_input:
        d_input = np.zeros_like(img)
        flat = d_input.reshape(-1)
        for idx in range(img.size):
            x_hi = img.copy().reshape(-1)
            x_lo = img.copy().reshape(-1)
            x_hi[idx] += eps
            x_lo[idx] -= eps
            flat[idx] = (f(params, x_hi.reshape(img.shape)) - f(params, x_lo.reshape(img.shape))) / (2 * eps)
    return GradBuffer(d_alpha, d_beta, d_input)


def relative_error(a, b, floor: float = 1e-8) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)


@dataclass
class GradcheckCase:
    index: int
    k: int
    errors: dict  # component name -> relative error

    @property
    def worst(self) -> float:
        return max(self.errors.values())


def run_gradcheck(
    n_instances: int = 20,
    seed: int = 0,
    size: int = 16,
    channels: int = 1,
    ks=(1, 2, 3),
    with_input: bool = False,
    eps: float = 1e-5,
    inject_bug: bool = False,
) -> list[GradcheckCase]:
    """Compare :func:`muller_vjp` against central differences on random instances.

    Each instance draws an image, a layer count from ``ks``, random (alpha,
    beta) and a random-projection loss ``sum(r * z)``. ``inject_bug`` drops
    the activation derivative from the analytic path so the harness itself
    can be shown to catch errors.
    """
    rng = np.random.default_rng(seed)
    cases = []
    for i in range(n_instances):
        k = int(rng.choice(ks))
        img = rng.random((size, size, channels))
        out_h, out_w = int(rng.integers(3, size)), int(rng.integers(3, size))
        params = MullerParams(alpha=rng.normal(0.0, 1.5, k), beta=rng.normal(0.0, 0.3, k))
        proj = rng.normal(size=(out_h, out_w, channels))
        analytic = muller_vjp(img, params, (out_h, out_w), proj, with_input=with_input)
        if inject_bug:
            dec = decompose(img, params, out_h, out_w)
            analytic.d_alpha = np.array([np.sum(proj * band) for band in dec.bands])
        numeric = finite_diff_grads(img, params, (out_h, out_w), lambda z: float(np.sum(proj * z)), eps, with_input)
        errors = {}
        for ell in range(k):
            errors[f"alpha_{ell + 1}"] = float(relative_error(analytic.d_alpha[ell], numeric.d_alpha[ell]))
            errors[f"beta_{ell + 1}"] = float(relative_error(analytic.d_beta[ell], numeric.d_beta[ell]))
        if with_input:
            errors["input"] = float(relative_error(analytic.d_input, numeric.d_input).max())
        cases.append(GradcheckCase(i, k, errors))
    return cases
