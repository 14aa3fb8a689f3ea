"""The multilayer Laplacian resizer.

    z = R(x) + sum_l act(alpha_l * R((W_l - W_{l+1}) x) + beta_l)

with ``W_l = W^(k-l+1)`` an iterated Gaussian and ``W_{k+1} = I``. Filtering
happens at input resolution; every subband is then resized by the base method.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .filtering import filter_bank
from .resize import ResizeSpec, resize

NONLINEARITIES = ("tanh", "identity")
BASE_METHODS = ("bilinear", "nearest")
# "scale_shift": act(alpha * R(s) + beta)      (default)
# "shift_scale": act(alpha * (R(s) + beta))
EQ2_READINGS = ("scale_shift", "shift_scale")


@dataclass(frozen=True)
class MullerParams:
    alpha: tuple
    beta: tuple
    ksize: int = 5
    std: float = 1.0
    nonlinearity: str = "tanh"
    base_method: str = "bilinear"
    eq2_reading: str = "scale_shift"

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        if len(self.alpha) != len(self.beta):
            raise ValueError("alpha and beta must have the same length")
        if len(self.alpha) < 1:
            raise ValueError("need at least one layer")
        if self.ksize < 1 or self.ksize % 2 == 0:
            raise ValueError(f"ksize must be a positive odd integer, got {self.ksize}")
        if not self.std > 0:
            raise ValueError(f"std must be positive, got {self.std}")
        if self.nonlinearity not in NONLINEARITIES:
            raise ValueError(f"unknown nonlinearity {self.nonlinearity!r}")
        if self.base_method not in BASE_METHODS:
            raise ValueError(f"unknown base method {self.base_method!r}")
        if self.eq2_reading not in EQ2_READINGS:
            raise ValueError(f"unknown eq2_reading {self.eq2_reading!r}")

    @property
    def k(self) -> int:
        return len(self.alpha)

    @property
    def n_trainable(self) -> int:
        return 2 * self.k

    @classmethod
    def zeros(cls, k: int = 2, **kwargs) -> MullerParams:
        return cls(alpha=(0.0,) * k, beta=(0.0,) * k, **kwargs)

    def with_values(self, alpha, beta) -> MullerParams:
        return replace(self, alpha=tuple(alpha), beta=tuple(beta))

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "ksize": self.ksize,
            "std": self.std,
            "nonlinearity": self.nonlinearity,
            "base_method": self.base_method,
            "layers": [{"alpha": a, "beta": b} for a, b in zip(self.alpha, self.beta)],
            "eq2_reading": self.eq2_reading,
        }

    @classmethod
    def from_dict(cls, d: dict) -> MullerParams:
        layers = d["layers"]
        if "k" in d and d["k"] != len(layers):
            raise ValueError(f"k={d['k']} but {len(layers)} layers given")
        return cls(
            alpha=[layer["alpha"] for layer in layers],
            beta=[layer["beta"] for layer in layers],
            ksize=int(d.get("ksize", 5)),
            std=float(d.get("std", 1.0)),
            nonlinearity=d.get("nonlinearity", "tanh"),
            base_method=d.get("base_method", "bilinear"),
            eq2_reading=d.get("eq2_reading", "scale_shift"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> MullerParams:
        return cls.from_dict(json.loads(text))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> MullerParams:
        return cls.from_json(Path(path).read_text())


@dataclass(frozen=True)
class GammaCoeffs:
    gamma: tuple
    delta: float


@dataclass
class Decomposition:
    """Parameter-independent part of the forward pass: ``R(x)`` and ``R(s_l)``."""

    base: np.ndarray
    bands: list = field(default_factory=list)


def _act(u, nonlinearity):
    return np.tanh(u) if nonlinearity == "tanh" else u


def decompose(img, params: MullerParams, out_h: int, out_w: int) -> Decomposition:
    img = np.asarray(img, dtype=np.float64)
    bank = filter_bank(img, params.k, params.ksize, params.std)
    # R is linear, so R(W_l x - W_{l+1} x) = R(W_l x) - R(W_{l+1} x): resize the
    # k+1 smoothed images once and take the band differences at output size.
    resized = [resize(s, out_h, out_w, params.base_method) for s in bank.smoothed]
    bands = [resized[i] - resized[i + 1] for i in range(params.k)]
    return Decomposition(base=resized[-1], bands=bands)


def layer_preactivation(band, alpha, beta, reading):
    if reading == "scale_shift":
        return alpha * band + beta
    return alpha * (band + beta)


def combine(dec: Decomposition, params: MullerParams) -> np.ndarray:
    z = dec.base.copy()
    for band, a, b in zip(dec.bands, params.alpha, params.beta):
        z += _act(layer_preactivation(band, a, b, params.eq2_reading), params.nonlinearity)
    return z


def muller_forward(img, params: MullerParams, out_h: int, out_w: int) -> np.ndarray:
    """Resize ``img`` (``(..., H, W, C)``) to ``out_h x out_w``; output is not clamped."""
    return combine(decompose(img, params, out_h, out_w), params)


def derive_gamma(params: MullerParams) -> GammaCoeffs:
    """Coefficients of the equivalent form ``g0 R(x) + sum g_l R(L_l x) + delta``.

    Uses ``W_l - W_{l+1} = L_{l+1} - L_l`` with ``L_{k+1} = 0``.
    """
    if params.nonlinearity != "identity":
        raise ValueError("the linear Laplacian form needs nonlinearity='identity'")
    a = (0.0,) + params.alpha
    gamma = (1.0,) + tuple(a[i - 1] - a[i] for i in range(1, params.k + 1))
    if params.eq2_reading == "scale_shift":
        delta = sum(params.beta)
    else:
        delta = sum(x * y for x, y in zip(params.alpha, params.beta))
    return GammaCoeffs(gamma=gamma, delta=float(delta))


def muller_forward_linear_form(img, params: MullerParams, out_h: int, out_w: int) -> np.ndarray:
    coeffs = derive_gamma(params)
    img = np.asarray(img, dtype=np.float64)
    bank = filter_bank(img, params.k, params.ksize, params.std)
    method = params.base_method
    y = coeffs.gamma[0] * resize(img, out_h, out_w, method)
    for ell in range(1, params.k + 1):
        lap = img - bank.smoothed[ell - 1]
        y = y + coeffs.gamma[ell] * resize(lap, out_h, out_w, method)
    return y + coeffs.delta


@dataclass(frozen=True)
class FlopsReport:
    resize_flops: float
    filter_flops: float
    pointwise_flops: float
    n_resizes: int
    n_filters: int

    @property
    def total(self) -> float:
        return self.resize_flops + self.filter_flops + self.pointwise_flops


# per output sample: bilinear blends 4 taps (4 mul + 3 add), nearest is a copy
_RESIZE_COST = {"bilinear": 7, "nearest": 0, "area": 2}
# scale, shift, activation, accumulate into the base image
_LAYER_COST = 4


def resize_flops(spec: ResizeSpec, channels: int = 3) -> float:
    return float(_RESIZE_COST[spec.method] * spec.out_h * spec.out_w * channels)


def muller_flops(spec: ResizeSpec, params: MullerParams, channels: int = 3) -> FlopsReport:
    """Closed-form operation count for one image.

    k+1 base resizes at output resolution, k separable Gaussian filters at
    input resolution (two passes of ``ksize`` multiplies and ``ksize`` adds per
    sample), k subband subtractions at input resolution and the per-layer
    pointwise work at output resolution.
    """
    k = params.k
    n_in = spec.in_h * spec.in_w * channels
    n_out = spec.out_h * spec.out_w * channels
    one_resize = resize_flops(replace(spec, method=params.base_method), channels)
    filt = k * 2 * (2 * params.ksize) * n_in
    pointwise = k * n_in + k * _LAYER_COST * n_out
    return FlopsReport(
        resize_flops=(k + 1) * one_resize,
        filter_flops=float(filt),
        pointwise_flops=float(pointwise),
        n_resizes=k + 1,
        n_filters=k,
    )


# (alpha_1, beta_1, alpha_2, beta_2) learned jointly with ImageNet-1k backbones
PRESETS = {
    True: {
        "effnet_b0": (1.715, 0.088, -8.41, 0.001),
        "mobilenet_v2": (1.480, 0.174, -5.25, -0.058),
        "resnet50": (1.892, -0.014, -11.295, 0.003),
    },
    False: {
        "effnet_b0": (1.632, -0.014, -7.265, 0.026),
        "mobilenet_v2": (1.792, 0.269, -7.514, -0.077),
        "resnet50": (1.687, -0.039, -12.637, 0.015),
    },
}
PRESET_NAMES = tuple(PRESETS[True])


def preset(name: str, antialias: bool = True) -> MullerParams:
    try:
        a1, b1, a2, b2 = PRESETS[bool(antialias)][name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}") from None
    return MullerParams(alpha=(a1, a2), beta=(b1, b2))


def preset_table() -> list[dict]:
    rows = []
    for aa in (True, False):
        for name in PRESET_NAMES:
            p = preset(name, aa)
            rows.append({"name": name, "antialias": aa, **p.to_dict()})
    return rows


__all__ = [
    "MullerParams", "GammaCoeffs", "FlopsReport", "Decomposition",
    "muller_forward", "muller_forward_linear_form", "derive_gamma", "muller_flops",
    "resize_flops", "preset", "preset_table", "decompose", "combine",
]
