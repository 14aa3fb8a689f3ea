"""A two-layer perceptron with softmax cross-entropy, and Adam."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PARAM_NAMES = ("w1", "b1", "w2", "b2")


@dataclass
class ToyClassifier:
    w1: np.ndarray  # (in_dim, hidden)
    b1: np.ndarray
    w2: np.ndarray  # (hidden, n_classes)
    b2: np.ndarray

    @classmethod
    def init(cls, in_dim: int, hidden: int, n_classes: int, seed: int = 0) -> ToyClassifier:
        rng = np.random.default_rng(seed)
        return cls(
            w1=rng.normal(0.0, np.sqrt(1.0 / in_dim), size=(in_dim, hidden)),
            b1=np.zeros(hidden),
            w2=rng.normal(0.0, np.sqrt(1.0 / hidden), size=(hidden, n_classes)),
            b2=np.zeros(n_classes),
        )

    @classmethod
    def zeros(cls, in_dim: int, hidden: int, n_classes: int) -> ToyClassifier:
        return cls(np.zeros((in_dim, hidden)), np.zeros(hidden), np.zeros((hidden, n_classes)), np.zeros(n_classes))

    @property
    def n_classes(self) -> int:
        return self.w2.shape[1]

    def params(self) -> dict:
        return {name: getattr(self, name) for name in PARAM_NAMES}

    def replace(self, params: dict) -> ToyClassifier:
        return ToyClassifier(**{name: params[name] for name in PARAM_NAMES})

    def copy(self) -> ToyClassifier:
        return self.replace({k: v.copy() for k, v in self.params().items()})

    def save(self, path) -> None:
        np.savez(path, **self.params())

    @classmethod
    def load(cls, path) -> ToyClassifier:
        with np.load(path) as f:
            return cls(**{name: f[name] for name in PARAM_NAMES})


@dataclass
class ForwardCache:
    x: np.ndarray  # flattened input (N, D)
    hidden: np.ndarray  # tanh activations (N, H)
    logits: np.ndarray
    input_shape: tuple


def classifier_forward(model: ToyClassifier, batch: np.ndarray):
    """Return ``(logits, cache)`` for a batch of images ``(N, h, w, c)``."""
    batch = np.asarray(batch, dtype=np.float64)
    x = batch.reshape(batch.shape[0], -1)
    if x.shape[1] != model.w1.shape[0]:
        raise ValueError(f"input has {x.shape[1]} features, model expects {model.w1.shape[0]}")
    hidden = np.tanh(x @ model.w1 + model.b1)
    logits = hidden @ model.w2 + model.b2
    return logits, ForwardCache(x, hidden, logits, batch.shape)


def softmax_cross_entropy(logits: np.ndarray, labels: np.ndarray):
    """Mean loss and its gradient w.r.t. the logits."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_p = shifted - log_z
    n = logits.shape[0]
    loss = -log_p[np.arange(n), labels].mean()
    d_logits = np.exp(log_p)
    d_logits[np.arange(n), labels] -= 1.0
    return float(loss), d_logits / n


def classifier_backward(model: ToyClassifier, cache: ForwardCache, labels):
    """Return ``(loss, weight_grads, input_grad)``; input_grad matches the batch shape."""
    labels = np.asarray(labels)
    if labels.shape != (cache.logits.shape[0],):
        raise ValueError("labels must have one entry per batch item")
    loss, d_logits = softmax_cross_entropy(cache.logits, labels)
    d_hidden = (d_logits @ model.w2.T) * (1.0 - cache.hidden**2)
    grads = {
        "w2": cache.hidden.T @ d_logits,
        "b2": d_logits.sum(axis=0),
        "w1": cache.x.T @ d_hidden,
        "b1": d_hidden.sum(axis=0),
    }
    d_input = (d_hidden @ model.w1.T).reshape(cache.input_shape)
    return loss, grads, d_input


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(state: AdamState, params: dict, grads: dict, lr: float | None = None):
    """One bias-corrected Adam update; returns ``(new_params, new_state)``.

    Inputs are left untouched.
    """
    lr = state.lr if lr is None else lr
    t = state.t + 1
    m, v, new = {}, {}, {}
    for name, p in params.items():
        g = np.asarray(grads[name], dtype=np.float64)
        m[name] = state.beta1 * state.m.get(name, 0.0) + (1 - state.beta1) * g
        v[name] = state.beta2 * state.v.get(name, 0.0) + (1 - state.beta2) * g * g
        m_hat = m[name] / (1 - state.beta1**t)
        v_hat = v[name] / (1 - state.beta2**t)
        new[name] = p - lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return new, AdamState(state.lr, state.beta1, state.beta2, state.eps, t, m, v)
