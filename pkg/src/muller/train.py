"""Joint training of the resizer parameters and a toy classifier."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import Decomposition, MullerParams, combine, decompose
from .data import TextureDataset
from .gradients import param_grads
from .nn import AdamState, ToyClassifier, adam_step, classifier_backward, classifier_forward


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 8
    batch_size: int = 32
    lr_resizer: float = 0.05
    lr_model: float = 0.003
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    out_h: int = 16
    out_w: int = 16
    val_fraction: float = 0.2
    train_resizer: bool = True

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")
        if not (self.lr_resizer > 0 and self.lr_model > 0):
            raise ValueError("learning rates must be positive")
        if min(self.out_h, self.out_w) < 1:
            raise ValueError("output dims must be positive")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ValueError("val_fraction must be in [0, 1)")


def _slice(dec: Decomposition, idx) -> Decomposition:
    return Decomposition(base=dec.base[idx], bands=[b[idx] for b in dec.bands])


def evaluate(dec: Decomposition, labels, params: MullerParams, model: ToyClassifier):
    if len(labels) == 0:
        return float("nan"), float("nan")
    logits, cache = classifier_forward(model, combine(dec, params))
    loss, _, _ = classifier_backward(model, cache, labels)
    acc = float(np.mean(np.argmax(logits, axis=1) == labels))
    return loss, acc


def _record(epoch, params, train, val):
    return {
        "epoch": epoch,
        "loss": train[0],
        "accuracy": train[1],
        "alpha": list(params.alpha),
        "beta": list(params.beta),
        "val_loss": val[0],
        "val_accuracy": val[1],
    }


def train_joint(
    dataset: TextureDataset,
    params0: MullerParams,
    model0: ToyClassifier,
    cfg: TrainConfig,
    on_epoch=None,
):
    """Mini-batch Adam on (alpha, beta) and the classifier weights.

    Returns ``(params, model, metrics)`` where ``metrics`` holds one record per
    epoch, epoch 0 being the untrained starting point. With
    ``cfg.train_resizer=False`` the resizer stays at ``params0``.
    """
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    src_h, src_w = dataset.images.shape[1:3]
    if src_h < cfg.out_h or src_w < cfg.out_w:
        raise ValueError("source images must be at least as large as the output")

    train, val = dataset.split(cfg.val_fraction)
    if len(train) == 0:
        raise ValueError("no training samples after the validation split")
    # the filter bank and resized subbands do not depend on (alpha, beta)
    dec_train = decompose(train.images, params0, cfg.out_h, cfg.out_w)
    dec_val = decompose(val.images, params0, cfg.out_h, cfg.out_w)

    params, model = params0, model0.copy()
    opt_model = AdamState(cfg.lr_model, cfg.beta1, cfg.beta2, cfg.eps)
    opt_resizer = AdamState(cfg.lr_resizer, cfg.beta1, cfg.beta2, cfg.eps)
    rng = np.random.default_rng(cfg.seed)

    metrics = [_record(0, params, evaluate(dec_train, train.labels, params, model),
                       evaluate(dec_val, val.labels, params, model))]
    if on_epoch:
        on_epoch(metrics[-1])
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(len(train))
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            dec = _slice(dec_train, idx)
            _, cache = classifier_forward(model, combine(dec, params))
            _, grads, d_img = classifier_backward(model, cache, train.labels[idx])
            new_weights, opt_model = adam_step(opt_model, model.params(), grads)
            model = model.replace(new_weights)
            if cfg.train_resizer:
                d_alpha, d_beta, _ = param_grads(dec, params, d_img)
                new_rp, opt_resizer = adam_step(
                    opt_resizer,
                    {"alpha": np.array(params.alpha), "beta": np.array(params.beta)},
                    {"alpha": d_alpha, "beta": d_beta},
                )
                params = params.with_values(new_rp["alpha"], new_rp["beta"])
        metrics.append(_record(epoch, params, evaluate(dec_train, train.labels, params, model),
                               evaluate(dec_val, val.labels, params, model)))
        if on_epoch:
            on_epoch(metrics[-1])
    return params, model, metrics


def write_metrics(metrics, path) -> None:
    with open(path, "w") as f:
        for rec in metrics:
            f.write(json.dumps(rec) + "\n")
