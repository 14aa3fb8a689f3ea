"""Synthetic texture classification data.

Each image is a smooth random background plus a faint oriented grating whose
orientation encodes the class. All classes share the grating amplitude, so
pixel statistics alone say nothing about the label; the signal lives in the
high frequencies that a plain bilinear downscale attenuates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .resize import resize_bilinear


@dataclass(frozen=True)
class TextureDataset:
    images: np.ndarray  # (N, H, W, 1)
    labels: np.ndarray  # (N,)
    n_classes: int
    seed: int

    def __len__(self) -> int:
        return len(self.labels)

    def split(self, val_fraction: float):
        n_val = int(round(len(self) * val_fraction))
        cut = len(self) - n_val
        train = TextureDataset(self.images[:cut], self.labels[:cut], self.n_classes, self.seed)
        val = TextureDataset(self.images[cut:], self.labels[cut:], self.n_classes, self.seed)
        return train, val


def make_texture_dataset(
    seed: int,
    n_samples: int,
    n_classes: int = 4,
    src_h: int = 64,
    src_w: int = 64,
    frequency: float = 0.18,
    amplitude: float = 0.03,
    background: float = 0.25,
    phase_jitter: float = 1.5,
) -> TextureDataset:
    """Build ``n_samples`` images; labels cycle through the classes then get shuffled.

    ``frequency`` is in cycles per source pixel; ``phase_jitter`` is the
    half-width (radians) of the per-image random phase offset.
    """
    if n_classes < 2:
        raise ValueError("need at least two classes")
    if n_samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    labels = rng.permutation(np.arange(n_samples) % n_classes)

    coarse = rng.normal(0.0, background, size=(n_samples, 4, 4, 1))
    images = 0.5 + resize_bilinear(coarse, src_h, src_w)

    yy, xx = np.mgrid[0:src_h, 0:src_w].astype(np.float64)
    theta = np.pi * labels / n_classes
    phase = rng.uniform(-phase_jitter, phase_jitter, size=n_samples)
    arg = 2 * np.pi * frequency * (
        xx[None] * np.cos(theta)[:, None, None] + yy[None] * np.sin(theta)[:, None, None]
    ) + phase[:, None, None]
    images = images + amplitude * np.cos(arg)[..., None]
    return TextureDataset(images=images, labels=labels.astype(np.int64), n_classes=n_classes, seed=seed)
