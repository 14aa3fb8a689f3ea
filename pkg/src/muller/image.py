"""Image container helpers, PNG/PPM/PGM I/O and simple image statistics.

Images are plain ``numpy`` arrays of shape ``(H, W, C)`` with ``C`` in {1, 3}
and float64 values nominally in [0, 1]. Most operations in this package also
accept a leading batch axis, ``(N, H, W, C)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from PIL import Image


class ImageFormatError(ValueError):
    """Raised for unreadable, unsupported or malformed image files."""


@dataclass(frozen=True)
class ImageStats:
    min: float
    max: float
    mean: float
    high_freq_energy: float


def as_image(data, dtype=np.float64) -> np.ndarray:
    """Validate ``data`` and return it as an ``(H, W, C)`` array.

    2D input is treated as a single-channel image.
    """
    arr = np.asarray(data, dtype=dtype)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3:
        raise ValueError(f"expected an (H, W, C) image, got shape {arr.shape}")
    h, w, c = arr.shape
    if h < 1 or w < 1:
        raise ValueError(f"image dimensions must be positive, got {h}x{w}")
    if c not in (1, 3):
        raise ValueError(f"expected 1 or 3 channels, got {c}")
    return arr


def _read_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    # skip whitespace and '#' comments
    n = len(buf)
    while pos < n:
        ch = buf[pos : pos + 1]
        if ch == b"#":
            while pos < n and buf[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif ch.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos : pos + 1].isspace() and buf[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise ImageFormatError("truncated PNM header")
    return buf[start:pos], pos


def _load_pnm(buf: bytes) -> np.ndarray:
    magic = buf[:2]
    channels = {b"P5": 1, b"P6": 3}[magic]
    pos = 2
    fields = []
    for _ in range(3):
        tok, pos = _read_token(buf, pos)
        try:
            fields.append(int(tok))
        except ValueError:
            raise ImageFormatError(f"bad PNM header field {tok!r}") from None
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise ImageFormatError(f"zero-dimension image ({width}x{height})")
    if maxval != 255:
        raise ImageFormatError(f"only maxval 255 is supported, got {maxval}")
    pos += 1  # single whitespace byte after maxval
    count = width * height * channels
    raw = buf[pos : pos + count]
    if len(raw) != count:
        raise ImageFormatError("truncated PNM pixel data")
    return np.frombuffer(raw, dtype=np.uint8).reshape(height, width, channels)


def _load_png(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as im:
            if im.mode not in ("L", "RGB"):
                raise ImageFormatError(f"unsupported PNG mode {im.mode!r}; need 8-bit L or RGB")
            arr = np.asarray(im, dtype=np.uint8)
    except OSError as exc:
        raise ImageFormatError(str(exc)) from exc
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ImageFormatError("zero-dimension image")
    return arr


def load_image(path) -> np.ndarray:
    """Read an 8-bit PNG, P5 PGM or P6 PPM file; samples map to ``v / 255``."""
    path = Path(path)
    try:
        buf = path.read_bytes()
    except OSError as exc:
        raise ImageFormatError(f"cannot read {path}: {exc}") from exc
    if buf[:2] in (b"P5", b"P6"):
        raw = _load_pnm(buf)
    elif buf[:8] == b"\x89PNG\r\n\x1a\n":
        raw = _load_png(path)
    else:
        raise ImageFormatError(f"{path}: not a PNG, P5 or P6 file")
    return raw.astype(np.float64) / 255.0


def quantize(img, clip: bool = True) -> np.ndarray:
    """Map float samples to bytes with ``round(v * 255)``, halves rounded up."""
    img = as_image(img)
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite values")
    if clip:
        img = np.clip(img, 0.0, 1.0)
    elif img.min() < 0.0 or img.max() > 1.0:
        raise ValueError("values outside [0, 1] with clip=False")
    return np.floor(img * 255.0 + 0.5).astype(np.uint8)


def save_image(img, path, clip: bool = True) -> None:
    """Write ``img`` as PNG (``.png`` suffix) or binary PGM/PPM (anything else)."""
    path = Path(path)
    raw = quantize(img, clip=clip)
    h, w, c = raw.shape
    try:
        if path.suffix.lower() == ".png":
            Image.fromarray(raw[:, :, 0] if c == 1 else raw).save(path)
        else:
            magic = b"P5" if c == 1 else b"P6"
            path.write_bytes(magic + f"\n{w} {h}\n255\n".encode() + raw.tobytes())
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def image_stats(img) -> ImageStats:
    from .filtering import default_kernel, separable_convolve

    img = as_image(img)
    residual = img - separable_convolve(img, default_kernel())
    return ImageStats(
        min=float(img.min()),
        max=float(img.max()),
        mean=float(img.mean()),
        high_freq_energy=float(np.mean(residual**2)),
    )


def high_freq_energy(img) -> float:
    return image_stats(img).high_freq_energy


def fixture_image() -> np.ndarray:
    """The bundled 512x512 RGB natural test image (scikit-image's astronaut)."""
    ref = resources.files("muller") / "data" / "astronaut.png"
    with resources.as_file(ref) as p:
        return load_image(p)
