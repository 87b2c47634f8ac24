"""Core raster types, greyscale conversion, and fidelity metrics.

Images are immutable float64 rasters with values nominally in [0, 1].
Values are stored unclipped; clipping is an explicit step applied only
at file export, so losses and metrics see raw pipeline outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Rec. 709 luma coefficients for the colorimetric grey conversion.
GREY_WEIGHTS = (0.2126, 0.7152, 0.0722)


def _as_raster(data) -> np.ndarray:
    arr = np.array(data, dtype=np.float64, copy=True)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    if arr.ndim not in (2, 3):
        raise ValueError(f"image data must be 2D or 3D, got ndim={arr.ndim}")
    if arr.ndim == 3 and arr.shape[2] != 3:
        raise ValueError(f"channel count must be 1 or 3, got {arr.shape[2]}")
    if arr.size == 0:
        raise ValueError("image must contain at least one pixel")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image data contains NaN or Inf")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Image:
    """2D raster, 1 or 3 channels, float64, read-only once constructed.

    Single-channel data is stored as a (H, W) array, color as (H, W, 3).
    """

    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "data", _as_raster(self.data))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.data.ndim == 2 else self.data.shape[2]

    @property
    def shape(self) -> tuple:
        return self.data.shape

    def __repr__(self):
        return f"{type(self).__name__}({self.width}x{self.height}x{self.channels})"


class GreyImage(Image):
    """Single-channel image; data is always a (H, W) array."""

    def __post_init__(self):
        super().__post_init__()
        if self.data.ndim != 2:
            raise ValueError("GreyImage requires single-channel data")


def to_grey(img: Image) -> GreyImage:
    """Colorimetric greyscale: 0.2126 R + 0.7152 G + 0.0722 B.

    Single-channel input passes through unchanged.
    """
    if img.channels == 1:
        return img if isinstance(img, GreyImage) else GreyImage(img.data)
    wr, wg, wb = GREY_WEIGHTS
    d = img.data
    return GreyImage(wr * d[:, :, 0] + wg * d[:, :, 1] + wb * d[:, :, 2])


def psnr(a: Image, b: Image, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB over all pixels and channels.

    Returns math.inf when the two images are identical (zero MSE).
    """
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    mse = float(np.mean((a.data - b.data) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def clip01(img: Image) -> Image:
    """Clip values to [0, 1] for export; never applied implicitly."""
    out = np.clip(img.data, 0.0, 1.0)
    return GreyImage(out) if img.channels == 1 else Image(out)
