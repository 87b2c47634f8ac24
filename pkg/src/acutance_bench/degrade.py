"""Degradation simulators and reference restorers.

These stand in for a camera or restoration network in measurements:
additive Gaussian noise, periodic Gaussian blur, unsharp masking, and
simple denoisers. Convolutions use periodic boundaries to stay
consistent with the DFT-based analysis, and noise is added unclipped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import ndimage

from .image import GreyImage, Image

NOISE_KINDS = ("awgn", "poisson_gaussian")


@dataclass(frozen=True)
class NoiseSpec:
    """Declarative noise description, recordable in sidecars.

    sigma_255 is quoted on the 0..255 convention (sigma_255=25 adds
    std 25/255 in internal [0,1] units). shot_a/read_b parameterize the
    signal-dependent RAW model: variance = shot_a * signal + read_b.
    """

    kind: str
    sigma_255: float = 0.0
    shot_a: float = 0.0
    read_b: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"kind must be one of {NOISE_KINDS}")
        if self.sigma_255 < 0 or self.shot_a < 0 or self.read_b < 0:
            raise ValueError("noise parameters must be >= 0")


def _like(img: Image, data: np.ndarray) -> Image:
    return GreyImage(data) if img.channels == 1 else Image(data)


def add_awgn(img: Image, sigma_255: float, seed: int = 0) -> Image:
    """Add i.i.d. Gaussian noise of std sigma_255/255 per channel."""
    if sigma_255 < 0:
        raise ValueError("sigma_255 must be >= 0")
    if sigma_255 == 0:
        return img
    rng = np.random.default_rng(seed)
    return _like(img, img.data + rng.normal(0.0, sigma_255 / 255.0, img.shape))


def gaussian_kernel1d(sigma_b: float) -> np.ndarray:
    """Sampled Gaussian of radius ceil(4 sigma), normalized to sum 1."""
    if sigma_b <= 0:
        return np.array([1.0])
    radius = math.ceil(4.0 * sigma_b)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x**2) / (2.0 * sigma_b**2))
    return k / k.sum()


def gaussian_blur(img: Image, sigma_b: float) -> Image:
    """Circular (periodic) convolution with a sampled Gaussian kernel."""
    if sigma_b < 0:
        raise ValueError("sigma_b must be >= 0")
    if sigma_b == 0:
        return img
    kernel = gaussian_kernel1d(sigma_b)
    out = ndimage.convolve1d(img.data, kernel, axis=0, mode="wrap")
    out = ndimage.convolve1d(out, kernel, axis=1, mode="wrap")
    return _like(img, out)


def unsharp_mask(img: Image, amount: float, sigma_b: float = 1.0) -> Image:
    """img + amount * (img - gaussian_blur(img)); amount 0 is identity."""
    if amount < 0:
        raise ValueError("amount must be >= 0")
    if amount == 0:
        return img
    blurred = gaussian_blur(img, sigma_b)
    return _like(img, img.data + amount * (img.data - blurred.data))


def median_filter(img: Image, window: int) -> Image:
    """Per-channel median over a window x window periodic neighborhood."""
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be a positive odd integer")
    if window == 1:
        return img
    if img.channels == 1:
        out = ndimage.median_filter(img.data, size=window, mode="wrap")
    else:
        out = np.stack(
            [
                ndimage.median_filter(img.data[:, :, c], size=window, mode="wrap")
                for c in range(3)
            ],
            axis=-1,
        )
    return _like(img, out)


@dataclass(frozen=True)
class Restorer:
    """A named image -> image operation preserving shape."""

    name: str
    fn: Callable[[Image], Image]

    def __call__(self, img: Image) -> Image:
        out = self.fn(img)
        if out.shape != img.shape:
            raise ValueError(f"restorer {self.name} changed image shape")
        return out


def reference_denoiser(kind: str, sigma_b: float = 1.0, window: int = 3) -> Restorer:
    """Desk-scale restorers: "gaussian" (sigma_b) or "median" (window).

    gaussian with sigma_b=0 is the identity restorer.
    """
    if kind == "gaussian":
        return Restorer(f"gaussian({sigma_b:g})", lambda im: gaussian_blur(im, sigma_b))
    if kind == "median":
        return Restorer(f"median({window})", lambda im: median_filter(im, window))
    raise ValueError(f"unknown denoiser kind {kind!r}")
