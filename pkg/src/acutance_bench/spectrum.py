"""2D spectra, the cross-power-density MTF, and ring averaging.

The system response is estimated per frequency bin as
|Y_hat X_hat*| / |X_hat|^2 (cross power over reference auto power) and
reduced to 1D by averaging over concentric unit-width rings. Using the
complex cross power keeps phase information, so content that is merely
added (noise, hallucinated detail) does not masquerade as transfer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .image import Image, to_grey

DEFAULT_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class MtfCurve:
    """Per-ring response values indexed k = 1..n//2 for an n x n source.

    Ring k collects the bins whose signed frequency coordinates (i, j)
    satisfy (k-1)^2 < i^2 + j^2 <= k^2, i.e. the unit-width annulus of
    outer radius k; the DC bin is excluded. Ring k maps to digital
    frequency k/n cycles/pixel.
    """

    values: np.ndarray = field(repr=False)
    n: int

    # Ring k collects bins with (k-1)^2 < i^2 + j^2 <= k^2: the k = 0
    # "ring" is then the lone DC bin, which the curve excludes, and ring
    # n//2 ends exactly at the Nyquist radius so f_digital tops out at 0.5.

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64, copy=True)
        if vals.ndim != 1 or len(vals) != self.n // 2:
            raise ValueError(f"expected {self.n // 2} ring values, got {vals.shape}")
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise ValueError("ring values must be finite and >= 0")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)

    @property
    def k(self) -> np.ndarray:
        return np.arange(1, len(self.values) + 1)

    @property
    def f_digital(self) -> np.ndarray:
        return self.k / self.n


def dft2(img: Image) -> np.ndarray:
    """Unnormalized forward 2D DFT of a square single-channel image.

    DC ends up at index (0, 0) in the standard layout.
    """
    grey = to_grey(img)
    if grey.width != grey.height:
        raise ValueError(f"square image required, got {grey.width}x{grey.height}")
    return np.fft.fft2(grey.data)


def mtf_cross_2d(ref: np.ndarray, test: np.ndarray, eps: float = DEFAULT_EPS) -> np.ndarray:
    """Per-bin |test ref*| / |ref|^2 with a guard on near-empty bins.

    eps is relative to max |ref|^2; bins at or below the guard are set to
    NaN so ring_average excludes them from their ring's mean.
    """
    if ref.shape != test.shape:
        raise ValueError(f"shape mismatch: {ref.shape} vs {test.shape}")
    phi_xx = (ref * np.conj(ref)).real
    phi_xy = test * np.conj(ref)
    guard = eps * phi_xx.max()
    out = np.full(ref.shape, np.nan)
    ok = phi_xx > guard
    out[ok] = np.abs(phi_xy[ok]) / phi_xx[ok]
    return out


@lru_cache(maxsize=32)
def ring_index_map(n: int) -> np.ndarray:
    """Ring index per bin of an n x n spectrum in standard DFT layout.

    Entry is k for bins in ring k (annulus (k-1)^2 < i^2+j^2 <= k^2,
    k = 1..n//2), -1 for the DC bin and for bins beyond the Nyquist
    ring. Cached and read-only; safe to share across threads.
    """
    freq = np.fft.fftfreq(n, d=1.0 / n)  # signed integer coordinates
    d2 = freq[:, None] ** 2 + freq[None, :] ** 2
    k = np.ceil(np.sqrt(d2)).astype(np.int64)
    k[d2 == 0] = -1
    k[k > n // 2] = -1
    k.setflags(write=False)
    return k


def ring_counts(n: int) -> np.ndarray:
    """Cardinality of each ring k = 1..n//2."""
    rings = ring_index_map(n)
    return np.bincount(rings[rings > 0], minlength=n // 2 + 1)[1:]


def ring_average(field: np.ndarray) -> MtfCurve:
    """Average a square 2D field over concentric rings of width 1.

    NaN entries (guarded bins) are excluded from their ring's mean; a
    ring with no valid bins at all is a numeric-domain error.
    """
    if field.ndim != 2 or field.shape[0] != field.shape[1]:
        raise ValueError(f"square field required, got {field.shape}")
    n = field.shape[0]
    rings = ring_index_map(n)
    sel = rings > 0
    idx = rings[sel]
    vals = field[sel]
    good = ~np.isnan(vals)
    sums = np.bincount(idx[good], weights=vals[good], minlength=n // 2 + 1)
    counts = np.bincount(idx[good], minlength=n // 2 + 1)
    if np.any(counts[1:] == 0):
        k_bad = int(np.where(counts[1:] == 0)[0][0]) + 1
        raise ValueError(f"ring {k_bad} has no valid bins (reference spectrum empty)")
    return MtfCurve(sums[1:] / counts[1:], n)


def _hann2d(n: int) -> np.ndarray:
    w = np.hanning(n)
    return np.outer(w, w)


def measure_mtf(
    ref: Image,
    test: Image,
    eps: float = DEFAULT_EPS,
    window: str | None = None,
    ring_ratio: bool = False,
) -> MtfCurve:
    """Full measurement: grey conversion, DFT, cross-power ratio, rings.

    window="hann" applies a 2D Hann window to both images before the DFT
    (off by default; raw spectra are the standard practice here).
    ring_ratio=True averages |cross power| and auto power separately per
    ring before dividing, a more noise-robust non-default variant.
    """
    if ref.shape != test.shape:
        raise ValueError(f"shape mismatch: {ref.shape} vs {test.shape}")
    grey_ref, grey_test = to_grey(ref), to_grey(test)
    if window is None:
        ref_spec, test_spec = dft2(grey_ref), dft2(grey_test)
    elif window == "hann":
        w = _hann2d(grey_ref.height)
        if grey_ref.width != grey_ref.height:
            raise ValueError("square image required")
        ref_spec = np.fft.fft2(grey_ref.data * w)
        test_spec = np.fft.fft2(grey_test.data * w)
    else:
        raise ValueError(f"unknown window {window!r}")
    if not ring_ratio:
        return ring_average(mtf_cross_2d(ref_spec, test_spec, eps))
    # The DC bin is outside every ring, so no masking is needed here.
    phi_xx = (ref_spec * np.conj(ref_spec)).real
    phi_xy_mag = np.abs(test_spec * np.conj(ref_spec))
    num = ring_average(phi_xy_mag)
    den = ring_average(phi_xx)
    guard = eps * phi_xx.max()
    return MtfCurve(num.values / np.maximum(den.values, guard), num.n)


def radial_power_spectrum(img: Image) -> MtfCurve:
    """Ring-averaged power spectrum |F|^2 of a square image (DC excluded)."""
    spec = dft2(img)
    return ring_average((spec * np.conj(spec)).real)
