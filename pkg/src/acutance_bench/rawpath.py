"""RAW-domain measurement path: RGGB packing, grey reduction, noise.

A RAW mosaic is packed into four quarter-resolution planes (R, G1, G2,
B), reduced to a single grey array by white-balance-weighted averaging,
and measured with the same MTF/acutance stack as RGB images. Sensor
noise follows the heteroscedastic Gaussian approximation of the
Poisson-Gaussian model: variance = shot_a * signal + read_b.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .acutance import (
    DEFAULT_CSF,
    DEFAULT_VIEWING,
    CsfModel,
    ViewingConditions,
    acutance_score,
)
from .image import GreyImage, Image
from .spectrum import measure_mtf

DEFAULT_SHOT_A = 0.01
DEFAULT_READ_B = 1e-4

# Plane order of the packed tensor, from the 2x2 RGGB tile.
PLANE_NAMES = ("R", "G1", "G2", "B")


@dataclass(frozen=True, eq=False)
class RawImage:
    """Single-channel Bayer mosaic, fixed RGGB pattern.

    Values live on the [0, 1] scale nominally but are not clipped (noise
    simulation keeps its tails). Dimensions must be even so the mosaic
    tiles exactly.
    """

    data: np.ndarray = field(repr=False)
    wb_gains: tuple = (1.0, 1.0, 1.0)
    cfa: str = "RGGB"

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64, copy=True)
        if arr.ndim != 2:
            raise ValueError("RAW data must be a single-channel 2D array")
        if arr.shape[0] % 2 or arr.shape[1] % 2:
            raise ValueError(f"RAW dimensions must be even, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("RAW data contains NaN or Inf")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        gains = tuple(float(g) for g in self.wb_gains)
        if len(gains) != 3 or not all(np.isfinite(g) and g > 0 for g in gains):
            raise ValueError("wb_gains must be three finite positive values")
        object.__setattr__(self, "wb_gains", gains)
        if self.cfa != "RGGB":
            raise ValueError("only the RGGB pattern is supported")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def __repr__(self):
        return f"RawImage({self.width}x{self.height}, gains={self.wb_gains})"


def pack_rggb(raw: RawImage) -> np.ndarray:
    """Pack the (H, W) mosaic into an (H/2, W/2, 4) plane stack."""
    d = raw.data
    return np.stack(
        [d[0::2, 0::2], d[0::2, 1::2], d[1::2, 0::2], d[1::2, 1::2]], axis=-1
    )


def unpack_rggb(planes: np.ndarray, wb_gains=(1.0, 1.0, 1.0)) -> RawImage:
    """Exact inverse of pack_rggb."""
    if planes.ndim != 3 or planes.shape[2] != 4:
        raise ValueError(f"expected an (H/2, W/2, 4) stack, got {planes.shape}")
    h2, w2 = planes.shape[:2]
    data = np.empty((2 * h2, 2 * w2), dtype=np.float64)
    data[0::2, 0::2] = planes[:, :, 0]
    data[0::2, 1::2] = planes[:, :, 1]
    data[1::2, 0::2] = planes[:, :, 2]
    data[1::2, 1::2] = planes[:, :, 3]
    return RawImage(data, wb_gains)


def raw_to_grey(planes: np.ndarray, wb_gains) -> GreyImage:
    """White-balance-weighted plane average onto an (H/2, W/2) grey array.

    grey = (g_r R + g_g G1 + g_g G2 + g_b B) / 4; the green gain is
    shared by both green planes and unit gains reduce to a plain mean.
    """
    g_r, g_g, g_b = (float(g) for g in wb_gains)
    if not all(g > 0 for g in (g_r, g_g, g_b)):
        raise ValueError("wb_gains must be positive")
    p = planes
    grey = (g_r * p[:, :, 0] + g_g * p[:, :, 1] + g_g * p[:, :, 2] + g_b * p[:, :, 3]) / 4.0
    return GreyImage(grey)


def mosaic_from_rgb(img: Image, wb_gains=(1.0, 1.0, 1.0)) -> RawImage:
    """Sample an RGB image onto an RGGB mosaic, undoing white balance.

    Each site takes its channel's value divided by that channel's gain
    (simulating the unbalanced sensor response), clipped to [0, 1].
    """
    if img.channels != 3:
        raise ValueError("mosaic_from_rgb needs a 3-channel image")
    if img.height % 2 or img.width % 2:
        raise ValueError("image dimensions must be even")
    g_r, g_g, g_b = (float(g) for g in wb_gains)
    d = img.data
    raw = np.empty((img.height, img.width), dtype=np.float64)
    raw[0::2, 0::2] = d[0::2, 0::2, 0] / g_r
    raw[0::2, 1::2] = d[0::2, 1::2, 1] / g_g
    raw[1::2, 0::2] = d[1::2, 0::2, 1] / g_g
    raw[1::2, 1::2] = d[1::2, 1::2, 2] / g_b
    return RawImage(np.clip(raw, 0.0, 1.0), wb_gains)


def add_poisson_gaussian(
    raw: RawImage,
    shot_a: float = DEFAULT_SHOT_A,
    read_b: float = DEFAULT_READ_B,
    seed: int = 0,
) -> RawImage:
    """Heteroscedastic Gaussian approximation of Poisson-Gaussian noise.

    out = x + sqrt(shot_a * x + read_b) * eps with standard normal eps;
    the variance term is floored at 0 for any negative inputs.
    """
    if shot_a < 0 or read_b < 0:
        raise ValueError("shot_a and read_b must be >= 0")
    if shot_a == 0 and read_b == 0:
        return raw
    rng = np.random.default_rng(seed)
    std = np.sqrt(np.maximum(shot_a * raw.data + read_b, 0.0))
    return RawImage(raw.data + std * rng.standard_normal(raw.data.shape), raw.wb_gains)


def raw_acutance(
    ref: RawImage,
    test: RawImage,
    m: CsfModel = DEFAULT_CSF,
    v: ViewingConditions = DEFAULT_VIEWING,
) -> float:
    """Texture acutance computed on the packed-and-greyed RAW pair.

    Both mosaics are reduced with the reference's white-balance gains;
    the ring grid (and so the Nyquist) is that of the (H/2, W/2) array.
    """
    if ref.data.shape != test.data.shape:
        raise ValueError(f"shape mismatch: {ref.data.shape} vs {test.data.shape}")
    if ref.wb_gains != test.wb_gains:
        raise ValueError("white-balance gains must match")
    grey_ref = raw_to_grey(pack_rggb(ref), ref.wb_gains)
    grey_test = raw_to_grey(pack_rggb(test), ref.wb_gains)
    return acutance_score(measure_mtf(grey_ref, grey_test), m, v)
