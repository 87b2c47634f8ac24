"""Dead leaves target generation.

Random disks with a truncated power-law radius distribution are painted
front to back: each disk colors only the pixels no earlier disk claimed,
and generation stops exactly when the raster is fully covered. With
exponent 3 the targets are scale invariant and their radially averaged
power spectrum is close to a straight line in log-log coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .image import GreyImage, Image

COLOR_MODES = ("uniform-rgb", "grey-uniform", "palette")

# Disks are drawn in vectorized batches of this size; the value only
# trades RNG call overhead against wasted tail draws, never the stream.
_CHUNK = 8192


@dataclass(frozen=True)
class DeadLeavesParams:
    """Knobs of the disk process.

    r_max defaults to width/4 so no single disk dominates the target;
    centers are sampled from the image rectangle dilated by r_max on all
    sides to avoid density bias at the borders.
    """

    width: int = 512
    height: int = 512
    alpha: float = 3.0
    r_min: float = 1.0
    r_max: float | None = None
    color_mode: str = "uniform-rgb"
    palette: tuple = ()
    seed: int = 0
    disk_budget: int = 10_000_000

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("width and height must be positive")
        if not self.alpha > 1.0:
            raise ValueError(f"alpha must be > 1, got {self.alpha}")
        rmax = self.resolved_r_max
        if not (0.0 < self.r_min <= rmax):
            raise ValueError(f"need 0 < r_min <= r_max, got ({self.r_min}, {rmax})")
        if rmax > max(self.width, self.height):
            raise ValueError("r_max exceeds the largest image dimension")
        if self.color_mode not in COLOR_MODES:
            raise ValueError(f"color_mode must be one of {COLOR_MODES}")
        if self.color_mode == "palette":
            pal = tuple(tuple(float(v) for v in c) for c in self.palette)
            if not pal or any(len(c) != 3 for c in pal):
                raise ValueError("palette mode needs at least one RGB triple")
            object.__setattr__(self, "palette", pal)
        if self.disk_budget < 1:
            raise ValueError("disk_budget must be positive")

    @property
    def resolved_r_max(self) -> float:
        return self.width / 4 if self.r_max is None else float(self.r_max)


def sample_radius(params: DeadLeavesParams, rng: np.random.Generator, size=None):
    """Draw radii from pdf proportional to r^(-alpha) on [r_min, r_max].

    Inverse-CDF sampling; returns a scalar for size=None, else an array.
    """
    u = rng.random(size)
    return _radius_from_uniform(u, params.alpha, params.r_min, params.resolved_r_max)


def radius_cdf(r, params: DeadLeavesParams):
    """Analytic CDF of the truncated power-law radius law."""
    r_min, r_max = params.r_min, params.resolved_r_max
    if r_min == r_max:
        return np.where(np.asarray(r) >= r_max, 1.0, 0.0)
    e = 1.0 - params.alpha
    lo, hi = r_min**e, r_max**e
    r = np.clip(r, r_min, r_max)
    return (lo - r**e) / (lo - hi)


def _radius_from_uniform(u, alpha: float, r_min: float, r_max: float):
    if r_min == r_max:
        return r_min + 0.0 * u
    e = 1.0 - alpha
    lo, hi = r_min**e, r_max**e
    return (lo - u * (lo - hi)) ** (1.0 / e)


@njit(cache=True)
def _paint_disks(img, uncovered, cx, cy, radius, colors, remaining):  # pragma: no cover
    """Paint each disk onto still-uncovered pixels, front to back.

    Mutates img and uncovered in place. Returns (remaining uncovered
    pixels, number of disks consumed from this batch).
    """
    h, w = uncovered.shape
    n_colors = colors.shape[1]
    used = 0
    for i in range(cx.shape[0]):
        used += 1
        r = radius[i]
        x0 = max(0, int(np.ceil(cx[i] - r)))
        x1 = min(w - 1, int(np.floor(cx[i] + r)))
        y0 = max(0, int(np.ceil(cy[i] - r)))
        y1 = min(h - 1, int(np.floor(cy[i] + r)))
        r2 = r * r
        for y in range(y0, y1 + 1):
            dy2 = (y - cy[i]) ** 2
            for x in range(x0, x1 + 1):
                if uncovered[y, x] and dy2 + (x - cx[i]) ** 2 <= r2:
                    uncovered[y, x] = False
                    for c in range(n_colors):
                        img[y, x, c] = colors[i, c]
                    remaining -= 1
        if remaining == 0:
            break
    return remaining, used


def _draw_chunk(params: DeadLeavesParams, rng: np.random.Generator, n: int):
    """One vectorized batch of (cx, cy, r, color) draws."""
    margin = params.resolved_r_max
    cx = rng.uniform(-margin, (params.width - 1) + margin, n)
    cy = rng.uniform(-margin, (params.height - 1) + margin, n)
    radius = sample_radius(params, rng, n)
    if params.color_mode == "uniform-rgb":
        colors = rng.random((n, 3))
    elif params.color_mode == "grey-uniform":
        colors = rng.random((n, 1))
    else:
        pal = np.asarray(params.palette, dtype=np.float64)
        colors = pal[rng.integers(0, len(pal), n)]
    return cx, cy, radius, colors


def generate(params: DeadLeavesParams, return_disks: bool = False):
    """Generate a dead leaves target; deterministic for a fixed seed.

    Pixel centers sit at integer coordinates; a pixel belongs to a disk
    iff its center lies within Euclidean distance r of the disk center
    (hard disks, no anti-aliasing). Raises RuntimeError if the disk
    budget is exhausted before full coverage.

    With return_disks=True also returns the consumed disk sequence as
    (cx, cy, radius, colors) arrays, in draw order.
    """
    rng = np.random.default_rng(params.seed)
    n_channels = 1 if params.color_mode == "grey-uniform" else 3
    img = np.zeros((params.height, params.width, n_channels), dtype=np.float64)
    uncovered = np.ones((params.height, params.width), dtype=np.bool_)
    remaining = params.height * params.width
    drawn = 0
    trace = [] if return_disks else None
    while remaining > 0:
        n = min(_CHUNK, params.disk_budget - drawn)
        if n <= 0:
            raise RuntimeError(
                f"disk budget {params.disk_budget} exhausted with "
                f"{remaining} pixels uncovered"
            )
        cx, cy, radius, colors = _draw_chunk(params, rng, n)
        remaining, used = _paint_disks(img, uncovered, cx, cy, radius, colors, remaining)
        drawn += used
        if trace is not None:
            trace.append((cx[:used], cy[:used], radius[:used], colors[:used]))
    assert not uncovered.any()
    out = GreyImage(img[:, :, 0]) if n_channels == 1 else Image(img)
    if return_disks:
        parts = [np.concatenate([t[j] for t in trace]) for j in range(4)]
        return out, tuple(parts)
    return out
