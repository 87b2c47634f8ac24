"""Fidelity losses and the mixed-batch training objective.

The batch objective adds a per-image-mean fidelity term over all K
items to an acutance term averaged over the dead-leaves items only:

    total = (1/K) sum_i fid(clean_i, restored_i)
          + (lambda / #dead_leaves) sum_{dead leaves} |1 - A_i|

With no dead-leaves items in the batch the acutance term is defined as
0 so natural-only batches still score.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .acutance import DEFAULT_CSF, DEFAULT_VIEWING, CsfModel, ViewingConditions, acutance_loss
from .image import Image

FIDELITY_KINDS = ("l2", "l1")


def l2_loss(a: Image, b: Image) -> float:
    """Mean squared error over all pixels and channels."""
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.mean((a.data - b.data) ** 2))


def l1_loss(a: Image, b: Image) -> float:
    """Mean absolute error over all pixels and channels."""
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.mean(np.abs(a.data - b.data)))


@dataclass(frozen=True)
class BatchItem:
    """One training example: clean target, restored output, and flags.

    The degraded observation is optional (batch manifests carry only
    clean/restored paths); when present its shape must match.
    """

    clean: Image
    restored: Image
    is_dead_leaves: bool
    degraded: Image | None = None

    def __post_init__(self):
        if self.clean.shape != self.restored.shape:
            raise ValueError("clean and restored shapes differ")
        if self.degraded is not None and self.degraded.shape != self.clean.shape:
            raise ValueError("degraded shape differs from clean")


class BatchLoss(NamedTuple):
    total: float
    fidelity_term: float
    acutance_term: float


def batch_loss(
    items: Sequence[BatchItem],
    lam: float,
    fidelity: str = "l2",
    m: CsfModel = DEFAULT_CSF,
    v: ViewingConditions = DEFAULT_VIEWING,
) -> BatchLoss:
    """Evaluate the mixed-batch objective over K >= 1 items."""
    if not items:
        raise ValueError("batch must contain at least one item")
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    if fidelity not in FIDELITY_KINDS:
        raise ValueError(f"fidelity must be one of {FIDELITY_KINDS}")
    fid = l2_loss if fidelity == "l2" else l1_loss
    fidelity_term = float(np.mean([fid(it.clean, it.restored) for it in items]))
    marked = [it for it in items if it.is_dead_leaves]
    if marked and lam > 0:
        losses = [acutance_loss(it.restored, it.clean, m, v) for it in marked]
        acutance_term = lam * float(np.mean(losses))
    else:
        acutance_term = 0.0
    return BatchLoss(fidelity_term + acutance_term, fidelity_term, acutance_term)
