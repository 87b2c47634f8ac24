"""Figure rendering for measurement and report outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .spectrum import MtfCurve


def save_mtf_figure(path, curves, title="Measured MTF") -> None:
    """Plot one or more (label, MtfCurve) pairs against digital frequency."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, curve in curves:
        ax.plot(curve.f_digital, curve.values, label=label)
    ax.axhline(1.0, color="k", lw=0.8, ls="--", alpha=0.5)
    ax.set_xlabel("Digital frequency (cycles/pixel)")
    ax.set_ylabel("MTF")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    if len(curves) > 1 or curves[0][0]:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_weighted_mtf_figure(path, curve: MtfCurve, weights: np.ndarray, acutance: float) -> None:
    """MTF with its normalized CSF quadrature weights on a twin axis."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(curve.f_digital, curve.values, label="MTF", color="C0")
    ax.axhline(1.0, color="k", lw=0.8, ls="--", alpha=0.5)
    ax.set_xlabel("Digital frequency (cycles/pixel)")
    ax.set_ylabel("MTF", color="C0")
    ax2 = ax.twinx()
    ax2.plot(curve.f_digital, weights, label="CSF weight", color="C1", alpha=0.7)
    ax2.set_ylabel("CSF quadrature weight", color="C1")
    ax.set_title(f"Acutance A = {acutance:.4f}")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_lambda_sweep_figure(path, lambdas, totals, fidelities, acutance_terms) -> None:
    """Batch loss decomposition across the lambda grid."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    x = np.arange(len(lambdas))
    ax.plot(x, totals, "o-", label="total")
    ax.plot(x, fidelities, "s--", label="fidelity term")
    ax.plot(x, acutance_terms, "^--", label="acutance term")
    ax.set_xticks(x)
    ax.set_xticklabels([f"{l:g}" for l in lambdas])
    ax.set_xlabel("lambda")
    ax.set_ylabel("loss")
    ax.set_title("Batch loss vs acutance weight")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
