"""Matplotlib rendering for detection curves and correlation tables.

matplotlib is imported lazily with the Agg backend so report generation
works headless and the CLI stays fast when no figure is requested.
"""
from __future__ import annotations

from typing import Mapping, Optional, Sequence


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_detection_curve(rows: Sequence[Mapping], path: str, title: str) -> None:
    """Render (n, exact, closed_form) rows to an image file."""
    plt = _pyplot()
    ns = [r["n"] for r in rows]
    exact = [r["exact"] for r in rows]
    closed = [r["closed_form"] for r in rows]
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ax.plot(ns, exact, "o", label="exact enumeration", zorder=3)
    ax.plot(ns, closed, "-", label="closed form", zorder=2)
    ax.set_xlabel("compared rounds n")
    ax.set_ylabel("detection probability")
    ax.set_ylim(0.0, 1.02)
    ax.set_title(title)
    ax.legend(loc="lower right")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_correlation_heatmap(
    tables: Sequence[Mapping], path: str, title: Optional[str] = None
) -> None:
    """Render the per-choice joint outcome matrices as a grid of heatmaps.

    ``tables`` are report entries with keys alice_pauli, hadamard and a
    4x4 ``joint`` matrix of probabilities.
    """
    plt = _pyplot()
    labels = ["Phi+", "Phi-", "Psi+", "Psi-"]
    n = len(tables)
    cols = 4 if n >= 4 else max(n, 1)
    rows = (n + cols - 1) // cols
    fig, axes = plt.subplots(rows, cols, figsize=(2.6 * cols, 2.8 * rows), squeeze=False)
    for i, entry in enumerate(tables):
        ax = axes[i // cols][i % cols]
        im = ax.imshow(entry["joint"], vmin=0.0, vmax=1.0, cmap="viridis")
        flag = entry.get("hadamard")
        sub = f", H={'on' if flag else 'off'}" if flag is not None else ""
        ax.set_title(f"$\\sigma_A$={entry['alice_pauli']}{sub}", fontsize=9)
        ax.set_xticks(range(4), labels, fontsize=6, rotation=45)
        ax.set_yticks(range(4), labels, fontsize=6)
        ax.set_xlabel("Bob", fontsize=7)
        ax.set_ylabel("Alice", fontsize=7)
    for j in range(n, rows * cols):
        axes[j // cols][j % cols].axis("off")
    if title:
        fig.suptitle(title)
    fig.colorbar(im, ax=[a for row in axes for a in row], shrink=0.8, label="probability")
    fig.savefig(path, dpi=150)
    plt.close(fig)
