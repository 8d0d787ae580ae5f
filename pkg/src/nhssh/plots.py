"""Figure rendering for the CLI report paths.

Figures are written next to the delimited output, one PNG per task run.
The Agg backend is forced so the CLI never needs a display.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _finish(fig, path: str) -> str:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def fig_spectrum(open_energies: np.ndarray, bulk_energies: np.ndarray, path: str, title: str) -> str:
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    ax = axes[0]
    ax.scatter(bulk_energies.real, bulk_energies.imag, s=12, c="tab:orange",
               marker="o", label="bulk reference", alpha=0.7)
    ax.scatter(open_energies.real, open_energies.imag, s=6, c="tab:blue",
               marker=".", label="open chain")
    ax.set_xlabel("Re E")
    ax.set_ylabel("Im E")
    ax.legend(loc="best", fontsize=8)
    ax = axes[1]
    ax.plot(np.arange(len(open_energies)), np.sort(open_energies.real), ".", ms=3)
    ax.set_xlabel("index")
    ax.set_ylabel("Re E (sorted)")
    fig.suptitle(title)
    return _finish(fig, path)


def fig_phase_diagram(t1s: np.ndarray, deltas: np.ndarray, codes: np.ndarray,
                      path: str, labels: list) -> str:
    fig, ax = plt.subplots(figsize=(6, 5))
    im = ax.pcolormesh(t1s, deltas, codes.T, shading="nearest", cmap="viridis",
                       vmin=-1, vmax=len(labels) - 1)
    ax.set_xlabel("t1 / t2")
    ax.set_ylabel("delta / t2")
    cbar = fig.colorbar(im, ax=ax, ticks=range(len(labels)))
    cbar.ax.set_yticklabels(labels, fontsize=7)
    return _finish(fig, path)


def fig_thermo(temps: np.ndarray, s_bulk: np.ndarray, s_edge: np.ndarray,
               cv_bulk: np.ndarray, path: str, title: str) -> str:
    fig, axes = plt.subplots(1, 3, figsize=(11, 3.5))
    for ax, y, name in zip(
        axes, (s_bulk, s_edge, cv_bulk),
        ("bulk entropy / cell", "edge entropy", "bulk C_V / cell"),
    ):
        ax.plot(temps, y)
        ax.set_xlabel("T")
        ax.set_ylabel(name)
    axes[1].axhline(np.log(4), ls="--", c="gray", lw=0.8)
    fig.suptitle(title)
    return _finish(fig, path)


def fig_ee(deltas: np.ndarray, entropies: np.ndarray, path: str, title: str) -> str:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(deltas, entropies, ".-")
    ax.axhline(np.log(4), ls="--", c="gray", lw=0.8, label="ln 4")
    ax.set_xlabel("delta / t2")
    ax.set_ylabel("entanglement entropy")
    ax.legend()
    ax.set_title(title)
    return _finish(fig, path)


def fig_ee_scaling(lengths: np.ndarray, entropies: np.ndarray, slope: float,
                   intercept: float, path: str, title: str) -> str:
    fig, ax = plt.subplots(figsize=(6, 4))
    x = np.log(lengths.astype(float))
    ax.plot(x, entropies, "ko", ms=4, label="data")
    ax.plot(x, slope * x + intercept, "r-", lw=1,
            label=f"fit slope {slope:.3f}")
    ax.set_xlabel("ln L")
    ax.set_ylabel("entanglement entropy")
    ax.legend()
    ax.set_title(title)
    return _finish(fig, path)


def fig_derivatives(deltas: np.ndarray, d_bulk: np.ndarray, d_edge: np.ndarray,
                    order: int, path: str, title: str) -> str:
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    axes[0].plot(deltas, d_bulk, ".-")
    axes[0].set_ylabel(f"d^{order} omega_bulk/site")
    axes[1].plot(deltas, d_edge, ".-")
    axes[1].set_ylabel(f"d^{order} omega_edge")
    for ax in axes:
        ax.set_xlabel("delta / t2")
    fig.suptitle(title)
    return _finish(fig, path)


def fig_itc(betas: np.ndarray, cv: np.ndarray, peak_betas: np.ndarray,
            path: str, title: str) -> str:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(betas, np.log10(np.abs(cv) + 1e-300), lw=0.8)
    for b in peak_betas:
        ax.axvline(b, c="tab:red", ls=":", lw=0.8)
    ax.set_xlabel("beta = 1/T")
    ax.set_ylabel("log10 |C_V| / cell")
    ax.set_title(title)
    return _finish(fig, path)
