"""Figure rendering for report bundles.

Report commands write these PNGs next to their CSV/JSON output; the
library itself never pops up a window (Agg backend, files only).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .gaussian import GaussianComponent, WavepacketSuperposition, norm_squared  # noqa: E402
from .protocol import postselected_mean_approx, postselected_state  # noqa: E402

__all__ = [
    "save_momentum_density_figure",
    "save_sweep_figure",
    "save_trajectory_figure",
    "save_histogram_figure",
]

_DPI = 150


def _density(state: WavepacketSuperposition, p: np.ndarray) -> np.ndarray:
    return np.abs(state.amplitude(p)) ** 2 / norm_squared(state)


def save_momentum_density_figure(epsilon: float, r: float, path) -> str:
    """Initial, kicked, postselected and classical-mixture densities."""
    chi = WavepacketSuperposition.of(GaussianComponent(0.0))
    kicked = WavepacketSuperposition.of(GaussianComponent(-r))
    post, _ = postselected_state(epsilon, r)
    shift = postselected_mean_approx(epsilon, r)
    p = np.linspace(-5.0 + min(0.0, -r), 5.0 + max(shift, 0.0), 1201)

    p_r = (1.0 - epsilon) / 2.0
    mixture = (1.0 - p_r) * _density(chi, p) + p_r * _density(kicked, p)

    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ax.plot(p, _density(chi, p), label="initial packet", color="0.35", lw=1.2)
    ax.plot(p, mixture, label="classical mixture", color="tab:orange", ls="--", lw=1.4)
    ax.plot(p, _density(post, p), label="postselected", color="tab:blue", lw=1.8)
    ax.axvline(0.0, color="0.8", lw=0.8)
    ax.axvline(shift, color="tab:blue", lw=0.8, ls=":",
               label=f"first-order shift +{shift:.3g}")
    ax.set_xlabel("momentum (packet-width units)")
    ax.set_ylabel("probability density")
    ax.set_title(f"conditioned momentum distribution (eps={epsilon:g}, r={r:g})")
    ax.legend(frameon=False, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return str(path)


def save_sweep_figure(x, columns: dict, xlabel: str, path, logx=True, logy=True) -> str:
    """Line plot of selected sweep columns against the swept parameter."""
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    for label, values in columns.items():
        ax.plot(x, values, marker="o", ms=3, lw=1.2, label=label)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(frameon=False, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return str(path)


def save_trajectory_figure(t, separation, distance, path) -> str:
    """Arm separation and near-arm distance over the interferometry window."""
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ax.plot(t, np.asarray(separation) * 1e6, color="tab:blue", lw=1.6,
            label="arm separation s(t)")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("separation (um)", color="tab:blue")
    ax2 = ax.twinx()
    ax2.plot(t, np.asarray(distance) * 1e6, color="tab:red", lw=1.6, ls="--",
             label="near-arm distance d_R(t)")
    ax2.set_ylabel("distance to probe (um)", color="tab:red")
    lines = ax.get_lines() + ax2.get_lines()
    ax.legend(lines, [ln.get_label() for ln in lines], frameon=False, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return str(path)


def save_histogram_figure(samples, epsilon: float, r: float, path, bins=80) -> str:
    """Sampled conditional momenta against the exact density."""
    post, _ = postselected_state(epsilon, r)
    samples = np.asarray(samples, dtype=float)
    lo, hi = samples.min() - 0.5, samples.max() + 0.5
    p = np.linspace(lo, hi, 801)

    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ax.hist(samples, bins=bins, density=True, color="tab:blue", alpha=0.45,
            label=f"{samples.size} conditioned samples")
    ax.plot(p, _density(post, p), color="k", lw=1.4, label="exact density")
    ax.axvline(-r, color="tab:orange", lw=1.2, ls="--",
               label=f"bare attraction kick {-r:.3g}")
    ax.set_xlabel("momentum (packet-width units)")
    ax.set_ylabel("probability density")
    ax.legend(frameon=False, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return str(path)
