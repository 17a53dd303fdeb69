"""Figure rendering for the report path.

Each section that emits a CSV also gets one PNG next to it. Figures are a
presentation aid: the CSV files remain the machine-readable contract, and
only they are covered by the byte-identical determinism guarantee.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_DPI = 130


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_trajectories(trajectories, path) -> None:
    """Additive component and leading direction coordinate per path."""
    fig, (ax_s, ax_x) = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    for k, traj in enumerate(trajectories):
        steps = np.arange(traj.n_steps + 1)
        ax_s.plot(steps, traj.s, lw=0.8, label=f"path {k}")
        ax_x.plot(steps, traj.xs[:, 0], lw=0.8)
    ax_s.set_ylabel("S_n")
    ax_x.set_ylabel("X_n[0]")
    ax_x.set_xlabel("step")
    if len(trajectories) > 1:
        ax_s.legend(fontsize=8)
    ax_s.set_title("simulated walk")
    _save(fig, path)


def render_stationary(hist, path) -> None:
    """Stationary mass by node (by angle for d = 2)."""
    fig, ax = plt.subplots(figsize=(7, 4))
    if hist.grid.dim == 2:
        angles = np.arctan2(hist.grid.nodes[:, 1], hist.grid.nodes[:, 0])
        ax.plot(angles, hist.masses, lw=0.9)
        ax.set_xlabel("angle on [0, pi/2]")
        ax.set_xlim(0.0, math.pi / 2.0)
    else:
        ax.plot(np.arange(hist.grid.n_nodes), hist.masses, lw=0.9)
        ax.set_xlabel("node index")
    ax.set_ylabel("mass")
    ax.set_title("stationary occupation estimate")
    _save(fig, path)


def render_recurrence(stats, path) -> None:
    """Hit-rate estimate with its one-sided lower confidence bound."""
    fig, ax = plt.subplots(figsize=(4.5, 4))
    ax.bar([0], [stats.eta_hat], width=0.5, color="tab:blue", label="eta_hat")
    ax.axhline(stats.ci_low, color="tab:red", ls="--", label="99% lower bound")
    ax.set_xticks([0])
    ax.set_xticklabels([f"{stats.hits}/{stats.trials} hits"])
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("return probability")
    ax.set_title("aperiodicity probe")
    ax.legend(fontsize=8)
    _save(fig, path)


def render_harmonic(result, path) -> None:
    """Oscillation and defect histories on a log scale."""
    fig, ax = plt.subplots(figsize=(7, 4))
    its = np.arange(len(result.osc))
    positive = result.osc > 0
    ax.semilogy(its[positive], result.osc[positive], label="osc(L_k)")
    if len(result.defect):
        dpos = result.defect > 0
        ax.semilogy(np.arange(1, len(result.defect) + 1)[dpos], result.defect[dpos],
                    ls="--", label="defect")
    ax.set_xlabel("iteration")
    ax.set_ylabel("value")
    ax.set_title("transition-operator iteration")
    ax.legend(fontsize=8)
    _save(fig, path)


def render_semigroup(lambda_values, pairs, path) -> None:
    """Sampled log-eigenvalues and pairwise lattice-approximation errors."""
    fig, (ax_l, ax_p) = plt.subplots(1, 2, figsize=(9, 3.6))
    vals = sorted(lambda_values)
    if vals:
        ax_l.stem(vals, np.ones(len(vals)), basefmt=" ")
        ax_l.set_yticks([])
    else:
        ax_l.text(0.5, 0.5, "no positive products", ha="center", va="center")
    ax_l.set_xlabel("log Perron eigenvalue")
    ax_l.set_title("sampled eigenvalue set")
    if pairs:
        errors = [max(p.error, 1e-18) for p in pairs]
        ax_p.semilogy(np.arange(len(errors)), errors, "o", ms=4)
        ax_p.set_xlabel("pair index")
        ax_p.set_ylabel("|q r - p|")
        ax_p.set_title("best rational approximation error")
    else:
        ax_p.axis("off")
    _save(fig, path)
