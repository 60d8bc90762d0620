"""Figures for the report path of the command line tool (PNG files)."""
from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.figsize": (6.4, 2.6),
    "savefig.dpi": 120,
}

# no timestamps or version strings: identical inputs give identical files
_META = {"Software": None}


def _save(fig, path: str) -> str:
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    plt.close(fig)
    return path


def plot_balancing(traj, path: str) -> str:
    with plt.rc_context(_STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2)
        ax1.semilogy(traj.times, traj.residuals, "k.-", lw=0.8, ms=3)
        ax1.set_xlabel("time")
        ax1.set_ylabel(r"$\|\mu^0\|$")
        f = [v - traj.functional_values[-1] for v in traj.functional_values]
        ax2.plot(traj.times, f, "k.-", lw=0.8, ms=3)
        ax2.set_xlabel("time")
        ax2.set_ylabel("functional (shifted)")
        return _save(fig, path)


def plot_jflow(traj, path: str) -> str:
    with plt.rc_context(_STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2)
        ax1.semilogy(traj.times, traj.residuals, "k-", lw=0.8)
        ax1.set_xlabel("time")
        ax1.set_ylabel("sup residual")
        ax2.plot(traj.times, traj.energies, "k-", lw=0.8)
        ax2.set_xlabel("time")
        ax2.set_ylabel("discrete energy")
        return _save(fig, path)


def plot_gap(ks: Sequence[int], gaps: Sequence[float], t: float, path: str) -> str:
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(3.4, 2.6))
        ax.loglog(ks, gaps, "ko-", lw=0.8, ms=4)
        ax.set_xlabel("k")
        ax.set_ylabel(f"gap at t={t:g}")
        return _save(fig, path)


def plot_slope(history: Sequence[float], times: Sequence[float], algebraic: float, path: str) -> str:
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(3.4, 2.6))
        ax.plot(times, history, "ko-", lw=0.8, ms=4, label="numeric")
        ax.axhline(algebraic, color="0.5", ls="--", lw=0.8, label="algebraic")
        ax.set_xlabel("t")
        ax.set_ylabel("slope")
        ax.legend(frameon=False)
        return _save(fig, path)
