"""Static matplotlib figures written next to the delimited outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .bank import ACTION_LABELS, BankRunResult
from .dynamics import Trajectory, _stable_p
from .sweep import VerificationReport


def plot_trajectory(traj: Trajectory, path: Path) -> None:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 3.6))
    p11 = np.array([_stable_p(u)[0] for u in traj.u1])
    p21 = np.array([_stable_p(u)[0] for u in traj.u2])
    ax1.plot(traj.t, p11, label="player 1: P(theta1)")
    ax1.plot(traj.t, p21, label="player 2: P(theta1)", linestyle="--")
    ax1.set_xlabel("t")
    ax1.set_ylabel("probability")
    ax1.set_ylim(-0.02, 1.02)
    ax1.legend(fontsize=8)
    ax2.plot(traj.t, traj.u1, label="u1")
    ax2.plot(traj.t, traj.u2, label="u2", linestyle="--")
    ax2.set_xlabel("t")
    ax2.set_ylabel("log-ratio u")
    ax2.legend(fontsize=8)
    e1, e2 = traj.game.eps()
    fig.suptitle(f"gaps=({e1:.4g}, {e2:.4g})  eta={traj.eta:g}  verdict={traj.verdict}")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def plot_oscillation(traj: Trajectory, path: Path, tail: int = 60) -> None:
    fig, ax = plt.subplots(figsize=(6.5, 3.4))
    t = traj.t[-tail:]
    ax.plot(t, traj.u1[-tail:], marker="o", markersize=3, label="u1")
    ax.plot(t, traj.u2[-tail:], marker="s", markersize=3, linestyle="--", label="u2")
    ax.set_xlabel("t")
    ax.set_ylabel("log-ratio u")
    ax.legend(fontsize=8)
    fig.suptitle(f"eta={traj.eta:g}  verdict={traj.verdict}")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def plot_bank_run(result: BankRunResult, path: Path) -> None:
    fig, axes = plt.subplots(1, 2, figsize=(10.5, 3.8), sharey=True)
    for ax, weights, name in ((axes[0], result.weights1, "bank 1"), (axes[1], result.weights2, "bank 2")):
        for k in range(4):
            ax.plot(result.t, weights[:, k], label=ACTION_LABELS[k])
        ax.set_xlabel("t")
        ax.set_title(name)
        ax.set_yscale("log")
        ax.set_ylim(1e-14, 2.0)
    axes[0].set_ylabel("action weight")
    axes[0].legend(fontsize=7)
    e1, e2 = result.reduced_game.eps()
    fig.suptitle(f"reduced gaps=({e1:.4g}, {e2:.4g})  eta={result.eta:g}")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def plot_report(report: VerificationReport, path: Path) -> None:
    rows = sorted(report.by_row)
    cats = ("Match", "SetMatch", "Pending", "Mismatch")
    colors = ("#2a9d8f", "#8ab17d", "#e9c46a", "#e76f51")
    fig, ax = plt.subplots(figsize=(7, 3.4))
    bottom = np.zeros(len(rows))
    for cat, color in zip(cats, colors):
        vals = np.array([report.by_row[r].get(cat, 0) for r in rows], dtype=float)
        ax.bar(rows, vals, bottom=bottom, label=cat, color=color)
        bottom += vals
    ax.set_ylabel("runs")
    ax.set_xlabel("predicted row")
    ax.legend(fontsize=8)
    fig.suptitle(f"{report.total} runs, seed {report.config.seed}")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
