"""Matplotlib rendering for trace and sweep outputs (written next to the CSVs)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def plot_trace(trace, path, title=""):
    """States, inputs and the Lyapunov channel of one simulated run."""
    fig, axes = plt.subplots(3, 1, sharex=True, figsize=(7, 7))
    n = trace.states.shape[1]
    m = trace.inputs.shape[1]
    for i in range(n):
        axes[0].plot(trace.times, trace.states[:, i],
                     label=rf"$\sigma_{{{i+1}}}$", lw=1.0)
    axes[0].axhline(0.0, color="k", lw=0.5)
    if trace.reach_time is not None:
        axes[0].axvline(trace.reach_time, color="gray", ls="--", lw=0.8,
                        label="reach")
    axes[0].set_ylabel("states")
    axes[0].legend(loc="upper right", fontsize=8)
    if title:
        axes[0].set_title(title)
    for j in range(m):
        axes[1].plot(trace.times, trace.inputs[:, j],
                     label=rf"$u_{{{j+1}}}$", lw=0.8)
    axes[1].set_ylabel("inputs")
    axes[1].legend(loc="upper right", fontsize=8)
    axes[2].plot(trace.times, trace.lyapunov, lw=1.0, color="C3")
    axes[2].set_ylabel("V / U")
    axes[2].set_xlabel("time [s]")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_sweep(params, bounds, statuses, path, log_x=False, ylabel="T bound [s]"):
    """Reaching-time bound against the swept parameter; infeasible points marked."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ok = [(p, b) for p, b, s in zip(params, bounds, statuses) if s == "ok"]
    bad = [p for p, s in zip(params, statuses) if s != "ok"]
    if ok:
        ax.plot([p for p, _ in ok], [b for _, b in ok], "o-", ms=3, lw=1.0)
    for p in bad:
        ax.axvline(p, color="r", ls=":", lw=0.8)
    if log_x:
        ax.set_xscale("log")
    ax.set_xlabel("parameter")
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
