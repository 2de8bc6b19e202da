"""Render standard report figures from a scenario trace to image files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .simulate import ScenarioTrace


def _per_resource_axes(n: int, title: str):
    fig, axes = plt.subplots(n, 1, figsize=(8, 2.6 * n), sharex=True, squeeze=False)
    fig.suptitle(title)
    return fig, axes[:, 0]


def render_figures(
    trace: ScenarioTrace,
    out_dir: str | Path,
    stem: str = "trace",
    optimum: np.ndarray | None = None,
) -> list[Path]:
    """Write tracking, error, running-mean, and temperature figures as PNGs.

    Returns the list of files written.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    n = len(trace.resource_ids)
    k = trace.k
    written: list[Path] = []

    fig, axes = _per_resource_axes(n, "Requested vs implemented real power")
    for i, (rid, ax) in enumerate(zip(trace.resource_ids, axes)):
        ax.step(k, trace.req[:, i, 0], where="post", label="requested", lw=0.8)
        ax.step(k, trace.imp[:, i, 0], where="post", label="implemented", lw=0.8, alpha=0.8)
        ax.set_ylabel(f"{rid} [W]")
        ax.legend(loc="best", fontsize=8)
    axes[-1].set_xlabel("step")
    path = out_dir / f"{stem}_tracking.png"
    fig.savefig(path, dpi=130)
    plt.close(fig)
    written.append(path)

    fig, axes = _per_resource_axes(n, "Accumulated error")
    for i, (rid, ax) in enumerate(zip(trace.resource_ids, axes)):
        ax.plot(k, trace.err[:, i, 0], lw=0.9, label="e_P")
        if np.abs(trace.err[:, i, 1]).max(initial=0.0) > 0:
            ax.plot(k, trace.err[:, i, 1], lw=0.9, label="e_Q")
        ax.set_ylabel(f"{rid} [W]")
        ax.legend(loc="best", fontsize=8)
    axes[-1].set_xlabel("step")
    path = out_dir / f"{stem}_error.png"
    fig.savefig(path, dpi=130)
    plt.close(fig)
    written.append(path)

    fig, axes = _per_resource_axes(n, "Running mean of implemented real power")
    for i, (rid, ax) in enumerate(zip(trace.resource_ids, axes)):
        ax.plot(k, trace.running_mean[:, 2 * i], lw=1.0, label="mean implemented")
        if optimum is not None:
            ax.axhline(optimum[2 * i], color="k", ls="--", lw=0.8, label="target")
        ax.set_ylabel(f"{rid} [W]")
        ax.legend(loc="best", fontsize=8)
    axes[-1].set_xlabel("step")
    path = out_dir / f"{stem}_running_mean.png"
    fig.savefig(path, dpi=130)
    plt.close(fig)
    written.append(path)

    if trace.room_ids:
        fig, ax = plt.subplots(figsize=(8, 3))
        for c, room in enumerate(trace.room_ids):
            ax.plot(k, trace.temps[:, c], lw=0.9, label=room)
        ax.set_xlabel("step")
        ax.set_ylabel("temperature [degC]")
        ax.legend(loc="best", fontsize=8)
        fig.suptitle("Room temperatures")
        path = out_dir / f"{stem}_temperature.png"
        fig.savefig(path, dpi=130)
        plt.close(fig)
        written.append(path)

    return written
