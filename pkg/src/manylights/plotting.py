"""Matplotlib figures for comparison reports and VPL layouts (written to files, never shown)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .metrics import ComparisonReport  # noqa: E402
from .sampling.vpl import TAGS, VplSet  # noqa: E402
from .scene import Scene  # noqa: E402

TAG_COLORS = {"patch_close": "tab:orange", "ir_distant": "tab:blue", "ir_baseline": "tab:green",
              "rejection": "tab:purple", "metropolis": "tab:red"}


def plot_comparison(report: ComparisonReport, path) -> None:
    """Bar chart of per-strategy means with sample standard deviations as error bars."""
    summ = report.summary()
    names = list(summ)
    x = np.arange(len(names))
    if report.mode == "equal_samples":
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.bar(x, [summ[n]["rmse_mean"] for n in names], yerr=[summ[n]["rmse_std"] for n in names],
               capsize=4, color="tab:gray")
        ax.set_ylabel("RMSE (linear)")
        budget = report.rows[0].vpl_count if report.rows else 0
        ax.set_title(f"equal samples, M = {budget}")
    else:
        fig, (ax, ax2) = plt.subplots(1, 2, figsize=(9, 4))
        ax.bar(x, [summ[n]["vpl_mean"] for n in names], yerr=[summ[n]["vpl_std"] for n in names],
               capsize=4, color="tab:gray")
        ax.set_ylabel("VPLs needed")
        ax.set_title(f"equal RMSE, target {report.target_rmse:.4g}")
        ax2.bar(x, [summ[n]["time_mean"] for n in names], color="tab:gray")
        ax2.set_ylabel("wall time (s)")
        ax2.set_xticks(x, names, rotation=20)
    ax.set_xticks(x, names, rotation=20)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_vpls(scene: Scene, vpls: VplSet, path, title: str | None = None) -> None:
    """Top (x-z) and side (x-y) views of VPL positions coloured by origin, camera marked."""
    lo, hi = scene.bounds
    fig, axes = plt.subplots(1, 2, figsize=(10, 5))
    for ax, (i, j), label in zip(axes, [(0, 2), (0, 1)], ["top view (x, z)", "side view (x, y)"]):
        for tag in TAGS:
            sel = vpls.tag == TAGS.index(tag)
            if sel.any():
                ax.scatter(vpls.position[sel, i], vpls.position[sel, j], s=3, c=TAG_COLORS[tag], label=tag)
        c = scene.camera.position
        ax.plot(c[i], c[j], marker="^", color="black", ms=8, label="camera")
        for light in scene.lights:
            ax.plot(light.position[i], light.position[j], marker="*", color="gold", ms=12, mec="black")
        ax.set_xlim(lo[i], hi[i])
        ax.set_ylim(lo[j], hi[j])
        ax.set_aspect("equal")
        ax.set_title(label)
    axes[0].legend(loc="upper right", fontsize=7, markerscale=3)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
