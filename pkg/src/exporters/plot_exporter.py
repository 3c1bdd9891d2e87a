"""Static PNG figures: metric bar charts and qualitative comparison panels."""

from pathlib import Path
from typing import Any, Dict, List, Mapping

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from src.metrics.report import METRICS  # noqa: E402

METRIC_LABELS = {"psnr": "PSNR (dB)", "ssim": "SSIM", "nrmse": "NRMSE"}


class PlotExporter:
    def __init__(self, dpi: int = 120):
        self.dpi = dpi

    def metric_bars(self, rows: List[Dict[str, Any]], output_path: Path, label_key: str, title: str = "") -> Path:
        """
        One panel per metric, one bar per row with a std error bar. Rows carry
        ``<metric>_mean`` and ``<metric>_std`` keys.
        """
        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        labels = [str(row[label_key]) for row in rows]
        positions = np.arange(len(rows))

        fig, axes = plt.subplots(1, len(METRICS), figsize=(4 * len(METRICS), 3.5))
        for ax, metric in zip(axes, METRICS):
            means = [row[f"{metric}_mean"] for row in rows]
            stds = [row[f"{metric}_std"] for row in rows]
            ax.bar(positions, means, yerr=stds, capsize=4, color="#4C72B0")
            ax.set_xticks(positions)
            ax.set_xticklabels(labels, rotation=30, ha="right")
            ax.set_title(METRIC_LABELS[metric])
        if title:
            fig.suptitle(title)
        fig.tight_layout()
        fig.savefig(output_path, dpi=self.dpi)
        plt.close(fig)
        return output_path

    def comparison_panel(self, images: Mapping[str, np.ndarray], output_path: Path, title: str = "") -> Path:
        """Side-by-side grayscale images in [0, 1], one column per entry."""
        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        fig, axes = plt.subplots(1, len(images), figsize=(2.5 * len(images), 2.8), squeeze=False)
        for ax, (name, image) in zip(axes[0], images.items()):
            ax.imshow(np.asarray(image), cmap="gray", vmin=0.0, vmax=1.0)
            ax.set_title(name, fontsize=9)
            ax.axis("off")
        if title:
            fig.suptitle(title, fontsize=10)
        fig.tight_layout()
        fig.savefig(output_path, dpi=self.dpi)
        plt.close(fig)
        return output_path
