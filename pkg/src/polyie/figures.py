"""Matplotlib rendering of report figures, written next to the data files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .dataset import LengthHistogram


def plot_length_histogram(hist: LengthHistogram, path, title: str = "Prompt length distribution") -> None:
    """Bar chart of the length-interval proportions."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    if hist.buckets:
        labels = [f"{lo}-{hi - 1}" for (lo, hi), _, _ in hist.buckets]
        props = [p for _, _, p in hist.buckets]
        ax.bar(range(len(props)), props, color="#4878a8")
        ax.set_xticks(range(len(labels)))
        ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=8)
    ax.set_xlabel("Length interval")
    ax.set_ylabel("Proportion of samples")
    ax.set_title(f"{title} (avg {hist.average:.1f})")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_score_report(report: dict, path) -> None:
    """Bar chart of per-dialect and ensemble Micro-F1 from a score report."""
    names = []
    values = []
    for dialect, scores in report.get("per_dialect", {}).items():
        names.append(dialect)
        values.append(scores["f1"])
    for key, label in (("voting", "Voting"), ("union", "Union"), ("oracle_recall", "Oracle")):
        if key in report:
            names.append(label)
            values.append(report[key]["f1"])
    fig, ax = plt.subplots(figsize=(7, 4))
    colors = ["#4878a8"] * 3 + ["#b0543f", "#6a994e", "#9a6fb0"]
    ax.bar(names, values, color=colors[: len(names)])
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("Micro-F1")
    ax.set_title("Per-dialect and ensemble Micro-F1")
    for i, v in enumerate(values):
        ax.text(i, v + 0.01, f"{v:.3f}", ha="center", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
