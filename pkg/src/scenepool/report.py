"""Report rendering: JSON, aligned text tables, delimited files, figures."""

from __future__ import annotations

import json
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evaluation import EvaluationReport, TrialCurve

_PNG_META = {"Software": "scenepool"}


def report_to_dict(report: EvaluationReport) -> dict:
    return {
        "classes": list(report.label_space.classes),
        "confusion": report.confusion.tolist(),
        "overall_accuracy": report.overall_accuracy,
        "per_class_accuracy": report.per_class_accuracy,
        "config": report.config,
    }


def format_report_text(report: EvaluationReport) -> str:
    """Aligned per-class accuracy table followed by the confusion matrix."""
    names = report.label_space.classes
    width = max(len(n) for n in names + ("Overall",)) + 2
    lines = ["Per-class accuracy", "-" * (width + 8)]
    for name, acc in report.per_class_accuracy.items():
        lines.append(f"{name:<{width}}{acc:7.2f}")
    lines.append("-" * (width + 8))
    lines.append(f"{'Overall':<{width}}{report.overall_accuracy:7.2f}")
    lines.append("")
    lines.append("Confusion matrix (rows: true, cols: predicted)")
    cell = max(5, max(len(n) for n in names) + 1)
    header = " " * width + "".join(f"{n[:cell-1]:>{cell}}" for n in names)
    lines.append(header)
    for i, name in enumerate(names):
        row = "".join(f"{int(v):>{cell}}" for v in report.confusion[i])
        lines.append(f"{name:<{width}}{row}")
    return "\n".join(lines) + "\n"


def write_confusion_csv(report: EvaluationReport, path: str | os.PathLike) -> None:
    names = report.label_space.classes
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("true\\predicted," + ",".join(names) + "\n")
        for i, name in enumerate(names):
            fh.write(name + "," + ",".join(str(int(v)) for v in report.confusion[i]) + "\n")


def plot_confusion(report: EvaluationReport, path: str | os.PathLike) -> None:
    names = report.label_space.classes
    conf = report.confusion
    fig, ax = plt.subplots(figsize=(max(4.0, 0.6 * len(names) + 2), max(3.5, 0.6 * len(names) + 1.5)))
    im = ax.imshow(conf, cmap="Blues")
    ax.set_xticks(range(len(names)), names, rotation=45, ha="right")
    ax.set_yticks(range(len(names)), names)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    threshold = conf.max() / 2 if conf.max() > 0 else 0.5
    for i in range(len(names)):
        for j in range(len(names)):
            ax.text(
                j,
                i,
                str(int(conf[i, j])),
                ha="center",
                va="center",
                fontsize=8,
                color="white" if conf[i, j] > threshold else "black",
            )
    fig.colorbar(im, ax=ax, shrink=0.8)
    ax.set_title(f"overall accuracy {report.overall_accuracy:.2f}%")
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_PNG_META)
    plt.close(fig)


def write_report_files(report: EvaluationReport, prefix: str | os.PathLike) -> list[str]:
    """Write ``<prefix>.json``, ``.txt``, ``_confusion.csv`` and ``_confusion.png``."""
    prefix = os.fspath(prefix)
    parent = os.path.dirname(prefix)
    if parent:
        os.makedirs(parent, exist_ok=True)
    paths = []
    with open(prefix + ".json", "w", encoding="utf-8") as fh:
        json.dump(report_to_dict(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths.append(prefix + ".json")
    with open(prefix + ".txt", "w", encoding="utf-8") as fh:
        fh.write(format_report_text(report))
    paths.append(prefix + ".txt")
    write_confusion_csv(report, prefix + "_confusion.csv")
    paths.append(prefix + "_confusion.csv")
    plot_confusion(report, prefix + "_confusion.png")
    paths.append(prefix + "_confusion.png")
    return paths


def curve_to_dict(curve: TrialCurve) -> dict:
    return {
        "n_values": list(curve.n_values),
        "mean": curve.mean.tolist(),
        "min": curve.min.tolist(),
        "max": curve.max.tolist(),
        "std": curve.std.tolist(),
        "trials": curve.trials,
        "base_seed": curve.base_seed,
    }


def write_curve_csv(curve: TrialCurve, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("n,mean,min,max,std\n")
        for i, n in enumerate(curve.n_values):
            cells = (curve.mean[i], curve.min[i], curve.max[i], curve.std[i])
            fh.write(str(n) + "," + ",".join(repr(float(v)) for v in cells) + "\n")


def plot_curve(curve: TrialCurve, path: str | os.PathLike) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    n = np.asarray(curve.n_values)
    ax.fill_between(n, curve.min, curve.max, alpha=0.25, label="min-max over trials")
    ax.plot(n, curve.mean, marker="o", label="mean accuracy")
    ax.set_xlabel("frames per video")
    ax.set_ylabel("accuracy (%)")
    ax.set_title(f"accuracy vs frame count ({curve.trials} trials)")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_PNG_META)
    plt.close(fig)


def write_curve_files(curve: TrialCurve, prefix: str | os.PathLike) -> list[str]:
    """Write ``<prefix>.csv``, ``.json`` and ``.png`` for a trial curve."""
    prefix = os.fspath(prefix)
    parent = os.path.dirname(prefix)
    if parent:
        os.makedirs(parent, exist_ok=True)
    write_curve_csv(curve, prefix + ".csv")
    with open(prefix + ".json", "w", encoding="utf-8") as fh:
        json.dump(curve_to_dict(curve), fh, indent=2, sort_keys=True)
        fh.write("\n")
    plot_curve(curve, prefix + ".png")
    return [prefix + ".csv", prefix + ".json", prefix + ".png"]
