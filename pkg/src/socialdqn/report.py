"""Rendering: metric curves, comparison bars, sweep heat maps, text tables.

Every chart is written as an SVG with a CSV of the plotted numbers next
to it, so figures stay regenerable and diffable. Charts asked of empty
series are omitted with a logged notice instead of producing an empty
frame. Shaded curve bands are 95% confidence half-widths; a one-trial
experiment renders a zero-width band.
"""

from __future__ import annotations

import csv
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

# keep SVG text as text so figures stay small, searchable, and diffable
plt.rcParams["svg.fonttype"] = "none"
plt.rcParams["svg.hashsalt"] = "socialdqn"

from .runner import load_summary
from .stats import format_mean_std

logger = logging.getLogger(__name__)

CURVE_METRICS = ("r_max", "r_mean", "conformity", "group_diversity",
                 "intra_alignment")
TABLE_METRICS = ("group_success", "t_first", "t_all", "t_spread",
                 "r_max_final", "r_mean_final")


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def load_aggregate(experiment_dir: Path) -> List[Tuple[str, str, int, int,
                                                       float, float, float]]:
    rows = []
    with open(Path(experiment_dir) / "aggregate.csv", newline="") as handle:
        for row in csv.DictReader(handle):
            rows.append((row["metric"], row["scope"], int(row["step"]),
                         int(row["n"]), float(row["mean"]), float(row["std"]),
                         float(row["ci_half"])))
    return rows


def _experiment_label(experiment_dir: Path) -> str:
    try:
        return load_summary(experiment_dir)["label"]
    except OSError:
        return Path(experiment_dir).name


def _series(aggregate, metric: str, scope: str):
    rows = sorted(r for r in aggregate if r[0] == metric and r[1] == scope)
    steps = np.array([r[2] for r in rows], dtype=np.int64)
    mean = np.array([r[4] for r in rows])
    ci = np.array([r[6] for r in rows])
    n = np.array([r[3] for r in rows], dtype=np.int64)
    return steps, mean, ci, n


def plot_metric_curves(experiment_dirs: Sequence[Path], metric: str,
                       out_path: Path, scope: str = "group") -> Optional[Path]:
    """Mean curve per experiment with a shaded 95% CI band.

    Returns the SVG path, or None when no experiment has any data for
    the metric (the omission is logged).
    """
    out_path = Path(out_path)
    series = []
    for directory in experiment_dirs:
        steps, mean, ci, n = _series(load_aggregate(directory), metric, scope)
        if steps.size:
            series.append((_experiment_label(directory), steps, mean, ci, n))
    if not series:
        logger.info("no %s/%s data in %s; chart omitted",
                    metric, scope, list(map(str, experiment_dirs)))
        return None
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, steps, mean, ci, _ in series:
        line, = ax.plot(steps, mean, marker="o", markersize=3, label=label)
        ax.fill_between(steps, mean - ci, mean + ci,
                        color=line.get_color(), alpha=0.2, linewidth=0)
    ax.set_xlabel("environment steps per agent")
    ax.set_ylabel(metric)
    ax.grid(alpha=0.3)
    if len(series) > 1 or series[0][0]:
        ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, format="svg")
    plt.close(fig)
    _write_csv(out_path.with_suffix(".csv"),
               ("label", "step", "n", "mean", "ci_half"),
               ((label, int(step), int(count), repr(float(m)), repr(float(c)))
                for label, steps, mean, ci, n in series
                for step, m, c, count in zip(steps, mean, ci, n)))
    return out_path


def plot_comparison_bars(comparison: dict, out_path: Path) -> Path:
    """One bar per experiment with std error bars and significance stars.

    Each significant pairwise comparison gets a bracket annotated with
    its star rating; non-significant pairs are left unmarked.
    """
    out_path = Path(out_path)
    labels = comparison["labels"]
    means = [comparison["groups"][label]["mean"] for label in labels]
    stds = [comparison["groups"][label]["std"] for label in labels]
    fig, ax = plt.subplots(figsize=(1.6 + 1.2 * len(labels), 4.5))
    positions = np.arange(len(labels))
    ax.bar(positions, means, yerr=stds, capsize=4,
           color="tab:blue", alpha=0.85)
    ax.set_xticks(positions)
    ax.set_xticklabels(labels, rotation=20, ha="right")
    ax.set_ylabel(comparison["metric"])
    ax.grid(axis="y", alpha=0.3)
    top = max((m + s for m, s in zip(means, stds)), default=1.0) or 1.0
    rung = top * 0.08
    height = top + rung
    index = {label: i for i, label in enumerate(labels)}
    for pair in comparison["pairwise"]:
        if not pair["significant"]:
            continue
        a, b = index[pair["a"]], index[pair["b"]]
        ax.plot([a, a, b, b],
                [height, height + rung / 2, height + rung / 2, height],
                color="black", linewidth=1)
        ax.text((a + b) / 2, height + rung / 2, pair["stars"],
                ha="center", va="bottom")
        height += rung * 1.6
    fig.tight_layout()
    fig.savefig(out_path, format="svg")
    plt.close(fig)
    _write_csv(out_path.with_suffix(".csv"),
               ("label", "mean", "std", "n"),
               ((label, repr(comparison["groups"][label]["mean"]),
                 repr(comparison["groups"][label]["std"]),
                 len(comparison["groups"][label]["values"]))
                for label in labels))
    return out_path


def plot_sweep_heatmap(sweep: dict, out_path: Path,
                       value: str = "group_success") -> Optional[Path]:
    """Grid of mean final values over (batch length x share probability)."""
    out_path = Path(out_path)
    lengths = sweep["batch_lengths"]
    probs = sweep["share_probs"]
    cells = {(c["batch_length"], c["share_prob"]): c["summary"]
             for c in sweep["cells"]}
    matrix = np.full((len(lengths), len(probs)), np.nan)
    for i, length in enumerate(lengths):
        for j, prob in enumerate(probs):
            summary = cells.get((length, prob))
            if summary and summary["final"]:
                matrix[i, j] = summary["final"][value]["mean"]
    if np.isnan(matrix).all():
        logger.info("sweep has no finished cells; heat map omitted")
        return None
    fig, ax = plt.subplots(figsize=(1.8 + 1.1 * len(probs),
                                    1.4 + 0.9 * len(lengths)))
    image = ax.imshow(matrix, cmap="viridis", aspect="auto",
                      vmin=0.0, vmax=max(1.0, np.nanmax(matrix)))
    ax.set_xticks(range(len(probs)), [f"{p:g}" for p in probs])
    ax.set_yticks(range(len(lengths)), [str(b) for b in lengths])
    ax.set_xlabel("share probability")
    ax.set_ylabel("shared batch length")
    for i in range(len(lengths)):
        for j in range(len(probs)):
            if not np.isnan(matrix[i, j]):
                ax.text(j, i, f"{matrix[i, j]:.2f}", ha="center", va="center",
                        color="white")
    fig.colorbar(image, ax=ax, label=value)
    fig.tight_layout()
    fig.savefig(out_path, format="svg")
    plt.close(fig)
    _write_csv(out_path.with_suffix(".csv"),
               ("batch_length", "share_prob", value),
               ((lengths[i], repr(float(probs[j])),
                 "" if np.isnan(matrix[i, j]) else repr(float(matrix[i, j])))
                for i in range(len(lengths)) for j in range(len(probs))))
    return out_path


def summary_table(summaries: Sequence[dict],
                  metrics: Sequence[str] = TABLE_METRICS) -> str:
    """Text table of final metrics, one (mean, std) cell per experiment."""
    labels = [s.get("label") or s["config_hash"] for s in summaries]
    width = max([len(m) for m in metrics] + [6])
    cell = max([len(label) for label in labels] + [14]) + 2
    lines = [" " * width + "".join(label.rjust(cell) for label in labels)]
    for metric in metrics:
        row = [metric.ljust(width)]
        for summary in summaries:
            stats = summary["final"].get(metric)
            if stats is None:
                row.append("-".rjust(cell))
            else:
                values = summary["per_trial"][metric]
                row.append(format_mean_std(np.mean(values),
                                           np.std(values, ddof=1)
                                           if len(values) > 1 else 0.0)
                           .rjust(cell))
        lines.append("".join(row))
    return "\n".join(lines) + "\n"


def write_report(experiment_dirs: Sequence[Path], out_dir: Path,
                 metrics: Sequence[str] = CURVE_METRICS) -> List[Path]:
    """Render curves and the summary table for finished experiments."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []
    for metric in metrics:
        path = plot_metric_curves(experiment_dirs, metric,
                                  out_dir / f"curve_{metric}.svg")
        if path is not None:
            written.append(path)
    summaries = [load_summary(d) for d in experiment_dirs]
    table = summary_table(summaries)
    table_path = out_dir / "summary_table.txt"
    table_path.write_text(table)
    written.append(table_path)
    return written
