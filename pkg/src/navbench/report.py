"""Result persistence: per-episode CSV rows, a JSON summary, cumulative
curve tables, and a static SVG rendering of the curves.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

from .episode import EpisodeResult
from .metrics import SuiteReport

RESULT_FIELDS = ("scenario_id", "agent", "success", "shortest_m",
                 "executed_m", "budget_frac", "steps", "reason")


def result_row(r: EpisodeResult) -> list[str]:
    return [
        r.scenario_id, r.agent, "1" if r.success else "0",
        repr(r.shortest), repr(r.executed), repr(r.budget_frac),
        str(r.steps_used), r.reason,
    ]


def write_results(results: list[EpisodeResult], path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(RESULT_FIELDS)
        for r in results:
            writer.writerow(result_row(r))


def write_summary(report: SuiteReport, path) -> None:
    Path(path).write_text(json.dumps(report.summary_dict(), indent=2) + "\n")


def write_curves(report: SuiteReport, path) -> None:
    """Cumulative-curve data table; empty subsets are marked 'NA', not 0."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(("metric", "L_m", "value"))
        for metric, points in report.curves.items():
            for L, value in points:
                writer.writerow((metric, repr(L),
                                 "NA" if value is None else repr(value)))


def write_trajectories(results: list[EpisodeResult], directory) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for r in results:
        if not r.trajectory:
            continue
        with open(directory / f"{r.scenario_id}.csv", "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(("x", "y", "heading", "action"))
            for pose, action in r.trajectory:
                writer.writerow((repr(pose.x), repr(pose.y),
                                 repr(pose.heading),
                                 action.value if action is not None else ""))


def plot_curves(reports: list[SuiteReport], path) -> None:
    """Static vector rendering of the cumulative curves, one panel per
    metric, one line per agent."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    metrics = ("sr", "spl", "pace")
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.5), sharey=True)
    for ax, metric in zip(axes, metrics):
        for report in reports:
            pts = [(L, v) for L, v in report.curves.get(metric, []) if v is not None]
            if not pts:
                continue
            xs, ys = zip(*pts)
            ax.plot(xs, [100.0 * y for y in ys], label=report.agent)
        ax.set_title(f"cumulative {metric.upper()}")
        ax.set_xlabel("shortest path < L [m]")
        ax.grid(True, alpha=0.3)
    axes[0].set_ylabel("%")
    axes[0].set_ylim(0, 105)
    axes[0].legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def write_report(report: SuiteReport, out_dir,
                 save_trajectories: bool = False) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tag = report.agent or "agent"
    write_results(report.results, out / f"results_{tag}.csv")
    write_summary(report, out / f"summary_{tag}.json")
    write_curves(report, out / f"curves_{tag}.csv")
    if save_trajectories:
        write_trajectories(report.results, out / f"trajectories_{tag}")
