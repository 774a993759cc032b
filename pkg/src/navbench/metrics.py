"""Aggregate evaluation metrics over episode results.

SR: fraction of successful episodes.
SPL: mean of S * l / max(l, p) — success weighted by the ratio of the
shortest path to the executed path.
Pace: mean unused fraction of the action budget; failed episodes count the
whole budget as used.
Cumulative curves restrict a metric to episodes whose shortest path is
below a threshold L.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .episode import EpisodeResult


def sr(results: list[EpisodeResult]) -> float:
    if not results:
        raise ValueError("sr of an empty result set")
    return sum(1.0 for r in results if r.success) / len(results)


def spl(results: list[EpisodeResult]) -> float:
    if not results:
        raise ValueError("spl of an empty result set")
    for r in results:
        if r.shortest <= 0.0:
            raise ValueError(f"{r.scenario_id}: non-positive shortest path")
    return sum(r.spl_term for r in results) / len(results)


def pace(results: list[EpisodeResult]) -> float:
    if not results:
        raise ValueError("pace of an empty result set")
    return sum(r.pace_term for r in results) / len(results)


_METRICS = {"sr": sr, "spl": spl, "pace": pace}


def cumulative(results: list[EpisodeResult], metric: str, L: float) -> float | None:
    """The metric restricted to episodes with shortest path < L; None marks
    an undefined (empty-subset) point."""
    subset = [r for r in results if r.shortest < L]
    if not subset:
        return None
    return _METRICS[metric](subset)


def curve_thresholds(results: list[EpisodeResult], n_points: int = 20) -> list[float]:
    """Threshold grid for cumulative curves, spanning the observed shortest
    paths with a little headroom."""
    if not results:
        return []
    lo = min(r.shortest for r in results)
    hi = max(r.shortest for r in results)
    step = max((hi - lo) / max(n_points - 1, 1), 1e-9)
    return [lo + step * (k + 1) for k in range(n_points)]


@dataclass
class SuiteReport:
    agent: str
    n_episodes: int
    sr: float
    spl: float
    pace: float
    results: list[EpisodeResult] = field(default_factory=list)
    curves: dict[str, list[tuple[float, float | None]]] = field(default_factory=dict)

    def summary_dict(self) -> dict:
        return {
            "agent": self.agent,
            "episodes": self.n_episodes,
            "sr": self.sr,
            "spl": self.spl,
            "pace": self.pace,
            "sr_pct": round(100.0 * self.sr, 2),
            "spl_pct": round(100.0 * self.spl, 2),
            "pace_pct": round(100.0 * self.pace, 2),
        }


def build_report(results: list[EpisodeResult], agent: str = "",
                 curve_points: int = 20) -> SuiteReport:
    thresholds = curve_thresholds(results, curve_points)
    curves = {
        m: [(L, cumulative(results, m, L)) for L in thresholds]
        for m in ("sr", "spl", "pace")
    }
    return SuiteReport(agent=agent or (results[0].agent if results else ""),
                       n_episodes=len(results), sr=sr(results),
                       spl=spl(results), pace=pace(results),
                       results=results, curves=curves)
