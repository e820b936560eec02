"""Feasibility-aware evaluation metrics over episode traces.

Steps with a zero bound are infeasible: they add nothing to the normalized
score's denominator and are left out of the gap histogram.
"""

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from core.evaluation.rollout import EpisodeTrace
from core.exceptions.domain import DomainError


@dataclass(frozen=True)
class MetricsReport:
    episodes: int
    horizon: int
    avg_served: float
    peak_served: float
    normalized_discounted: float
    feas_full: float
    feas_partial: float
    feas_none: float
    gap_histogram: dict[int, int] = field(default_factory=dict)
    time_to_feasible: list[int] = field(default_factory=list)

    @property
    def ttf_median(self) -> float:
        return float(np.median(self.time_to_feasible))


def normalized_discounted(trace: EpisodeTrace, gamma: float) -> float:
    discounts = gamma ** np.arange(trace.horizon, dtype=np.float64)
    feasible = discounts[trace.n_star > 0].sum()
    if feasible == 0:
        return 0.0
    return float((discounts * trace.reward).sum() / feasible)


def time_to_feasible(trace: EpisodeTrace) -> int:
    hits = np.flatnonzero((trace.n_star > 0) & (trace.n_served >= trace.n_star))
    return int(hits[0]) if len(hits) else trace.horizon


def metrics(traces: list[EpisodeTrace], gamma: float = 0.99) -> MetricsReport:
    if not traces:
        raise DomainError("metrics need at least one episode trace")
    horizon = traces[0].horizon
    if horizon == 0 or any(trace.horizon != horizon for trace in traces):
        raise DomainError(f"episode traces must share one non-zero length, got {sorted({t.horizon for t in traces})}")

    n_star = np.concatenate([trace.n_star for trace in traces])
    n_served = np.concatenate([trace.n_served for trace in traces])
    users = np.concatenate([np.full(trace.horizon, trace.num_users) for trace in traces])

    total = len(n_star)
    full = int(np.count_nonzero(n_star == users))
    none = int(np.count_nonzero(n_star == 0))
    partial = total - full - none

    feasible = n_star > 0
    gaps = Counter((n_star[feasible] - n_served[feasible]).tolist())

    return MetricsReport(
        episodes=len(traces),
        horizon=horizon,
        avg_served=float(np.mean([trace.n_served.mean() for trace in traces])),
        peak_served=float(np.mean([trace.n_served.max() for trace in traces])),
        normalized_discounted=float(np.mean([normalized_discounted(trace, gamma) for trace in traces])),
        feas_full=full / total,
        feas_partial=partial / total,
        feas_none=none / total,
        gap_histogram=dict(sorted(gaps.items())),
        time_to_feasible=[time_to_feasible(trace) for trace in traces],
    )


def ttf_cdf(time_to_feasible: list[int], horizon: int) -> np.ndarray:
    """Fraction of episodes feasible by step t, for t = 0..horizon; censored at horizon."""
    ttf = np.asarray(time_to_feasible)
    return np.array([np.count_nonzero(ttf <= t) / len(ttf) for t in range(horizon + 1)])
