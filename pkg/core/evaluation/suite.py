import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from loguru import logger

from config import settings
from core.codecs.registry import RAW_CODEC_ID, load_codec
from core.cql.bundle import load_bundle
from core.env.world import RelayEnv
from core.evaluation.metrics import MetricsReport, metrics, ttf_cdf
from core.evaluation.rollout import EpisodeTrace, run_episode, write_trace
from core.exceptions.config import ConfigurationError
from core.exceptions.formats import ArtifactMissing
from core.formats.binary import atomic_path
from schemas.evaluation import EvalConfig

METRIC_COLUMNS = (
    "avg_served",
    "peak_served",
    "normalized",
    "feas_full",
    "feas_partial",
    "feas_none",
    "ttf_median",
)
COMPARISON_FILE = "comparison.csv"
CDF_FILE = "ttf_cdf.csv"
GAPS_FILE = "gaps.csv"
ABLATION_FILE = "ablation.csv"


@dataclass(frozen=True)
class SuiteEntry:
    """One compared method: a policy (and optional codec) per training seed."""

    label: str
    policies: dict[int, Path]
    codecs: dict[int, Path] = field(default_factory=dict)
    codec_kind: str = RAW_CODEC_ID
    d_z: int | None = None

    def artifacts(self) -> list[Path]:
        return [Path(p) for p in self.policies.values()] + [Path(p) for p in self.codecs.values()]


@dataclass
class MethodResult:
    entry: SuiteEntry
    reports: dict[int, MetricsReport]

    def values(self, column: str) -> np.ndarray:
        return np.array([_metric_value(report, column) for report in self.reports.values()])

    @property
    def time_to_feasible(self) -> list[int]:
        return [ttf for report in self.reports.values() for ttf in report.time_to_feasible]

    @property
    def gap_histogram(self) -> dict[int, int]:
        pooled: dict[int, int] = {}
        for report in self.reports.values():
            for gap, count in report.gap_histogram.items():
                pooled[gap] = pooled.get(gap, 0) + count
        return dict(sorted(pooled.items()))


def _metric_value(report: MetricsReport, column: str) -> float:
    if column == "normalized":
        return report.normalized_discounted
    return float(getattr(report, column))


def _fmt(value: float) -> str:
    return repr(float(value))


def check_artifacts(entries: list[SuiteEntry]) -> None:
    for entry in entries:
        for path in entry.artifacts():
            if not path.is_file():
                raise ArtifactMissing(f"{entry.label}: artifact not found: {path}")


def evaluate_seed(
    env: RelayEnv,
    entry: SuiteEntry,
    seed: int,
    eval_cfg: EvalConfig,
    trace_dir: Path | None,
) -> MetricsReport:
    bundle = load_bundle(entry.policies[seed])
    codec, codec_id = (None, RAW_CODEC_ID)
    if seed in entry.codecs:
        codec, codec_id = load_codec(entry.codecs[seed])
    if bundle.codec_id != codec_id:
        raise ConfigurationError(
            f"{entry.label} seed {seed}: policy was trained on codec {bundle.codec_id!r} but {codec_id!r} was given"
        )

    episode_seeds = [eval_cfg.episode_seed_base + k for k in range(eval_cfg.episodes)]
    with ThreadPoolExecutor(max_workers=settings.THREADS) as pool:
        traces: list[EpisodeTrace] = list(
            pool.map(lambda s: run_episode(env, bundle, codec, s, policy_id=entry.label), episode_seeds)
        )

    if trace_dir is not None:
        for k, trace in enumerate(traces):
            write_trace(trace_dir / entry.label / f"seed{seed}" / f"ep{k}.csv", trace)

    report = metrics(traces, eval_cfg.gamma)
    logger.info(
        f"{entry.label} seed {seed}: normalized {report.normalized_discounted:.4f}, "
        f"avg_served {report.avg_served:.4f}, ttf_median {report.ttf_median}"
    )
    return report


def _write_csv(path: Path, header: list[str] | tuple[str, ...], rows: list[list]) -> None:
    with atomic_path(path) as tmp:
        with open(tmp, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)


def write_suite_outputs(results: list[MethodResult], horizon: int, out_dir: Path) -> None:
    for result in results:
        rows = [
            [seed] + [_fmt(_metric_value(report, column)) for column in METRIC_COLUMNS]
            for seed, report in result.reports.items()
        ]
        _write_csv(out_dir / "metrics" / f"{result.entry.label}.csv", ["seed", *METRIC_COLUMNS], rows)

    comparison = []
    for result in results:
        means = [_fmt(result.values(column).mean()) for column in METRIC_COLUMNS]
        stds = [_fmt(result.values(column).std()) for column in METRIC_COLUMNS]
        comparison.append([result.entry.label, *means, *stds])
    _write_csv(
        out_dir / COMPARISON_FILE,
        ["method", *METRIC_COLUMNS, *(f"{column}_std" for column in METRIC_COLUMNS)],
        comparison,
    )

    cdf_rows = []
    for result in results:
        for t, fraction in enumerate(ttf_cdf(result.time_to_feasible, horizon)):
            cdf_rows.append([result.entry.label, t, _fmt(fraction)])
    _write_csv(out_dir / CDF_FILE, ["method", "t", "fraction"], cdf_rows)

    gap_rows = [
        [result.entry.label, gap, count]
        for result in results
        for gap, count in result.gap_histogram.items()
    ]
    _write_csv(out_dir / GAPS_FILE, ["method", "gap", "count"], gap_rows)

    ablation = [
        [
            result.entry.label,
            result.entry.codec_kind,
            "" if result.entry.d_z is None else result.entry.d_z,
            _fmt(result.values("normalized").mean()),
            _fmt(result.values("avg_served").mean()),
            _fmt(result.values("ttf_median").mean()),
        ]
        for result in results
    ]
    _write_csv(
        out_dir / ABLATION_FILE,
        ["method", "codec", "d_z", "normalized", "avg_served", "ttf_median"],
        ablation,
    )


def evaluate_suite(
    env: RelayEnv,
    entries: list[SuiteEntry],
    eval_cfg: EvalConfig,
    out_dir: str | Path,
) -> list[MethodResult]:
    """Evaluate every method on the same episode seeds and export the tables.

    All artifacts are checked before any rollout starts.
    """
    out_dir = Path(out_dir)
    check_artifacts(entries)
    trace_dir = out_dir / "traces" if eval_cfg.write_traces else None

    results = []
    for entry in entries:
        reports = {
            seed: evaluate_seed(env, entry, seed, eval_cfg, trace_dir)
            for seed in sorted(entry.policies)
        }
        results.append(MethodResult(entry=entry, reports=reports))

    write_suite_outputs(results, env.cfg.episode_len, out_dir)
    logger.info(f"Evaluation tables written to {out_dir}")
    return results
