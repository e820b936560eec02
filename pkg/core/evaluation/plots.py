"""SVG figures from the evaluation tables.

Every input table is parsed and every figure rendered in memory before the
first file is written, so a failure leaves no partial output behind.
"""

import csv
import io
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "relayscope"

import numpy as np
from loguru import logger
from matplotlib.figure import Figure

from core.evaluation.suite import CDF_FILE, COMPARISON_FILE, GAPS_FILE
from core.exceptions.formats import ArtifactMissing, ParseError
from core.formats.binary import atomic_path

SVG_METADATA = {"Date": None, "Creator": "relayscope"}


def read_table(path: Path, columns: dict[str, type], allow_empty: bool = False) -> list[dict]:
    """Rows of a CSV with the given typed columns; extra columns are ignored."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [name for name in columns if name not in (reader.fieldnames or [])]
        if missing:
            raise ParseError(f"{path}: missing columns {', '.join(missing)}", line=1)
        for row in reader:
            try:
                rows.append({name: cast(row[name]) for name, cast in columns.items()})
            except (TypeError, ValueError) as e:
                raise ParseError(f"{path}: {e}", line=reader.line_num)
    if not rows and not allow_empty:
        raise ParseError(f"{path}: table has no rows", line=1)
    return rows


def _render(fig: Figure) -> bytes:
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata=SVG_METADATA)
    return buf.getvalue()


def service_figure(rows: list[dict]) -> bytes:
    methods = [row["method"] for row in rows]
    series = [("avg_served", "avg served"), ("peak_served", "peak served"), ("normalized", "normalized")]
    x = np.arange(len(methods))
    width = 0.8 / len(series)

    fig = Figure(figsize=(max(6.0, 1.6 * len(methods)), 4.0))
    ax = fig.subplots()
    for k, (column, label) in enumerate(series):
        bars = ax.bar(x + (k - 1) * width, [row[column] for row in rows], width, label=label)
        ax.bar_label(bars, fmt="%.3f", fontsize=7)
    ax.set_xticks(x, methods)
    ax.set_ylabel("users / score")
    ax.set_title("Relay service per method")
    ax.legend()
    fig.tight_layout()
    return _render(fig)


def feasibility_figure(rows: list[dict]) -> bytes:
    methods = [row["method"] for row in rows]
    fig = Figure(figsize=(max(6.0, 1.2 * len(methods)), 4.0))
    ax = fig.subplots()
    bottom = np.zeros(len(methods))
    for column, label in (("feas_full", "full"), ("feas_partial", "partial"), ("feas_none", "none")):
        values = np.array([row[column] for row in rows])
        bars = ax.bar(methods, values, bottom=bottom, label=label)
        ax.bar_label(bars, fmt="%.3f", label_type="center", fontsize=7)
        bottom += values
    ax.set_ylim(0.0, 1.0)
    ax.set_ylabel("fraction of steps")
    ax.set_title("Feasibility regime")
    ax.legend()
    fig.tight_layout()
    return _render(fig)


def cdf_figure(rows: list[dict]) -> bytes:
    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.subplots()
    for method in dict.fromkeys(row["method"] for row in rows):
        points = [(row["t"], row["fraction"]) for row in rows if row["method"] == method]
        t, fraction = zip(*points)
        ax.step(t, fraction, where="post", label=f"{method} ({fraction[-1]:.3f})")
    ax.set_xlabel("time to feasible service (steps)")
    ax.set_ylabel("fraction of episodes")
    ax.set_ylim(0.0, 1.05)
    ax.set_title("Time-to-feasible CDF")
    ax.legend()
    fig.tight_layout()
    return _render(fig)


def gap_figure(rows: list[dict]) -> bytes:
    methods = list(dict.fromkeys(row["method"] for row in rows))
    gaps = sorted({row["gap"] for row in rows})
    x = np.arange(len(gaps))
    width = 0.8 / len(methods)

    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.subplots()
    for k, method in enumerate(methods):
        counts = {row["gap"]: row["count"] for row in rows if row["method"] == method}
        total = sum(counts.values()) or 1
        bars = ax.bar(x + k * width, [counts.get(gap, 0) / total for gap in gaps], width, label=method)
        ax.bar_label(bars, fmt="%.2f", fontsize=6)
    ax.set_xticks(x + width * (len(methods) - 1) / 2, [str(gap) for gap in gaps])
    ax.set_xlabel("bound minus served users")
    ax.set_ylabel("fraction of feasible steps")
    ax.set_title("Optimality gap")
    ax.legend()
    fig.tight_layout()
    return _render(fig)


def plot(metrics_dir: str | Path, out_dir: str | Path) -> list[Path]:
    metrics_dir, out_dir = Path(metrics_dir), Path(out_dir)
    comparison_path = metrics_dir / COMPARISON_FILE
    cdf_path = metrics_dir / CDF_FILE
    for path in (comparison_path, cdf_path):
        if not path.is_file():
            raise ArtifactMissing(f"metrics table not found: {path}")

    comparison = read_table(
        comparison_path,
        {"method": str, "avg_served": float, "peak_served": float, "normalized": float,
         "feas_full": float, "feas_partial": float, "feas_none": float},
    )
    cdf = read_table(cdf_path, {"method": str, "t": int, "fraction": float})

    figures = {
        "service.svg": service_figure(comparison),
        "feasibility.svg": feasibility_figure(comparison),
        "ttf_cdf.svg": cdf_figure(cdf),
    }
    gaps_path = metrics_dir / GAPS_FILE
    if gaps_path.is_file():
        gaps = read_table(gaps_path, {"method": str, "gap": int, "count": int}, allow_empty=True)
        if gaps:
            figures["gaps.svg"] = gap_figure(gaps)

    written = []
    for name, payload in figures.items():
        with atomic_path(out_dir / name) as tmp:
            tmp.write_bytes(payload)
        written.append(out_dir / name)
    logger.info(f"Wrote {len(written)} figures to {out_dir}")
    return written
