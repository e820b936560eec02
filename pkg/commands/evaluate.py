import argparse
from pathlib import Path

import numpy as np

from commands.common import add_config_argument, build_env, load_config, print_summary, run_stage
from core.codecs.registry import load_codec
from core.cql.bundle import load_bundle
from core.dataset.policies import BEHAVIORS
from core.evaluation.plots import plot
from core.evaluation.rollout import bundle_controller
from core.evaluation.suite import COMPARISON_FILE, SuiteEntry, evaluate_suite
from core.feasibility.trace import feasibility_trace, write_feasibility_csv
from core.terrain.io import load_map
from schemas.dataset import BEHAVIOR_POLICIES


def single_entry(policy: Path, codec: Path | None, label: str) -> SuiteEntry:
    if codec is None:
        return SuiteEntry(label=label, policies={0: policy})
    loaded, _ = load_codec(codec)
    return SuiteEntry(
        label=label,
        policies={0: policy},
        codecs={0: codec},
        codec_kind=loaded.kind.value,
        d_z=loaded.d_z,
    )


def eval_policy(args: argparse.Namespace) -> None:
    cfg = load_config(args)
    label = args.label or args.policy.stem
    entry = single_entry(args.policy, args.codec, label)
    results = []

    def build() -> list[Path]:
        env = build_env(load_map(args.map), cfg)
        results.extend(evaluate_suite(env, [entry], cfg.eval, args.out))
        return [args.out / COMPARISON_FILE]

    inputs = [args.config, args.map, *entry.artifacts()]
    run_stage("eval", args.out, inputs, cfg.eval.model_dump(mode="json"), build, resume=False)
    report = results[0].reports[0]
    print_summary(
        f"eval: {label} over {report.episodes} episodes -> {args.out} "
        f"(normalized {report.normalized_discounted:.4f}, avg_served {report.avg_served:.4f}, "
        f"ttf_median {report.ttf_median})"
    )


def csfub(args: argparse.Namespace) -> None:
    cfg = load_config(args)
    env = build_env(load_map(args.map), cfg)

    if args.policy is not None:
        codec = load_codec(args.codec)[0] if args.codec is not None else None
        controller = bundle_controller(env, load_bundle(args.policy), codec)
        driver = str(args.policy)
    else:
        behavior = BEHAVIORS[args.behavior]
        rng = np.random.default_rng([args.seed, 1])
        controller = lambda world, obs: behavior(world, env, rng)  # noqa: E731
        driver = args.behavior

    records = []

    def build() -> list[Path]:
        records.extend(feasibility_trace(env, controller, args.seed))
        write_feasibility_csv(args.out, records)
        return [args.out]

    inputs = [args.config, args.map] + [p for p in (args.policy, args.codec) if p is not None]
    params = {"seed": args.seed, "driver": driver, "csfub": cfg.csfub.model_dump(mode="json")}
    run_stage("csfub", args.out, inputs, params, build, resume=False)

    feasible = sum(1 for record in records if record.n_star > 0)
    matched = sum(1 for record in records if record.n_star > 0 and record.n_served_actual >= record.n_star)
    print_summary(
        f"csfub: {len(records)} steps driven by {driver} -> {args.out} "
        f"({feasible} feasible, {matched} at the bound)"
    )


def plot_metrics(args: argparse.Namespace) -> None:
    written = []

    def build() -> list[Path]:
        written.extend(plot(args.metrics, args.out))
        return written

    run_stage("plot", args.out, [args.metrics / COMPARISON_FILE], {}, build, resume=False)
    print_summary(f"plot: {len(written)} figures -> {args.out}")


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("eval", help="Evaluate a frozen policy with feasibility-aware metrics")
    add_config_argument(parser)
    parser.add_argument("--map", required=True, type=Path, help="Terrain map (.tmap)")
    parser.add_argument("--policy", required=True, type=Path, help="Policy bundle (.uvwt)")
    parser.add_argument("--codec", type=Path, default=None, help="Codec the policy acts through")
    parser.add_argument("--label", default=None, help="Method label (default: policy file stem)")
    parser.add_argument("--out", required=True, type=Path, help="Output metrics directory")
    parser.set_defaults(handler=eval_policy)

    parser = subparsers.add_parser("csfub", help="Per-step feasibility bound along one episode")
    add_config_argument(parser)
    parser.add_argument("--map", required=True, type=Path, help="Terrain map (.tmap)")
    parser.add_argument("--seed", required=True, type=int, help="Episode seed")
    parser.add_argument("--behavior", choices=BEHAVIOR_POLICIES, default="centroid", help="Behavior policy driving the UAV")
    parser.add_argument("--policy", type=Path, default=None, help="Drive with a policy bundle instead")
    parser.add_argument("--codec", type=Path, default=None, help="Codec for --policy")
    parser.add_argument("--out", required=True, type=Path, help="Output CSV")
    parser.set_defaults(handler=csfub)

    parser = subparsers.add_parser("plot", help="Render SVG figures from evaluation tables")
    parser.add_argument("--metrics", required=True, type=Path, help="Directory holding comparison.csv")
    parser.add_argument("--out", required=True, type=Path, help="Output figure directory")
    parser.set_defaults(handler=plot_metrics)
