"""End-to-end comparison: one dataset, every state representation, every seed.

Each stage writes a manifest; a rerun skips stages whose manifest still
matches their inputs and parameters.
"""

import argparse
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from loguru import logger

from commands.common import add_config_argument, build_env, load_config, print_summary, run_stage
from commands.data import build_dataset, dataset_params
from commands.learn import build_codec, log_path_for, train_policy
from commands.maps import build_map
from config import settings
from core.codecs.registry import RAW_CODEC_ID, encode_dataset, load_codec
from core.evaluation.plots import plot
from core.evaluation.suite import ABLATION_FILE, CDF_FILE, COMPARISON_FILE, GAPS_FILE, SuiteEntry, evaluate_suite
from core.terrain.io import load_map
from schemas.codecs import CodecKind, ReprConfig
from schemas.cql import CqlConfig
from schemas.run import RunConfig


@dataclass(frozen=True)
class Variant:
    label: str
    kind: CodecKind | None
    d_z: int | None

    @property
    def codec_kind(self) -> str:
        return RAW_CODEC_ID if self.kind is None else self.kind.value


def variants(cfg: RunConfig) -> list[Variant]:
    d_z = cfg.repr.d_z
    out = [
        Variant("raw", None, None),
        Variant("pca", CodecKind.PCA, d_z),
        Variant("ae", CodecKind.AE, d_z),
    ]
    out.extend(Variant(f"vae{latent}", CodecKind.VAE, latent) for latent in cfg.repr.latent_dims)
    return out


@dataclass(frozen=True)
class Layout:
    root: Path

    @property
    def map(self) -> Path:
        return self.root / "map.tmap"

    @property
    def dataset(self) -> Path:
        return self.root / "data.uvds"

    def codec(self, variant: Variant, seed: int) -> Path:
        return self.root / f"seed{seed}" / "codecs" / f"{variant.label}.uvwt"

    def latent(self, variant: Variant, seed: int) -> Path:
        return self.root / f"seed{seed}" / "latent" / f"{variant.label}.uvds"

    def policy(self, variant: Variant, seed: int) -> Path:
        return self.root / f"seed{seed}" / "policies" / f"{variant.label}.uvwt"

    @property
    def metrics(self) -> Path:
        return self.root / "metrics"

    @property
    def figures(self) -> Path:
        return self.root / "figures"


def run_variant(cfg: RunConfig, layout: Layout, variant: Variant, seed: int, resume: bool) -> None:
    """Codec, latent dataset and policy for one (variant, seed)."""
    cql_cfg = cfg.cql.model_copy(update={"seed": seed})
    policy = layout.policy(variant, seed)

    if variant.kind is None:
        run_stage(
            "train-cql",
            policy,
            [layout.dataset],
            cql_cfg.model_dump(mode="json"),
            lambda: _train(cql_cfg, layout.dataset, policy, None, cfg.env.obs_dim),
            resume,
        )
        return

    repr_cfg = ReprConfig.model_validate(
        {**cfg.repr.model_dump(), "kind": variant.kind, "d_z": variant.d_z, "seed": seed}
    )
    codec = layout.codec(variant, seed)
    latent = layout.latent(variant, seed)

    def fit() -> list[Path]:
        build_codec(repr_cfg, layout.dataset, codec, cfg.snapshot())
        return [codec, log_path_for(codec)]

    def encode() -> list[Path]:
        encode_dataset(load_codec(codec)[0], layout.dataset, latent)
        return [latent]

    run_stage("train-repr", codec, [layout.dataset], repr_cfg.model_dump(mode="json"), fit, resume)
    run_stage("encode", latent, [codec, layout.dataset], {}, encode, resume)
    run_stage(
        "train-cql",
        policy,
        [latent, codec],
        cql_cfg.model_dump(mode="json"),
        lambda: _train(cql_cfg, latent, policy, codec, cfg.env.obs_dim),
        resume,
    )


def _train(cql_cfg: CqlConfig, data: Path, policy: Path, codec: Path | None, raw_dim: int) -> list[Path]:
    train_policy(cql_cfg, data, policy, codec, raw_dim)
    return [policy, log_path_for(policy)]


def suite_entries(cfg: RunConfig, layout: Layout) -> list[SuiteEntry]:
    seeds = cfg.eval.seeds
    entries = []
    for variant in variants(cfg):
        entries.append(
            SuiteEntry(
                label=variant.label,
                policies={seed: layout.policy(variant, seed) for seed in seeds},
                codecs={} if variant.kind is None else {seed: layout.codec(variant, seed) for seed in seeds},
                codec_kind=variant.codec_kind,
                d_z=variant.d_z,
            )
        )
    return entries


def reproduce_pipeline(cfg: RunConfig, out: Path, parallel_variants: bool = False, resume: bool = True) -> Layout:
    layout = Layout(Path(out))
    layout.root.mkdir(parents=True, exist_ok=True)
    snapshot = cfg.snapshot()

    def make_map() -> list[Path]:
        build_map(cfg.map, layout.map)
        return [layout.map]

    def make_dataset() -> list[Path]:
        build_dataset(cfg, layout.map, layout.dataset)
        return [layout.dataset]

    run_stage("gen-map", layout.map, [], snapshot["map"], make_map, resume)
    run_stage("gen-dataset", layout.dataset, [layout.map], dataset_params(cfg), make_dataset, resume)

    jobs = [(variant, seed) for variant in variants(cfg) for seed in cfg.eval.seeds]
    if parallel_variants:
        with ThreadPoolExecutor(max_workers=min(len(jobs), settings.THREADS)) as pool:
            for future in [pool.submit(run_variant, cfg, layout, v, s, resume) for v, s in jobs]:
                future.result()
    else:
        for variant, seed in jobs:
            logger.info(f"Variant {variant.label}, seed {seed}")
            run_variant(cfg, layout, variant, seed, resume)

    entries = suite_entries(cfg, layout)
    artifacts = [layout.map] + [path for entry in entries for path in entry.artifacts()]

    def evaluate() -> list[Path]:
        env = build_env(load_map(layout.map), cfg)
        evaluate_suite(env, entries, cfg.eval, layout.metrics)
        return [layout.metrics / name for name in (COMPARISON_FILE, CDF_FILE, GAPS_FILE, ABLATION_FILE)]

    def figures() -> list[Path]:
        return plot(layout.metrics, layout.figures)

    eval_params = {"eval": snapshot["eval"], "env": snapshot["env"], "radio": snapshot["radio"], "csfub": snapshot["csfub"]}
    run_stage("eval", layout.metrics, artifacts, eval_params, evaluate, resume)
    run_stage("plot", layout.figures, [layout.metrics / COMPARISON_FILE, layout.metrics / CDF_FILE], {}, figures, resume)
    return layout


def reproduce(args: argparse.Namespace) -> None:
    cfg = load_config(args)
    layout = reproduce_pipeline(cfg, args.out, args.parallel_variants, resume=not args.no_resume)
    n_methods = len(variants(cfg))
    print_summary(
        f"reproduce: {n_methods} methods x {len(cfg.eval.seeds)} seeds -> {layout.metrics / COMPARISON_FILE}"
    )


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("reproduce", help="Run the full representation comparison pipeline")
    add_config_argument(parser)
    parser.add_argument("--out", required=True, type=Path, help="Results directory")
    parser.add_argument("--parallel-variants", action="store_true", help="Train method variants concurrently")
    parser.add_argument("--no-resume", action="store_true", help="Rerun every stage even if its manifest matches")
    parser.set_defaults(handler=reproduce)
