import argparse
from pathlib import Path

from commands.common import add_config_argument, load_config, print_summary, run_stage
from core.codecs.registry import RAW_CODEC_ID, Codec, fit_codec, load_codec, reconstruction_mse, save_codec
from core.cql.trainer import TrainResult, train
from core.dataset.io import open_dataset
from core.exceptions.domain import DimensionMismatch
from schemas.codecs import CodecKind, ReprConfig
from schemas.cql import CqlConfig
from schemas.run import RunConfig

RECON_SAMPLE_ROWS = 4096


def log_path_for(out: Path) -> Path:
    return out.with_name(out.stem + ".log.csv")


def build_codec(cfg: ReprConfig, data: Path, out: Path, snapshot: dict) -> Codec:
    dataset = open_dataset(data)
    codec = fit_codec(dataset.states, cfg, log_path=log_path_for(out))
    save_codec(out, codec, {"seed": cfg.seed or 0, "config": snapshot})
    return codec


def train_policy(
    cfg: CqlConfig,
    data: Path,
    out: Path,
    codec_path: Path | None,
    raw_state_dim: int,
) -> TrainResult:
    """CQL on raw or latent data; a codec pins the expected state size to its d_z."""
    if codec_path is None:
        return train(data, cfg, out, RAW_CODEC_ID, expected_state_dim=raw_state_dim, log_path=log_path_for(out))

    codec, codec_id = load_codec(codec_path)
    state_dim = open_dataset(data).state_dim
    if state_dim != codec.d_z:
        raise DimensionMismatch(f"{data}: dataset state_dim against codec d_z", codec.d_z, state_dim)
    return train(data, cfg, out, codec_id, expected_state_dim=codec.d_z, log_path=log_path_for(out))


def repr_config(cfg: RunConfig, kind: str | None, latent: int | None) -> ReprConfig:
    update: dict = {}
    if kind is not None:
        update["kind"] = CodecKind(kind)
    if latent is not None:
        update["d_z"] = latent
    return ReprConfig.model_validate({**cfg.repr.model_dump(), **update})


def train_repr(args: argparse.Namespace) -> None:
    cfg = load_config(args)
    repr_cfg = repr_config(cfg, args.kind, args.latent)
    codecs: list[Codec] = []

    def build() -> list[Path]:
        codecs.append(build_codec(repr_cfg, args.data, args.out, cfg.snapshot()))
        return [args.out, log_path_for(args.out)]

    run_stage("train-repr", args.out, [args.config, args.data], repr_cfg.model_dump(mode="json"), build, resume=False)
    codec = codecs[0]
    sample = open_dataset(args.data).states[:RECON_SAMPLE_ROWS]
    print_summary(
        f"train-repr: {codec.kind.value} d_o={codec.d_o} d_z={codec.d_z} -> {args.out} "
        f"(reconstruction mse {reconstruction_mse(codec, sample):.6f})"
    )


def train_cql(args: argparse.Namespace) -> None:
    cfg = load_config(args)
    results: list[TrainResult] = []

    def build() -> list[Path]:
        results.append(train_policy(cfg.cql, args.data, args.out, args.codec, cfg.env.obs_dim))
        return [args.out, log_path_for(args.out)]

    inputs = [args.config, args.data] + ([args.codec] if args.codec else [])
    run_stage("train-cql", args.out, inputs, cfg.cql.model_dump(mode="json"), build, resume=False)
    result = results[0]
    last = f", final bellman_mse {result.log[-1][1]:.6f}" if result.log else ""
    print_summary(
        f"train-cql: {cfg.cql.train_steps} steps on d={result.bundle.input_dim} "
        f"(codec {result.bundle.codec_id}) -> {args.out}{last}"
    )


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("train-repr", help="Fit a PCA, AE or VAE observation codec")
    add_config_argument(parser)
    parser.add_argument("--kind", choices=[kind.value for kind in CodecKind], default=None)
    parser.add_argument("--latent", type=int, default=None, help="Latent size d_z")
    parser.add_argument("--data", required=True, type=Path, help="Raw dataset (.uvds)")
    parser.add_argument("--out", required=True, type=Path, help="Output codec (.uvwt)")
    parser.set_defaults(handler=train_repr)

    parser = subparsers.add_parser("train-cql", help="Train a conservative Q-learning policy offline")
    add_config_argument(parser)
    parser.add_argument("--data", required=True, type=Path, help="Raw or latent dataset (.uvds)")
    parser.add_argument("--codec", type=Path, default=None, help="Codec the latent dataset was encoded with")
    parser.add_argument("--out", required=True, type=Path, help="Output policy bundle (.uvwt)")
    parser.set_defaults(handler=train_cql)
