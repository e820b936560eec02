import argparse
from pathlib import Path

from commands.common import add_config_argument, build_env, load_config, print_summary, run_stage
from core.codecs.registry import encode_dataset, load_codec
from core.dataset.generate import DatasetSummary, generate_dataset
from core.terrain.io import load_map
from schemas.run import RunConfig


def dataset_params(cfg: RunConfig) -> dict:
    snapshot = cfg.snapshot()
    return {name: snapshot[name] for name in ("env", "radio", "csfub", "dataset")}


def build_dataset(cfg: RunConfig, map_path: Path, out: Path) -> DatasetSummary:
    env = build_env(load_map(map_path), cfg)
    return generate_dataset(env, cfg.dataset.mix, cfg.dataset.n_transitions, cfg.dataset.seed or 0, out)


def gen_dataset(args: argparse.Namespace) -> None:
    cfg = load_config(args)
    holder: list[DatasetSummary] = []

    def build() -> list[Path]:
        holder.append(build_dataset(cfg, args.map, args.out))
        return [args.out]

    run_stage("gen-dataset", args.out, [args.config, args.map], dataset_params(cfg), build, resume=False)
    summary = holder[0]
    print_summary(
        f"gen-dataset: {summary.transitions} transitions in {summary.episodes} episodes -> {args.out} "
        f"(mean reward {summary.mean_reward:.4f}, action entropy {summary.action_entropy_nats:.3f} nats)"
    )


def encode(args: argparse.Namespace) -> None:
    codec, codec_id = load_codec(args.codec)
    counts: list[int] = []

    def build() -> list[Path]:
        counts.append(encode_dataset(codec, args.data, args.out))
        return [args.out]

    run_stage("encode", args.out, [args.codec, args.data], {"codec": codec_id}, build, resume=False)
    print_summary(f"encode: {counts[0]} transitions -> {args.out} (codec {codec_id}, d_z={codec.d_z})")


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("gen-dataset", help="Roll behavior policies into an offline dataset")
    add_config_argument(parser)
    parser.add_argument("--map", required=True, type=Path, help="Terrain map (.tmap)")
    parser.add_argument("--out", required=True, type=Path, help="Output dataset (.uvds)")
    parser.set_defaults(handler=gen_dataset)

    parser = subparsers.add_parser("encode", help="Encode a dataset into a codec's latent space")
    parser.add_argument("--codec", required=True, type=Path, help="Codec weight file (.uvwt)")
    parser.add_argument("--data", required=True, type=Path, help="Input dataset (.uvds)")
    parser.add_argument("--out", required=True, type=Path, help="Output latent dataset (.uvds)")
    parser.set_defaults(handler=encode)
