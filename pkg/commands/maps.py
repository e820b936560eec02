import argparse
from pathlib import Path

from commands.common import add_config_argument, load_config, print_summary, run_stage
from core.terrain.generate import generate_map
from core.terrain.io import save_map
from schemas.terrain import MapGenConfig


def build_map(cfg: MapGenConfig, out: Path) -> dict:
    terrain = generate_map(cfg)
    save_map(terrain, out)
    return terrain.summary()


def gen_map(args: argparse.Namespace) -> None:
    cfg = load_config(args)
    map_cfg = cfg.map if args.seed is None else cfg.map.model_copy(update={"seed": args.seed})
    summary: dict = {}

    def build() -> list[Path]:
        summary.update(build_map(map_cfg, args.out))
        return [args.out]

    run_stage("gen-map", args.out, [args.config], map_cfg.model_dump(mode="json"), build, resume=False)
    fractions = ", ".join(f"{name}={value:.3f}" for name, value in summary["cover_fractions"].items())
    print_summary(
        f"gen-map: {map_cfg.height}x{map_cfg.width} cells -> {args.out} "
        f"(elevation {summary['elevation_min_m']:.1f}..{summary['elevation_max_m']:.1f} m; {fractions})"
    )


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("gen-map", help="Generate a procedural terrain map")
    add_config_argument(parser)
    parser.add_argument("--out", required=True, type=Path, help="Output map file (.tmap)")
    parser.add_argument("--seed", type=int, default=None, help="Override the map seed")
    parser.set_defaults(handler=gen_map)
