import argparse
from pathlib import Path
from typing import Any, Callable

from loguru import logger

from core.env.world import RelayEnv
from core.logging import stage_context
from core.manifest.utils import stage_is_current, write_manifest
from core.terrain.grid import TerrainMap
from schemas.run import RunConfig, load_run_config


def add_config_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, type=Path, help="Run configuration (TOML)")


def load_config(args: argparse.Namespace) -> RunConfig:
    return load_run_config(args.config)


def build_env(terrain: TerrainMap, cfg: RunConfig) -> RelayEnv:
    return RelayEnv(terrain, cfg.env, radio=cfg.radio, candidates=cfg.csfub)


def print_summary(message: str) -> None:
    print(message, flush=True)


def run_stage(
    stage: str,
    output: Path,
    inputs: list[Path],
    params: dict[str, Any],
    build: Callable[[], list[Path]],
    resume: bool = True,
) -> bool:
    """Run `build` unless a matching manifest says its outputs are current.

    `build` returns the output files to record. Returns True if the stage ran.
    """
    if resume and stage_is_current(stage, output, inputs, params):
        logger.info(f"Skipping {stage}: {output} is up to date")
        return False
    with stage_context(stage):
        outputs = build()
    write_manifest(stage, output, inputs, outputs, params)
    return True
