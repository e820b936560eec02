"""Small maps and configs shared by the test modules."""

import numpy as np

from core.terrain.grid import LandCover, TerrainMap
from schemas.env import EnvConfig
from schemas.feasibility import CandidateConfig

CELL_M = 400.0
MAP_CELLS = 8
OBS_CELLS = 8
SMALL_STATE_DIM = 2 * OBS_CELLS * OBS_CELLS + 16


def make_flat_map(
    height: int = MAP_CELLS,
    width: int = MAP_CELLS,
    cell_size_m: float = CELL_M,
    elevation: float = 0.0,
    cover: LandCover = LandCover.OPEN,
) -> TerrainMap:
    return TerrainMap(
        elevation=np.full((height, width), elevation, dtype=np.float32),
        cover=np.full((height, width), cover, dtype=np.uint8),
        cell_size_m=cell_size_m,
    )


def make_ridge_map(column: int, ridge_m: float = 500.0, size: int = MAP_CELLS) -> TerrainMap:
    """Flat open map with one full-height wall along a column of cells."""
    elevation = np.zeros((size, size), dtype=np.float32)
    elevation[:, column] = ridge_m
    return TerrainMap(
        elevation=elevation,
        cover=np.full((size, size), LandCover.OPEN, dtype=np.uint8),
        cell_size_m=CELL_M,
    )


def small_env_config(**overrides) -> EnvConfig:
    values = {
        "num_users": 3,
        "episode_len": 8,
        "obs_map_h": OBS_CELLS,
        "obs_map_w": OBS_CELLS,
        "state_dim": SMALL_STATE_DIM,
        "user_region_radius_m": 1200.0,
    }
    values.update(overrides)
    return EnvConfig(**values)


def small_candidate_config(**overrides) -> CandidateConfig:
    values = {"grid_x": 3, "grid_y": 3}
    values.update(overrides)
    return CandidateConfig(**values)
