from dataclasses import dataclass

import numpy as np

from core.env.state import Region, WorldState
from schemas.feasibility import CandidateConfig

DEDUP_RADIUS_M = 1.0


@dataclass(frozen=True)
class CandidateSet:
    placements: np.ndarray  # (P, 3): x, y, height above ground

    def __len__(self) -> int:
        return len(self.placements)


def grid_placements(cfg: CandidateConfig, region: Region) -> np.ndarray:
    if not cfg.grid_enabled:
        return np.empty((0, 3))
    xs = region.x_min + (np.arange(cfg.grid_x) + 0.5) * region.width / cfg.grid_x
    ys = region.y_min + (np.arange(cfg.grid_y) + 0.5) * region.height / cfg.grid_y
    rows = [(x, y, altitude) for altitude in cfg.altitudes_m for y in ys for x in xs]
    return np.array(rows, dtype=np.float64)


def dedup_placements(points: np.ndarray, radius_m: float = DEDUP_RADIUS_M) -> np.ndarray:
    """Drop points within radius_m of an earlier kept point."""
    if len(points) < 2:
        return points
    diff = points[:, None, :] - points[None, :, :]
    near = np.sqrt((diff**2).sum(axis=-1)) < radius_m
    near = np.tril(near, k=-1)

    keep = np.ones(len(points), dtype=bool)
    for i in np.flatnonzero(near.any(axis=1)):
        keep[i] = not np.any(near[i, :i] & keep[:i])
    return points[keep]


def build_candidates(cfg: CandidateConfig, world: WorldState, region: Region) -> CandidateSet:
    """Grid, above-user, centroid and current-UAV placements, in that order."""
    parts = [grid_placements(cfg, region)]

    users = world.user_positions()
    if cfg.include_above_users:
        above = users.copy()
        above[:, 2] = cfg.local_altitude_m
        parts.append(above)
    if cfg.include_centroid:
        centroid = users.mean(axis=0)
        parts.append(np.array([[centroid[0], centroid[1], cfg.local_altitude_m]]))
    if cfg.include_current_uav:
        parts.append(world.uav_pos.reshape(1, 3).astype(np.float64))

    return CandidateSet(placements=dedup_placements(np.concatenate(parts)))
