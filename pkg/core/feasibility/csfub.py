"""Served-user counting and the candidate-set feasibility upper bound (CS-FUB).

Placements, users and the base station are given as (x, y, height above
local ground); they are lifted onto the terrain before any link is evaluated.
"""

from dataclasses import dataclass
from typing import Any

import numpy as np

from core.env.state import Region, WorldState
from core.exceptions.domain import DomainError
from core.feasibility.candidates import CandidateSet, build_candidates
from core.radio.link import absolute_positions, access_rssi_many, backhaul_rssi_many
from core.terrain.grid import TerrainMap
from schemas.feasibility import CandidateConfig
from schemas.radio import LinkParams, ThresholdSet


@dataclass(frozen=True)
class FeasibilityRecord:
    t: int
    n_star: int
    best_placement: np.ndarray
    n_served_actual: int


def n_served_many(
    terrain: TerrainMap,
    params: LinkParams,
    thresholds: ThresholdSet,
    placements: Any,
    users: Any,
    bs: Any,
) -> np.ndarray:
    placements = absolute_positions(terrain, placements)
    users = absolute_positions(terrain, users)
    bs = absolute_positions(terrain, bs)

    counts = np.zeros(len(placements), dtype=np.int64)
    backhaul = backhaul_rssi_many(terrain, params, bs, placements) >= thresholds.tau_b_dbm
    linked = placements[backhaul]
    if len(linked) == 0 or len(users) == 0:
        return counts

    uav = np.repeat(linked, len(users), axis=0)
    ground = np.tile(users, (len(linked), 1))
    access = access_rssi_many(terrain, params, uav, ground) >= thresholds.tau_a_dbm
    counts[backhaul] = access.reshape(len(linked), len(users)).sum(axis=1)
    return counts


def n_served(
    terrain: TerrainMap,
    params: LinkParams,
    thresholds: ThresholdSet,
    placement: Any,
    users: Any,
    bs: Any,
) -> int:
    return int(n_served_many(terrain, params, thresholds, placement, users, bs)[0])


def centroid_distances(placements: np.ndarray, centroid: np.ndarray) -> np.ndarray:
    dx = placements[:, 0] - centroid[0]
    dy = placements[:, 1] - centroid[1]
    dz = placements[:, 2] - centroid[2]
    return np.sqrt(dx * dx + dy * dy + dz * dz)


def select_best(counts: np.ndarray, placements: np.ndarray, centroid: np.ndarray) -> int:
    """Index of the max count; ties by centroid distance, then candidate order."""
    order = np.lexsort(
        (np.arange(len(counts)), centroid_distances(placements, centroid), -counts)
    )
    return int(order[0])


def cs_fub(
    terrain: TerrainMap,
    params: LinkParams,
    thresholds: ThresholdSet,
    candidates: CandidateSet,
    users: Any,
    bs: Any,
) -> tuple[int, np.ndarray]:
    if len(candidates) == 0:
        raise DomainError("cs_fub needs at least one candidate placement")
    users = np.asarray(users, dtype=np.float64).reshape(-1, 3)
    counts = n_served_many(terrain, params, thresholds, candidates.placements, users, bs)
    best = select_best(counts, candidates.placements, users.mean(axis=0))
    return int(counts[best]), candidates.placements[best].copy()


class FeasibilityOracle:
    """Binds map, radio model and candidate rules for per-step feasibility queries."""

    def __init__(
        self,
        terrain: TerrainMap,
        params: LinkParams,
        thresholds: ThresholdSet,
        candidate_cfg: CandidateConfig,
        region: Region,
        bs_pos: np.ndarray,
    ) -> None:
        self.terrain = terrain
        self.params = params
        self.thresholds = thresholds
        self.candidate_cfg = candidate_cfg
        self.region = region
        self.bs_pos = np.asarray(bs_pos, dtype=np.float64)

    def n_served_many(self, placements: Any, users: Any) -> np.ndarray:
        return n_served_many(
            self.terrain, self.params, self.thresholds, placements, users, self.bs_pos
        )

    def n_served(self, placement: Any, users: Any) -> int:
        return int(self.n_served_many(placement, users)[0])

    def candidates(self, world: WorldState) -> CandidateSet:
        return build_candidates(self.candidate_cfg, world, self.region)

    def cs_fub(self, world: WorldState) -> tuple[int, np.ndarray]:
        return cs_fub(
            self.terrain,
            self.params,
            self.thresholds,
            self.candidates(world),
            world.user_positions(),
            self.bs_pos,
        )

    def evaluate(self, world: WorldState) -> FeasibilityRecord:
        """CS-FUB at the current step plus the service realized at the UAV.

        The UAV position always takes part in the max, also when
        deduplication folded it into a neighbouring candidate.
        """
        users = world.user_positions()
        candidates = self.candidates(world).placements
        placements = np.concatenate([candidates, world.uav_pos.reshape(1, 3)])
        counts = self.n_served_many(placements, users)
        n_actual = int(counts[-1])

        pool = len(placements) if self.candidate_cfg.include_current_uav else len(candidates)
        best = select_best(counts[:pool], placements[:pool], users.mean(axis=0))

        return FeasibilityRecord(
            t=world.t,
            n_star=int(counts[best]),
            best_placement=placements[best].copy(),
            n_served_actual=n_actual,
        )
