import csv
from pathlib import Path
from typing import Callable

import numpy as np

from core.env.state import WorldState
from core.env.world import RelayEnv
from core.feasibility.csfub import FeasibilityRecord
from core.formats.binary import atomic_path

RECORD_COLUMNS = ("t", "n_star", "best_x", "best_y", "best_z", "n_served_actual")


def feasibility_trace(
    env: RelayEnv,
    controller: Callable[[WorldState, np.ndarray], int],
    episode_seed: int,
) -> list[FeasibilityRecord]:
    """Per-step CS-FUB records along one episode driven by `controller`."""
    world, obs = env.reset(episode_seed)
    records = []
    for t in range(env.cfg.episode_len):
        result = env.step(world, controller(world, obs))
        records.append(
            FeasibilityRecord(
                t=t,
                n_star=result.info.n_star,
                best_placement=result.info.best_placement,
                n_served_actual=result.info.n_served,
            )
        )
        obs = result.next_obs
    return records


def write_feasibility_csv(path: str | Path, records: list[FeasibilityRecord]) -> None:
    with atomic_path(path) as tmp:
        with open(tmp, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(RECORD_COLUMNS)
            for record in records:
                x, y, z = (repr(float(v)) for v in record.best_placement)
                writer.writerow([record.t, record.n_star, x, y, z, record.n_served_actual])
