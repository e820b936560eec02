import os
import sys
import tempfile
from pathlib import Path

import numpy as np
import pytest

os.environ.setdefault("RELAYSCOPE_LOG_FILE", str(Path(tempfile.gettempdir()) / "relayscope-tests.log"))
os.environ.setdefault("RELAYSCOPE_THREADS", "2")

sys.path.append(str(Path(__file__).resolve().parents[1]))

from core.dataset.io import Transition, write_dataset
from core.env.world import RelayEnv
from core.terrain.grid import TerrainMap
from helpers import make_flat_map, small_candidate_config, small_env_config
from schemas.env import EnvConfig


@pytest.fixture
def flat_map() -> TerrainMap:
    return make_flat_map()


@pytest.fixture
def env_cfg() -> EnvConfig:
    return small_env_config()


@pytest.fixture
def flat_env(flat_map: TerrainMap, env_cfg: EnvConfig) -> RelayEnv:
    return RelayEnv(flat_map, env_cfg, candidates=small_candidate_config())


@pytest.fixture
def random_transitions() -> list[Transition]:
    rng = np.random.default_rng(11)
    transitions = []
    for k in range(40):
        transitions.append(
            Transition(
                state=rng.random(6, dtype=np.float32),
                action=int(rng.integers(0, 27)),
                reward=float(np.float32(rng.random())),
                next_state=rng.random(6, dtype=np.float32),
                done=k % 10 == 9,
            )
        )
    return transitions


@pytest.fixture
def small_dataset(tmp_path: Path, random_transitions: list[Transition]) -> Path:
    path = tmp_path / "small.uvds"
    write_dataset(path, random_transitions, state_dim=6)
    return path
