import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from core.codecs.registry import Codec, encode
from core.cql.bundle import PolicyBundle, act
from core.env.state import WorldState
from core.env.world import RelayEnv
from core.exceptions.domain import DimensionMismatch
from core.exceptions.formats import ArtifactMissing, ParseError
from core.formats.binary import atomic_path

TRACE_COLUMNS = ("t", "n_served", "n_star", "reward", "x", "y", "z")

Controller = Callable[[WorldState, np.ndarray], int]


@dataclass
class EpisodeTrace:
    policy_id: str
    episode_seed: int
    num_users: int
    t: np.ndarray
    n_served: np.ndarray
    n_star: np.ndarray
    reward: np.ndarray
    uav_pos: np.ndarray

    @property
    def horizon(self) -> int:
        return len(self.t)

    def equals(self, other: "EpisodeTrace") -> bool:
        return all(
            np.array_equal(getattr(self, name), getattr(other, name))
            for name in ("t", "n_served", "n_star", "reward", "uav_pos")
        )


def bundle_controller(env: RelayEnv, bundle: PolicyBundle, codec: Codec | None = None) -> Controller:
    """Greedy controller over raw or encoded observations.

    Dimensions are checked here so a mismatch fails before the first step.
    """
    if codec is not None:
        if codec.d_o != env.obs_dim:
            raise DimensionMismatch("codec observation size", env.obs_dim, codec.d_o)
        expected = codec.d_z
    else:
        expected = env.obs_dim
    if bundle.input_dim != expected:
        raise DimensionMismatch("policy input size", expected, bundle.input_dim)

    if codec is None:
        return lambda world, obs: act(bundle, obs)
    return lambda world, obs: act(bundle, encode(codec, obs[None, :])[0])


def rollout(env: RelayEnv, controller: Controller, episode_seed: int, policy_id: str) -> EpisodeTrace:
    T = env.cfg.episode_len
    n_served = np.zeros(T, dtype=np.int64)
    n_star = np.zeros(T, dtype=np.int64)
    reward = np.zeros(T, dtype=np.float64)
    uav_pos = np.zeros((T, 3), dtype=np.float64)

    world, obs = env.reset(episode_seed)
    for t in range(T):
        result = env.step(world, controller(world, obs))
        n_served[t] = result.info.n_served
        n_star[t] = result.info.n_star
        reward[t] = result.reward
        uav_pos[t] = result.info.uav_pos
        obs = result.next_obs

    return EpisodeTrace(
        policy_id=policy_id,
        episode_seed=episode_seed,
        num_users=env.cfg.num_users,
        t=np.arange(T),
        n_served=n_served,
        n_star=n_star,
        reward=reward,
        uav_pos=uav_pos,
    )


def run_episode(
    env: RelayEnv,
    bundle: PolicyBundle,
    codec: Codec | None,
    episode_seed: int,
    policy_id: str = "policy",
) -> EpisodeTrace:
    return rollout(env, bundle_controller(env, bundle, codec), episode_seed, policy_id)


def write_trace(path: str | Path, trace: EpisodeTrace) -> None:
    with atomic_path(path) as tmp:
        with open(tmp, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRACE_COLUMNS)
            for k in range(trace.horizon):
                x, y, z = trace.uav_pos[k]
                writer.writerow(
                    [
                        int(trace.t[k]),
                        int(trace.n_served[k]),
                        int(trace.n_star[k]),
                        repr(float(trace.reward[k])),
                        repr(float(x)),
                        repr(float(y)),
                        repr(float(z)),
                    ]
                )


def read_trace(path: str | Path, policy_id: str, episode_seed: int, num_users: int) -> EpisodeTrace:
    path = Path(path)
    if not path.is_file():
        raise ArtifactMissing(f"trace file not found: {path}")

    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != TRACE_COLUMNS:
            raise ParseError(f"{path}: expected header {','.join(TRACE_COLUMNS)}", line=1)
        for row in reader:
            try:
                if len(row) != len(TRACE_COLUMNS):
                    raise ValueError(f"expected {len(TRACE_COLUMNS)} fields, found {len(row)}")
                rows.append((int(row[0]), int(row[1]), int(row[2]), float(row[3]), float(row[4]), float(row[5]), float(row[6])))
            except ValueError as e:
                raise ParseError(f"{path}: {e}", line=reader.line_num)

    table = np.array(rows, dtype=np.float64).reshape(-1, len(TRACE_COLUMNS))
    return EpisodeTrace(
        policy_id=policy_id,
        episode_seed=episode_seed,
        num_users=num_users,
        t=table[:, 0].astype(np.int64),
        n_served=table[:, 1].astype(np.int64),
        n_star=table[:, 2].astype(np.int64),
        reward=table[:, 3].copy(),
        uav_pos=table[:, 4:7].copy(),
    )
