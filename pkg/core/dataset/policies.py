"""Behavior policies that drive dataset episodes."""

from typing import Callable

import numpy as np

from core.env.actions import N_ACTIONS, decode_action, encode_action
from core.env.state import WorldState
from core.env.world import RelayEnv
from schemas.env import EnvConfig

TRACKING_ALTITUDE_M = 120.0

BehaviorPolicy = Callable[[WorldState, RelayEnv, np.random.Generator], int]


def _signed_step(delta: float, dead_band: float) -> int:
    if abs(delta) <= dead_band:
        return 0
    return 1 if delta > 0 else -1


def step_toward(world: WorldState, target: np.ndarray, cfg: EnvConfig) -> int:
    """Per-axis unit step toward target, holding an axis inside half a step."""
    dx = _signed_step(target[0] - world.uav_pos[0], cfg.uav_step_xy_m / 2.0)
    dy = _signed_step(target[1] - world.uav_pos[1], cfg.uav_step_xy_m / 2.0)
    dz = _signed_step(target[2] - world.uav_pos[2], cfg.uav_step_z_m / 2.0)
    return encode_action(dx, dy, dz)


def policy_random(rng: np.random.Generator) -> int:
    return int(rng.integers(0, N_ACTIONS))


def policy_centroid(world: WorldState, cfg: EnvConfig) -> int:
    centroid = world.user_centroid()
    return step_toward(world, np.array([centroid[0], centroid[1], TRACKING_ALTITUDE_M]), cfg)


def lookahead_placements(world: WorldState, env: RelayEnv) -> np.ndarray:
    """UAV position after each of the 27 actions, clamped like a real step."""
    cfg = env.cfg
    placements = np.empty((N_ACTIONS, 3), dtype=np.float64)
    for index in range(N_ACTIONS):
        dx, dy, dz = decode_action(index)
        placements[index, :2] = env.region.clamp(
            world.uav_pos[0] + dx * cfg.uav_step_xy_m,
            world.uav_pos[1] + dy * cfg.uav_step_xy_m,
        )
        placements[index, 2] = np.clip(
            world.uav_pos[2] + dz * cfg.uav_step_z_m, cfg.uav_alt_min_m, cfg.uav_alt_max_m
        )
    return placements


def policy_coverage(world: WorldState, env: RelayEnv) -> int:
    """One-step lookahead on served users with users held in place."""
    counts = env.oracle.n_served_many(lookahead_placements(world, env), world.user_positions())
    # argmax keeps the lowest index among ties
    return int(np.argmax(counts))


def policy_oracle(world: WorldState, env: RelayEnv) -> int:
    _, best = env.oracle.cs_fub(world)
    return step_toward(world, best, env.cfg)


BEHAVIORS: dict[str, BehaviorPolicy] = {
    "random": lambda world, env, rng: policy_random(rng),
    "centroid": lambda world, env, rng: policy_centroid(world, env.cfg),
    "coverage": lambda world, env, rng: policy_coverage(world, env),
    "oracle": lambda world, env, rng: policy_oracle(world, env),
}
