from dataclasses import dataclass
from typing import Sequence

import numpy as np

from core.env.actions import decode_action, quantize_action
from core.env.state import Region, UserState, WorldState
from core.exceptions.config import ConfigurationError
from core.exceptions.domain import StateError
from core.feasibility.csfub import FeasibilityOracle
from core.radio.link import absolute_positions, access_rssi_many, backhaul_rssi_many
from core.terrain.grid import N_COVER_CLASSES, TerrainMap, resample
from schemas.env import EnvConfig
from schemas.feasibility import CandidateConfig
from schemas.radio import RadioConfig

RSSI_FLOOR_DBM = -120.0
RSSI_SPAN_DB = 50.0


def normalize_rssi(rssi_dbm: np.ndarray) -> np.ndarray:
    return np.clip((np.asarray(rssi_dbm) - RSSI_FLOOR_DBM) / RSSI_SPAN_DB, 0.0, 1.0)


@dataclass(frozen=True)
class StepInfo:
    n_served: int
    n_star: int
    uav_pos: np.ndarray
    best_placement: np.ndarray


@dataclass(frozen=True)
class StepResult:
    next_obs: np.ndarray
    reward: float
    done: bool
    info: StepInfo


def build_region(terrain: TerrainMap, cfg: EnvConfig) -> Region:
    width_m, height_m = terrain.extent_m
    bs_x, bs_y = cfg.bs_xy if cfg.bs_xy is not None else (width_m / 2.0, height_m / 2.0)
    radius = cfg.user_region_radius_m
    region = Region(x_min=bs_x - radius, x_max=bs_x + radius, y_min=bs_y - radius, y_max=bs_y + radius)
    if region.x_min < 0 or region.y_min < 0 or region.x_max > width_m or region.y_max > height_m:
        raise ConfigurationError(
            f"user region [{region.x_min}, {region.x_max}] x [{region.y_min}, {region.y_max}] "
            f"extends outside the map extent [0, {width_m}] x [0, {height_m}]"
        )
    return region


class RelayEnv:
    """Single-UAV relay MDP over a static terrain map.

    The UAV altitude is measured above local ground; user trajectories draw
    only from the episode rng, so they never depend on UAV actions.
    """

    def __init__(
        self,
        terrain: TerrainMap,
        cfg: EnvConfig,
        radio: RadioConfig | None = None,
        candidates: CandidateConfig | None = None,
    ) -> None:
        self.terrain = terrain
        self.cfg = cfg
        self.radio = radio or RadioConfig()
        self.region = build_region(terrain, cfg)
        self.bs_pos = np.array([*self.region.center, cfg.bs_height_m], dtype=np.float64)
        self.oracle = FeasibilityOracle(
            terrain,
            self.radio.link,
            self.radio.thresholds,
            candidates or CandidateConfig(),
            self.region,
            self.bs_pos,
        )
        self._map_channels = self._build_map_channels()

    @property
    def obs_dim(self) -> int:
        return self.cfg.obs_dim

    def _build_map_channels(self) -> np.ndarray:
        elevation, cover = resample(self.terrain, self.cfg.obs_map_h, self.cfg.obs_map_w)
        low = float(self.terrain.elevation.min())
        span = float(self.terrain.elevation.max()) - low
        if span <= 1e-9:
            elevation = np.zeros_like(elevation)
        else:
            elevation = np.clip((elevation - low) / span, 0.0, 1.0)
        cover = cover.astype(np.float64) / (N_COVER_CLASSES - 1)
        return np.concatenate([elevation.ravel(), cover.ravel()])

    def reset(self, episode_seed: int) -> tuple[WorldState, np.ndarray]:
        rng = np.random.default_rng(episode_seed)
        altitude = (self.cfg.uav_alt_min_m + self.cfg.uav_alt_max_m) / 2.0
        uav = np.array([self.bs_pos[0], self.bs_pos[1], altitude], dtype=np.float64)

        users = []
        for _ in range(self.cfg.num_users):
            x, y = self.region.sample(rng)
            users.append(
                UserState(
                    pos=np.array([x, y, self.cfg.user_height_m], dtype=np.float64),
                    waypoint=self.region.sample(rng),
                )
            )

        world = WorldState(t=0, uav_pos=uav, users=users, rng=rng, episode_seed=episode_seed)
        return world, self.observe(world)

    def advance_users(self, world: WorldState) -> None:
        travel = self.cfg.user_speed_mps * self.cfg.dt_s
        for user in world.users:
            delta = user.waypoint - user.pos[:2]
            distance = float(np.hypot(delta[0], delta[1]))
            if distance <= travel:
                user.pos[:2] = user.waypoint
                user.waypoint = self.region.sample(world.rng)
            else:
                user.pos[:2] += delta / distance * travel

    def move_uav(self, world: WorldState, action_index: int) -> None:
        dx, dy, dz = decode_action(action_index)
        x, y = self.region.clamp(
            world.uav_pos[0] + dx * self.cfg.uav_step_xy_m,
            world.uav_pos[1] + dy * self.cfg.uav_step_xy_m,
        )
        z = float(
            np.clip(
                world.uav_pos[2] + dz * self.cfg.uav_step_z_m,
                self.cfg.uav_alt_min_m,
                self.cfg.uav_alt_max_m,
            )
        )
        world.uav_pos = np.array([x, y, z], dtype=np.float64)

    def step(
        self,
        world: WorldState,
        action_index: int,
        oracle: FeasibilityOracle | None = None,
    ) -> StepResult:
        if world.t >= self.cfg.episode_len:
            raise StateError(f"episode already finished at t={world.t}")

        oracle = oracle or self.oracle
        self.move_uav(world, action_index)
        self.advance_users(world)
        world.t += 1

        record = oracle.evaluate(world)
        # above 1 only when the UAV position is kept out of the candidate pool
        reward = min(record.n_served_actual / record.n_star, 1.0) if record.n_star > 0 else 0.0

        return StepResult(
            next_obs=self.observe(world),
            reward=float(reward),
            done=world.t == self.cfg.episode_len,
            info=StepInfo(
                n_served=record.n_served_actual,
                n_star=record.n_star,
                uav_pos=world.uav_pos.copy(),
                best_placement=record.best_placement,
            ),
        )

    def step_continuous(self, world: WorldState, action: Sequence[float]) -> StepResult:
        return self.step(world, quantize_action(action))

    def link_rssi(self, world: WorldState) -> tuple[np.ndarray, float]:
        """Access RSSI per user and backhaul RSSI at the current UAV position."""
        uav = absolute_positions(self.terrain, world.uav_pos)
        users = absolute_positions(self.terrain, world.user_positions())
        bs = absolute_positions(self.terrain, self.bs_pos)
        access = access_rssi_many(self.terrain, self.radio.link, uav, users)
        backhaul = backhaul_rssi_many(self.terrain, self.radio.link, bs, uav)
        return access, float(backhaul[0])

    def _normalize_xyz(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        out = np.empty_like(points, dtype=np.float64)
        out[:, 0] = (points[:, 0] - self.region.x_min) / self.region.width
        out[:, 1] = (points[:, 1] - self.region.y_min) / self.region.height
        out[:, 2] = points[:, 2] / self.cfg.uav_alt_max_m
        return np.clip(out, 0.0, 1.0)

    def observe(self, world: WorldState) -> np.ndarray:
        access, backhaul = self.link_rssi(world)
        dynamic = np.concatenate(
            [
                self._normalize_xyz(world.uav_pos).ravel(),
                self._normalize_xyz(world.user_positions()).ravel(),
                normalize_rssi(access),
                normalize_rssi(np.array([backhaul])),
            ]
        )
        return np.concatenate([self._map_channels, dynamic]).astype(np.float32)
