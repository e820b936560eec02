from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Region:
    """Axis-aligned operational region in map meters."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def center(self) -> tuple[float, float]:
        return (self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0

    def clamp(self, x: float, y: float) -> tuple[float, float]:
        return (
            float(np.clip(x, self.x_min, self.x_max)),
            float(np.clip(y, self.y_min, self.y_max)),
        )

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return np.array(
            [rng.uniform(self.x_min, self.x_max), rng.uniform(self.y_min, self.y_max)],
            dtype=np.float64,
        )


@dataclass
class UserState:
    pos: np.ndarray  # (x, y, height above ground)
    waypoint: np.ndarray  # (x, y)


@dataclass
class WorldState:
    """Mutable episode state. Positions are (x, y, height above local ground)."""

    t: int
    uav_pos: np.ndarray
    users: list[UserState]
    rng: np.random.Generator
    episode_seed: int

    def user_positions(self) -> np.ndarray:
        return np.stack([user.pos for user in self.users])

    def user_centroid(self) -> np.ndarray:
        return self.user_positions().mean(axis=0)
