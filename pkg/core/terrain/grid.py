from dataclasses import dataclass
from enum import IntEnum
from typing import Any

import numpy as np

from core.exceptions.config import ConfigurationError
from core.exceptions.domain import DomainError


class LandCover(IntEnum):
    WATER = 0
    OPEN = 1
    SPARSE = 2
    DENSE = 3


N_COVER_CLASSES = len(LandCover)


@dataclass(frozen=True, eq=False)
class TerrainMap:
    """Elevation (meters above an arbitrary datum) and land cover on an H x W grid.

    Row i covers y in [i * cell, (i + 1) * cell); row 0 is the y = 0 edge.
    Column j covers x in [j * cell, (j + 1) * cell).
    """

    elevation: np.ndarray
    cover: np.ndarray
    cell_size_m: float = 400.0

    def __post_init__(self) -> None:
        elevation = np.array(self.elevation, dtype=np.float32)
        cover = np.array(self.cover, dtype=np.uint8)

        if elevation.ndim != 2 or elevation.shape[0] < 2 or elevation.shape[1] < 2:
            raise DomainError(f"elevation grid must be at least 2x2, got shape {elevation.shape}")
        if cover.shape != elevation.shape:
            raise DomainError(
                f"cover grid shape {cover.shape} does not match elevation shape {elevation.shape}"
            )
        if not np.all(np.isfinite(elevation)):
            raise DomainError("elevation grid contains non-finite values")
        if cover.size and int(cover.max()) >= N_COVER_CLASSES:
            raise DomainError(f"cover code {int(cover.max())} outside 0..{N_COVER_CLASSES - 1}")
        if not np.isfinite(self.cell_size_m) or self.cell_size_m <= 0:
            raise DomainError(f"cell_size_m must be positive, got {self.cell_size_m}")

        elevation.flags.writeable = False
        cover.flags.writeable = False
        object.__setattr__(self, "elevation", elevation)
        object.__setattr__(self, "cover", cover)
        # stored as f32 on disk; keep the in-memory value identical
        object.__setattr__(self, "cell_size_m", float(np.float32(self.cell_size_m)))

    @property
    def height(self) -> int:
        return self.elevation.shape[0]

    @property
    def width(self) -> int:
        return self.elevation.shape[1]

    @property
    def extent_m(self) -> tuple[float, float]:
        return self.width * self.cell_size_m, self.height * self.cell_size_m

    def contains(self, x: float, y: float) -> bool:
        width_m, height_m = self.extent_m
        return 0.0 <= x <= width_m and 0.0 <= y <= height_m

    def summary(self) -> dict[str, Any]:
        counts = np.bincount(self.cover.ravel(), minlength=N_COVER_CLASSES)
        return {
            "height": self.height,
            "width": self.width,
            "cell_size_m": self.cell_size_m,
            "elevation_min_m": float(self.elevation.min()),
            "elevation_max_m": float(self.elevation.max()),
            "elevation_mean_m": float(self.elevation.mean(dtype=np.float64)),
            "cover_fractions": {
                cls.name.lower(): float(counts[cls]) / self.cover.size for cls in LandCover
            },
        }

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TerrainMap):
            return NotImplemented
        return (
            self.cell_size_m == other.cell_size_m
            and np.array_equal(self.elevation, other.elevation)
            and np.array_equal(self.cover, other.cover)
        )


def _check_extent(terrain: TerrainMap, xs: np.ndarray, ys: np.ndarray) -> None:
    width_m, height_m = terrain.extent_m
    inside = (xs >= 0.0) & (xs <= width_m) & (ys >= 0.0) & (ys <= height_m)
    if not np.all(inside):
        bad = int(np.argmin(inside))
        raise DomainError(
            f"point ({float(xs.flat[bad])}, {float(ys.flat[bad])}) outside map extent "
            f"[0, {width_m}] x [0, {height_m}]"
        )


def _lattice(coords: np.ndarray, cell: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    # fractional index relative to cell centres, clamped so border half-cells are flat
    f = np.clip(coords / cell - 0.5, 0.0, n - 1)
    i0 = np.minimum(np.floor(f).astype(np.int64), n - 2)
    return i0, f - i0


def elevation_at_many(terrain: TerrainMap, xs: Any, ys: Any) -> np.ndarray:
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    _check_extent(terrain, xs, ys)

    j0, tx = _lattice(xs, terrain.cell_size_m, terrain.width)
    i0, ty = _lattice(ys, terrain.cell_size_m, terrain.height)

    grid = terrain.elevation
    e00 = grid[i0, j0].astype(np.float64)
    e01 = grid[i0, j0 + 1].astype(np.float64)
    e10 = grid[i0 + 1, j0].astype(np.float64)
    e11 = grid[i0 + 1, j0 + 1].astype(np.float64)

    top = e00 * (1.0 - tx) + e01 * tx
    bottom = e10 * (1.0 - tx) + e11 * tx
    return top * (1.0 - ty) + bottom * ty


def elevation_at(terrain: TerrainMap, x: float, y: float) -> float:
    return float(elevation_at_many(terrain, [x], [y])[0])


def _nearest_index(coords: np.ndarray, cell: float, n: int) -> np.ndarray:
    # boundary points belong to the lower-index cell
    return np.clip(np.ceil(coords / cell).astype(np.int64) - 1, 0, n - 1)


def cover_at_many(terrain: TerrainMap, xs: Any, ys: Any) -> np.ndarray:
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    _check_extent(terrain, xs, ys)
    j = _nearest_index(xs, terrain.cell_size_m, terrain.width)
    i = _nearest_index(ys, terrain.cell_size_m, terrain.height)
    return terrain.cover[i, j]


def cover_at(terrain: TerrainMap, x: float, y: float) -> LandCover:
    return LandCover(int(cover_at_many(terrain, [x], [y])[0]))


def _overlap_weights(n_in: int, n_out: int) -> np.ndarray:
    """Row-normalized overlap of output intervals with unit input intervals."""
    scale = n_in / n_out
    lo_out = np.arange(n_out)[:, None] * scale
    hi_out = lo_out + scale
    lo_in = np.arange(n_in)[None, :].astype(np.float64)
    hi_in = lo_in + 1.0
    overlap = np.clip(np.minimum(hi_out, hi_in) - np.maximum(lo_out, lo_in), 0.0, None)
    return overlap / scale


def resample(terrain: TerrainMap, out_h: int, out_w: int) -> tuple[np.ndarray, np.ndarray]:
    """Area-averaged elevation and majority-vote cover on an out_h x out_w grid."""
    if out_h < 1 or out_w < 1:
        raise ConfigurationError(f"resample output must be at least 1x1, got {out_h}x{out_w}")

    if (out_h, out_w) == (terrain.height, terrain.width):
        return terrain.elevation.astype(np.float64), terrain.cover.copy()

    rows = _overlap_weights(terrain.height, out_h)
    cols = _overlap_weights(terrain.width, out_w)

    elevation = rows @ terrain.elevation.astype(np.float64) @ cols.T

    votes = np.stack(
        [rows @ (terrain.cover == code).astype(np.float64) @ cols.T for code in LandCover]
    )
    # argmax keeps the first maximum, i.e. the lowest class code
    cover = np.argmax(np.round(votes, 9), axis=0).astype(np.uint8)
    return elevation, cover
