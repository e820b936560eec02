import numpy as np
from loguru import logger

from core.exceptions.config import ConfigurationError
from core.terrain.grid import LandCover, TerrainMap
from schemas.terrain import MapGenConfig


def _smoothstep(t: np.ndarray) -> np.ndarray:
    return t * t * (3.0 - 2.0 * t)


def _value_noise(rng: np.random.Generator, height: int, width: int, period: float) -> np.ndarray:
    """One octave of lattice value noise with smoothstep interpolation."""
    lattice = rng.random((int(np.ceil(height / period)) + 2, int(np.ceil(width / period)) + 2))

    fy = np.arange(height) / period
    fx = np.arange(width) / period
    iy = np.floor(fy).astype(np.int64)
    ix = np.floor(fx).astype(np.int64)
    ty = _smoothstep(fy - iy)[:, None]
    tx = _smoothstep(fx - ix)[None, :]

    v00 = lattice[iy[:, None], ix[None, :]]
    v01 = lattice[iy[:, None], ix[None, :] + 1]
    v10 = lattice[iy[:, None] + 1, ix[None, :]]
    v11 = lattice[iy[:, None] + 1, ix[None, :] + 1]

    top = v00 * (1.0 - tx) + v01 * tx
    bottom = v10 * (1.0 - tx) + v11 * tx
    return top * (1.0 - ty) + bottom * ty


def fractal_noise(rng: np.random.Generator, height: int, width: int, octaves: int) -> np.ndarray:
    """Octave-summed value noise normalized to [0, 1]."""
    base_period = max(height, width) / 2.0
    total = np.zeros((height, width), dtype=np.float64)
    for octave in range(octaves):
        period = max(base_period / 2**octave, 1.0)
        total += 0.5**octave * _value_noise(rng, height, width, period)

    span = total.max() - total.min()
    if span <= 0.0:
        return np.zeros_like(total)
    return (total - total.min()) / span


def generate_map(cfg: MapGenConfig) -> TerrainMap:
    if cfg.height < 2 or cfg.width < 2:
        raise ConfigurationError(f"map must be at least 2x2 cells, got {cfg.height}x{cfg.width}")

    rng = np.random.default_rng(cfg.seed or 0)
    relief = fractal_noise(rng, cfg.height, cfg.width, cfg.noise_octaves)
    clutter = fractal_noise(rng, cfg.height, cfg.width, cfg.noise_octaves)

    elevation = (cfg.elevation_amplitude_m * relief).astype(np.float32)

    n_cells = cfg.height * cfg.width
    n_water = int(round(cfg.water_fraction * n_cells))
    n_dense = int(round(cfg.dense_fraction * n_cells))
    n_sparse = int(round(cfg.sparse_fraction * n_cells))

    cover = np.full(n_cells, LandCover.OPEN, dtype=np.uint8)

    # lowest ground floods first
    by_elevation = np.argsort(elevation.ravel(), kind="stable")
    water = by_elevation[:n_water]
    cover[water] = LandCover.WATER

    land = by_elevation[n_water:]
    by_clutter = land[np.argsort(-clutter.ravel()[land], kind="stable")]
    cover[by_clutter[:n_dense]] = LandCover.DENSE
    cover[by_clutter[n_dense : n_dense + n_sparse]] = LandCover.SPARSE

    terrain = TerrainMap(
        elevation=elevation,
        cover=cover.reshape(cfg.height, cfg.width),
        cell_size_m=cfg.cell_size_m,
    )
    logger.debug(f"Generated {cfg.height}x{cfg.width} map with seed {cfg.seed}")
    return terrain
