"""Deterministic link budget: free-space pathloss, terrain occlusion, clutter loss.

All positions are absolute 3D points in meters (z above the map datum).
"""

from typing import Any

import numpy as np

from core.exceptions.domain import DomainError
from core.terrain.grid import TerrainMap, cover_at_many, elevation_at_many
from schemas.radio import LinkParams, ThresholdSet

# 20 log10(4 pi / c) for distance in km and frequency in MHz
FSPL_CONSTANT_DB = 32.44
MIN_DISTANCE_M = 1.0


def fspl_db_many(distance_m: Any, freq_mhz: float) -> np.ndarray:
    distance_m = np.asarray(distance_m, dtype=np.float64)
    if not np.all(np.isfinite(distance_m)) or not np.isfinite(freq_mhz):
        raise DomainError("fspl_db requires finite distance and frequency")
    if freq_mhz <= 0:
        raise DomainError(f"frequency must be positive, got {freq_mhz} MHz")
    distance_km = np.maximum(distance_m, MIN_DISTANCE_M) / 1000.0
    return 20.0 * np.log10(distance_km) + 20.0 * np.log10(freq_mhz) + FSPL_CONSTANT_DB


def fspl_db(distance_m: float, freq_mhz: float) -> float:
    return float(fspl_db_many(np.array([distance_m]), freq_mhz)[0])


def coverage_radius_m(tx_power_dbm: float, threshold_dbm: float, freq_mhz: float) -> float:
    """Largest LOS free-space distance at which tx_power - fspl >= threshold."""
    if freq_mhz <= 0:
        raise DomainError(f"frequency must be positive, got {freq_mhz} MHz")
    budget_db = tx_power_dbm - threshold_dbm
    distance_km = 10.0 ** ((budget_db - 20.0 * np.log10(freq_mhz) - FSPL_CONSTANT_DB) / 20.0)
    return float(distance_km * 1000.0)


def absolute_positions(terrain: TerrainMap, points_agl: Any) -> np.ndarray:
    """Convert (x, y, height above local ground) rows to absolute (x, y, z)."""
    points = np.array(points_agl, dtype=np.float64).reshape(-1, 3)
    points[:, 2] += elevation_at_many(terrain, points[:, 0], points[:, 1])
    return points


def _as_points(points: Any) -> np.ndarray:
    return np.asarray(points, dtype=np.float64).reshape(-1, 3)


def los_clear_many(
    terrain: TerrainMap, p1: Any, p2: Any, step_cells: float = 0.5
) -> np.ndarray:
    """Line-of-sight test for each row pair of p1, p2.

    Samples sit at fixed fractions k/n of the segment (endpoints excluded),
    with n chosen so the horizontal spacing is at most step_cells cells.
    """
    p1 = _as_points(p1)
    p2 = _as_points(p2)
    if p1.shape != p2.shape:
        raise DomainError(f"endpoint arrays differ in shape: {p1.shape} vs {p2.shape}")
    if not 0.0 < step_cells <= 1.0:
        raise DomainError(f"los sample step must be in (0, 1] cells, got {step_cells}")
    # endpoint extent checks
    elevation_at_many(terrain, np.concatenate([p1[:, 0], p2[:, 0]]), np.concatenate([p1[:, 1], p2[:, 1]]))

    # order each pair lexicographically so both directions sample the same points
    swap = (p1[:, 0] > p2[:, 0]) | (
        (p1[:, 0] == p2[:, 0])
        & ((p1[:, 1] > p2[:, 1]) | ((p1[:, 1] == p2[:, 1]) & (p1[:, 2] > p2[:, 2])))
    )
    a = np.where(swap[:, None], p2, p1)
    b = np.where(swap[:, None], p1, p2)
    delta = b - a

    spacing = step_cells * terrain.cell_size_m
    horizontal = np.hypot(delta[:, 0], delta[:, 1])
    n = np.maximum(np.ceil(horizontal / spacing), 1.0).astype(np.int64)
    max_n = int(n.max()) if n.size else 1
    if max_n <= 1:
        return np.ones(len(p1), dtype=bool)

    k = np.arange(1, max_n, dtype=np.float64)[None, :]
    valid = k < n[:, None]
    frac = np.where(valid, k / n[:, None], 0.0)

    width_m, height_m = terrain.extent_m
    xs = np.clip(a[:, 0:1] + frac * delta[:, 0:1], 0.0, width_m)
    ys = np.clip(a[:, 1:2] + frac * delta[:, 1:2], 0.0, height_m)
    ground = elevation_at_many(terrain, xs, ys)
    ray = a[:, 2:3] + frac * delta[:, 2:3]

    blocked = valid & (ground - ray > 0.0)
    return ~blocked.any(axis=1)


def los_clear(terrain: TerrainMap, p1: Any, p2: Any, step_cells: float = 0.5) -> bool:
    return bool(los_clear_many(terrain, p1, p2, step_cells)[0])


def rssi_dbm_many(
    terrain: TerrainMap,
    params: LinkParams,
    tx: Any,
    rx: Any,
    tx_power_dbm: float,
    ground_terminal: Any,
) -> np.ndarray:
    tx = _as_points(tx)
    rx = _as_points(rx)
    ground_terminal = _as_points(ground_terminal)

    distance = np.linalg.norm(tx - rx, axis=1)
    pathloss = fspl_db_many(distance, params.freq_mhz)
    blocked = ~los_clear_many(terrain, tx, rx, params.los_sample_step_cells)
    clutter = params.cover_offset_db.as_array()[
        cover_at_many(terrain, ground_terminal[:, 0], ground_terminal[:, 1])
    ]
    return tx_power_dbm - pathloss - params.nlos_penalty_db * blocked - clutter


def rssi_dbm(
    terrain: TerrainMap,
    params: LinkParams,
    tx: Any,
    rx: Any,
    tx_power_dbm: float,
    ground_terminal: Any,
) -> float:
    return float(rssi_dbm_many(terrain, params, tx, rx, tx_power_dbm, ground_terminal)[0])


def access_rssi_many(terrain: TerrainMap, params: LinkParams, uav: Any, users: Any) -> np.ndarray:
    users = _as_points(users)
    uav = np.broadcast_to(_as_points(uav), users.shape)
    return rssi_dbm_many(terrain, params, uav, users, params.uav_tx_dbm, users)


def backhaul_rssi_many(terrain: TerrainMap, params: LinkParams, bs: Any, uav: Any) -> np.ndarray:
    uav = _as_points(uav)
    bs = np.broadcast_to(_as_points(bs), uav.shape)
    return rssi_dbm_many(terrain, params, bs, uav, params.bs_tx_dbm, bs)


def access_ok(
    terrain: TerrainMap,
    params: LinkParams,
    thresholds: ThresholdSet,
    uav_pos: Any,
    user_pos: Any,
) -> bool:
    return bool(access_rssi_many(terrain, params, uav_pos, user_pos)[0] >= thresholds.tau_a_dbm)


def backhaul_ok(
    terrain: TerrainMap,
    params: LinkParams,
    thresholds: ThresholdSet,
    bs_pos: Any,
    uav_pos: Any,
) -> bool:
    return bool(backhaul_rssi_many(terrain, params, bs_pos, uav_pos)[0] >= thresholds.tau_b_dbm)
