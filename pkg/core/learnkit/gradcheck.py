"""Central finite differences for checking analytic gradients."""

from typing import Callable

import numpy as np


def numeric_gradients(loss: Callable[[], float], params: list[np.ndarray], h: float = 1e-3) -> list[np.ndarray]:
    """Perturb each entry of `params` in place; `loss` must read them on every call."""
    grads = []
    for p in params:
        g = np.zeros(p.shape, dtype=np.float64)
        flat = p.reshape(-1)
        for i in range(flat.size):
            saved = flat[i]
            flat[i] = saved + h
            plus = float(loss())
            flat[i] = saved - h
            minus = float(loss())
            flat[i] = saved
            g.reshape(-1)[i] = (plus - minus) / (2.0 * h)
        grads.append(g)
    return grads


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-6) -> float:
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    return float(np.max(np.abs(a - n) / np.maximum(np.abs(a) + np.abs(n), floor), initial=0.0))


def max_relative_error(analytic: list[np.ndarray], numeric: list[np.ndarray]) -> float:
    return max((relative_error(a, n) for a, n in zip(analytic, numeric)), default=0.0)
