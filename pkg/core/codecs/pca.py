from dataclasses import dataclass
from typing import Any

import numpy as np
from loguru import logger

from core.exceptions.config import ConfigurationError
from core.exceptions.domain import DomainError
from core.learnkit.mlp import Mlp
from schemas.codecs import CodecKind


@dataclass
class PcaCodec:
    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray
    total_variance: float

    kind = CodecKind.PCA

    @property
    def d_o(self) -> int:
        return self.components.shape[1]

    @property
    def d_z(self) -> int:
        return self.components.shape[0]

    @property
    def explained_variance_ratio(self) -> np.ndarray:
        if self.total_variance <= 0:
            return np.zeros_like(self.explained_variance)
        return self.explained_variance / self.total_variance

    def encode(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x) - self.mean) @ self.components.T

    def decode(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z) @ self.components + self.mean

    def to_nets(self) -> dict[str, Mlp]:
        # decoder bias carries the mean, encoder weights the component rows
        components = self.components.astype(np.float32)
        return {
            "encoder": Mlp(weights=[components], biases=[np.zeros(self.d_z, dtype=np.float32)]),
            "decoder": Mlp(weights=[components.T.copy()], biases=[self.mean.astype(np.float32)]),
        }

    def metadata(self) -> dict[str, Any]:
        return {
            "explained_variance": [float(v) for v in self.explained_variance],
            "total_variance": float(self.total_variance),
        }

    @classmethod
    def from_nets(cls, nets: dict[str, Mlp], metadata: dict[str, Any]) -> "PcaCodec":
        return cls(
            mean=nets["decoder"].biases[0].copy(),
            components=nets["encoder"].weights[0].copy(),
            explained_variance=np.asarray(metadata.get("explained_variance", []), dtype=np.float64),
            total_variance=float(metadata.get("total_variance", 0.0)),
        )


def fit_pca(states: np.ndarray, d_z: int, max_samples: int | None = None, seed: int = 0) -> PcaCodec:
    """Top-d_z principal directions from the SVD of the centered data.

    Each component is sign-normalized so its largest-magnitude entry is
    positive. With `max_samples`, a seeded row subsample feeds the SVD.
    """
    n, d_o = states.shape
    if d_z > d_o:
        raise ConfigurationError(f"pca latent size {d_z} exceeds observation size {d_o}")
    if n < d_z + 1:
        raise DomainError(f"pca with d_z={d_z} needs at least {d_z + 1} samples, got {n}")

    if max_samples is not None and n > max_samples:
        rows = np.sort(np.random.default_rng(seed).choice(n, size=max_samples, replace=False))
        x = np.asarray(states[rows], dtype=np.float64)
    else:
        x = np.asarray(states, dtype=np.float64)

    mean = x.mean(axis=0)
    _, singular, vt = np.linalg.svd(x - mean, full_matrices=False)
    components = vt[:d_z]
    pivots = np.argmax(np.abs(components), axis=1)
    signs = np.sign(components[np.arange(d_z), pivots])
    components = components * signs[:, None]

    variance = singular**2 / (len(x) - 1)
    codec = PcaCodec(
        mean=mean,
        components=components,
        explained_variance=variance[:d_z],
        total_variance=float(variance.sum()),
    )
    logger.debug(
        f"PCA fit on {len(x)} rows: d_z={d_z}, explained {codec.explained_variance_ratio.sum():.4f}"
    )
    return codec
