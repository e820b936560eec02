import csv
from pathlib import Path
from typing import Callable, Iterator

import numpy as np
from loguru import logger

from core.codecs.autoencoder import AeCodec, ae_loss_and_grads, init_ae
from core.codecs.vae import VaeCodec, init_vae, vae_loss_and_grads
from core.exceptions.config import ConfigurationError
from core.exceptions.domain import DomainError
from core.formats.binary import atomic_path
from core.learnkit.adam import adam_init, adam_step
from schemas.codecs import ReprConfig

LOG_COLUMNS = ("epoch", "recon", "kl")

# (batch, epoch rng) -> (recon, kl, grads)
StepFn = Callable[[np.ndarray, np.random.Generator], tuple[float, float, list[np.ndarray]]]


def iterate_minibatches(n: int, batch_size: int, rng: np.random.Generator) -> Iterator[np.ndarray]:
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start : start + batch_size]


def _check_shapes(states: np.ndarray, d_z: int) -> None:
    if len(states) == 0:
        raise DomainError("cannot train a codec on an empty dataset")
    if d_z >= states.shape[1]:
        raise ConfigurationError(f"latent size {d_z} must be below observation size {states.shape[1]}")


def write_training_log(path: str | Path, rows: list[tuple[int, float, float]]) -> None:
    with atomic_path(path) as tmp:
        with open(tmp, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(LOG_COLUMNS)
            for epoch, recon, kl in rows:
                writer.writerow([epoch, repr(recon), repr(kl)])


def run_epochs(
    states: np.ndarray,
    params: list[np.ndarray],
    step: StepFn,
    cfg: ReprConfig,
    label: str,
) -> list[tuple[int, float, float]]:
    """Seeded shuffled minibatch training; returns per-epoch sample-weighted means."""
    seed = cfg.seed or 0
    shuffle_rng = np.random.default_rng(seed)
    noise_rng = np.random.default_rng([seed, 2])
    optimizer = adam_init(params, cfg.lr)

    rows = []
    for epoch in range(1, cfg.epochs + 1):
        recon_sum = kl_sum = 0.0
        for idx in iterate_minibatches(len(states), cfg.batch, shuffle_rng):
            # sorted for sequential memmap reads
            batch = np.asarray(states[np.sort(idx)], dtype=np.float32)
            recon, kl, grads = step(batch, noise_rng)
            adam_step(optimizer, params, grads)
            recon_sum += recon * len(idx)
            kl_sum += kl * len(idx)
        rows.append((epoch, recon_sum / len(states), kl_sum / len(states)))
        logger.debug(f"{label} epoch {epoch}: recon {rows[-1][1]:.6f}, kl {rows[-1][2]:.6f}")
    return rows


def train_ae(states: np.ndarray, d_z: int, cfg: ReprConfig) -> tuple[AeCodec, list[tuple[int, float, float]]]:
    _check_shapes(states, d_z)
    codec = init_ae(states.shape[1], d_z, cfg.hidden_dims, cfg.seed or 0)

    def step(batch: np.ndarray, _: np.random.Generator) -> tuple[float, float, list[np.ndarray]]:
        recon, grads = ae_loss_and_grads(codec, batch)
        return recon, 0.0, grads

    rows = run_epochs(states, codec.parameters(), step, cfg, f"ae{d_z}")
    return codec, rows


def train_vae(states: np.ndarray, d_z: int, cfg: ReprConfig) -> tuple[VaeCodec, list[tuple[int, float, float]]]:
    _check_shapes(states, d_z)
    codec = init_vae(states.shape[1], d_z, cfg.hidden_dims, cfg.beta_kl, cfg.seed or 0)

    def step(batch: np.ndarray, noise: np.random.Generator) -> tuple[float, float, list[np.ndarray]]:
        eps = noise.standard_normal((len(batch), d_z)).astype(np.float32)
        loss, grads = vae_loss_and_grads(codec, batch, eps)
        return loss.recon, loss.kl, grads

    rows = run_epochs(states, codec.parameters(), step, cfg, f"vae{d_z}")
    return codec, rows
