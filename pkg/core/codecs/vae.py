"""Variational autoencoder codec.

The encoder is a rectified trunk followed by two linear heads for the
posterior mean and log-variance. Latents are sampled by reparameterization
during training only; `encode` returns the posterior mean.
"""

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from core.exceptions.domain import DimensionMismatch
from core.learnkit.mlp import Mlp, backward, forward, init_mlp, predict
from schemas.codecs import CodecKind


@dataclass
class VaeCodec:
    trunk: Mlp
    mu_head: Mlp
    logvar_head: Mlp
    decoder: Mlp
    beta_kl: float = 1e-3

    kind = CodecKind.VAE

    @property
    def d_o(self) -> int:
        return self.trunk.in_dim

    @property
    def d_z(self) -> int:
        return self.mu_head.out_dim

    def posterior(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        h = predict(self.trunk, x)
        return predict(self.mu_head, h), predict(self.logvar_head, h)

    def encode(self, x: np.ndarray) -> np.ndarray:
        return self.posterior(x)[0]

    def decode(self, z: np.ndarray) -> np.ndarray:
        return predict(self.decoder, z)

    def parameters(self) -> list[np.ndarray]:
        return (
            self.trunk.parameters()
            + self.mu_head.parameters()
            + self.logvar_head.parameters()
            + self.decoder.parameters()
        )

    def astype(self, dtype: np.dtype) -> "VaeCodec":
        return VaeCodec(
            trunk=self.trunk.astype(dtype),
            mu_head=self.mu_head.astype(dtype),
            logvar_head=self.logvar_head.astype(dtype),
            decoder=self.decoder.astype(dtype),
            beta_kl=self.beta_kl,
        )

    def to_nets(self) -> dict[str, Mlp]:
        return {
            "trunk": self.trunk,
            "mu_head": self.mu_head,
            "logvar_head": self.logvar_head,
            "decoder": self.decoder,
        }

    def metadata(self) -> dict[str, Any]:
        return {"beta_kl": self.beta_kl}

    @classmethod
    def from_nets(cls, nets: dict[str, Mlp], metadata: dict[str, Any]) -> "VaeCodec":
        return cls(
            trunk=nets["trunk"],
            mu_head=nets["mu_head"],
            logvar_head=nets["logvar_head"],
            decoder=nets["decoder"],
            beta_kl=float(metadata.get("beta_kl", 1e-3)),
        )


@dataclass(frozen=True)
class VaeLoss:
    total: float
    recon: float
    kl: float


def init_vae(d_o: int, d_z: int, hidden_dims: Sequence[int], beta_kl: float, seed: int) -> VaeCodec:
    hidden = list(hidden_dims)
    return VaeCodec(
        trunk=init_mlp([d_o, *hidden], seed, activate_output=True),
        mu_head=init_mlp([hidden[-1], d_z], seed + 1),
        logvar_head=init_mlp([hidden[-1], d_z], seed + 2),
        decoder=init_mlp([d_z, *reversed(hidden), d_o], seed + 3),
        beta_kl=beta_kl,
    )


def kl_gauss(mu: np.ndarray, logvar: np.ndarray) -> float | np.ndarray:
    """KL(N(mu, exp(logvar)) || N(0, I)); one value per row for batched input."""
    mu = np.asarray(mu, dtype=np.float64)
    logvar = np.asarray(logvar, dtype=np.float64)
    kl = 0.5 * (mu**2 + np.exp(logvar) - logvar - 1.0).sum(axis=-1)
    return float(kl) if kl.ndim == 0 else kl


def vae_loss_and_grads(codec: VaeCodec, x: np.ndarray, eps: np.ndarray) -> tuple[VaeLoss, list[np.ndarray]]:
    """Loss terms and gradients ordered like `codec.parameters()`.

    `eps` holds one standard-normal draw per latent dim per sample.
    """
    x = np.atleast_2d(x)
    n = len(x)
    if eps.shape != (n, codec.d_z):
        raise DimensionMismatch("vae noise shape", (n, codec.d_z), eps.shape)

    h, trunk_cache = forward(codec.trunk, x)
    mu, mu_cache = forward(codec.mu_head, h)
    logvar, lv_cache = forward(codec.logvar_head, h)
    std = np.exp(0.5 * logvar)
    z = mu + std * eps.astype(mu.dtype)
    x_hat, dec_cache = forward(codec.decoder, z)

    residual = x_hat.astype(np.float64) - x
    recon = float((residual**2).sum() / n)
    kl = float(kl_gauss(mu, logvar).sum() / n)
    beta = codec.beta_kl

    dec_grads, dz = backward(codec.decoder, dec_cache, 2.0 * residual / n)
    d_mu = dz + beta * mu / n
    d_logvar = dz * eps * 0.5 * std + beta * 0.5 * (np.exp(logvar) - 1.0) / n
    mu_grads, dh_mu = backward(codec.mu_head, mu_cache, d_mu)
    lv_grads, dh_lv = backward(codec.logvar_head, lv_cache, d_logvar)
    trunk_grads, _ = backward(codec.trunk, trunk_cache, dh_mu + dh_lv)

    loss = VaeLoss(total=recon + beta * kl, recon=recon, kl=kl)
    return loss, trunk_grads + mu_grads + lv_grads + dec_grads


def vae_loss(codec: VaeCodec, x: np.ndarray, eps: np.ndarray) -> VaeLoss:
    return vae_loss_and_grads(codec, x, eps)[0]
