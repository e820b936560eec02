from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from core.learnkit.mlp import Mlp, backward, forward, init_mlp, predict
from schemas.codecs import CodecKind


@dataclass
class AeCodec:
    encoder: Mlp
    decoder: Mlp

    kind = CodecKind.AE

    @property
    def d_o(self) -> int:
        return self.encoder.in_dim

    @property
    def d_z(self) -> int:
        return self.encoder.out_dim

    def encode(self, x: np.ndarray) -> np.ndarray:
        return predict(self.encoder, x)

    def decode(self, z: np.ndarray) -> np.ndarray:
        return predict(self.decoder, z)

    def parameters(self) -> list[np.ndarray]:
        return self.encoder.parameters() + self.decoder.parameters()

    def to_nets(self) -> dict[str, Mlp]:
        return {"encoder": self.encoder, "decoder": self.decoder}

    def metadata(self) -> dict[str, Any]:
        return {}

    @classmethod
    def from_nets(cls, nets: dict[str, Mlp], metadata: dict[str, Any]) -> "AeCodec":
        return cls(encoder=nets["encoder"], decoder=nets["decoder"])


def init_ae(d_o: int, d_z: int, hidden_dims: Sequence[int], seed: int) -> AeCodec:
    hidden = list(hidden_dims)
    return AeCodec(
        encoder=init_mlp([d_o, *hidden, d_z], seed),
        decoder=init_mlp([d_z, *reversed(hidden), d_o], seed + 1),
    )


def ae_loss_and_grads(codec: AeCodec, x: np.ndarray) -> tuple[float, list[np.ndarray]]:
    """Mean over the batch of per-sample squared-error sums, with gradients."""
    n = len(x)
    z, enc_cache = forward(codec.encoder, x)
    x_hat, dec_cache = forward(codec.decoder, z)
    residual = x_hat.astype(np.float64) - x
    recon = float((residual**2).sum() / n)

    dec_grads, dz = backward(codec.decoder, dec_cache, 2.0 * residual / n)
    enc_grads, _ = backward(codec.encoder, enc_cache, dz)
    return recon, enc_grads + dec_grads
