import hashlib
from pathlib import Path
from typing import Any

import numpy as np
from loguru import logger

from core.codecs.autoencoder import AeCodec
from core.codecs.pca import PcaCodec, fit_pca
from core.codecs.training import train_ae, train_vae, write_training_log
from core.codecs.vae import VaeCodec
from core.dataset.io import DatasetWriter, open_dataset
from core.exceptions.domain import DimensionMismatch
from core.exceptions.formats import FormatError
from core.formats.binary import read_file
from core.learnkit.weights import decode_weights, save_weights
from schemas.codecs import CodecKind, ReprConfig

Codec = PcaCodec | AeCodec | VaeCodec

CODEC_TYPES: dict[CodecKind, type] = {
    CodecKind.PCA: PcaCodec,
    CodecKind.AE: AeCodec,
    CodecKind.VAE: VaeCodec,
}

RAW_CODEC_ID = "raw"
ENCODE_CHUNK = 4096


def fit_codec(
    states: np.ndarray,
    cfg: ReprConfig,
    log_path: str | Path | None = None,
) -> Codec:
    kind = CodecKind(cfg.kind)
    logger.info(f"Fitting {kind.value} codec: d_o={states.shape[1]}, d_z={cfg.d_z}, rows={len(states)}")
    if kind is CodecKind.PCA:
        codec: Codec = fit_pca(states, cfg.d_z, cfg.pca_max_samples, cfg.seed or 0)
        rows = [(0, reconstruction_mse(codec, states[: cfg.pca_max_samples]), 0.0)]
    elif kind is CodecKind.AE:
        codec, rows = train_ae(states, cfg.d_z, cfg)
    else:
        codec, rows = train_vae(states, cfg.d_z, cfg)

    if log_path is not None:
        write_training_log(log_path, rows)
    return codec


def encode(codec: Codec, o: np.ndarray) -> np.ndarray:
    o = np.asarray(o)
    if o.shape[-1] != codec.d_o:
        raise DimensionMismatch(f"{codec.kind.value} codec input size", codec.d_o, o.shape[-1])
    return codec.encode(o)


def decode(codec: Codec, z: np.ndarray) -> np.ndarray:
    z = np.asarray(z)
    if z.shape[-1] != codec.d_z:
        raise DimensionMismatch(f"{codec.kind.value} codec latent size", codec.d_z, z.shape[-1])
    return codec.decode(z)


def reconstruction_mse(codec: Codec, x: np.ndarray) -> float:
    """Mean over rows of the squared-error sum, in float64."""
    x = np.asarray(x, dtype=np.float64)
    residual = np.asarray(decode(codec, encode(codec, x)), dtype=np.float64) - x
    return float((residual**2).sum() / len(x))


def codec_metadata(codec: Codec, extra: dict[str, Any] | None = None) -> dict[str, Any]:
    return {
        **(extra or {}),
        **codec.metadata(),
        "kind": codec.kind.value,
        "d_o": codec.d_o,
        "d_z": codec.d_z,
    }


def save_codec(path: str | Path, codec: Codec, extra: dict[str, Any] | None = None) -> None:
    save_weights(path, codec.to_nets(), codec_metadata(codec, extra))


def codec_id_from_bytes(kind: str, d_z: int, payload: bytes) -> str:
    return f"{kind}{d_z}-{hashlib.sha256(payload).hexdigest()[:12]}"


def load_codec(path: str | Path) -> tuple[Codec, str]:
    """Codec plus its id, derived from kind, d_z and the file hash."""
    payload = read_file(path, "codec file")
    weights = decode_weights(payload, source=str(path))
    meta = weights.metadata

    try:
        kind = CodecKind(meta.get("kind"))
    except ValueError:
        raise FormatError(f"{path}: weight file is not a codec (kind={meta.get('kind')!r})")

    try:
        codec = CODEC_TYPES[kind].from_nets(weights.nets, meta)
    except KeyError as e:
        raise FormatError(f"{path}: {kind.value} codec is missing net {e}")

    if codec.d_o != meta.get("d_o") or codec.d_z != meta.get("d_z"):
        raise FormatError(
            f"{path}: metadata dims ({meta.get('d_o')}, {meta.get('d_z')}) "
            f"disagree with stored nets ({codec.d_o}, {codec.d_z})"
        )
    return codec, codec_id_from_bytes(kind.value, codec.d_z, payload)


def encode_dataset(codec: Codec, data_path: str | Path, out_path: str | Path) -> int:
    """Rewrite a dataset with encoded states; actions, rewards and flags are copied."""
    dataset = open_dataset(data_path, expected_state_dim=codec.d_o)
    with DatasetWriter(out_path, codec.d_z) as writer:
        for start in range(0, dataset.count, ENCODE_CHUNK):
            block = dataset.records[start : start + ENCODE_CHUNK]
            writer.append(
                encode(codec, block["state"]),
                block["action"],
                block["reward"],
                encode(codec, block["next_state"]),
                block["done"],
            )
        count = writer.count
    logger.info(f"Encoded {count} transitions from {data_path} into {out_path} (d_z={codec.d_z})")
    return count
