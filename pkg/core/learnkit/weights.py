"""`UVWT` weight container shared by codecs and policy bundles.

Layout (little-endian): magic, u32 version, u8 kind tag, u32 net count, then
per net: u32 name length, name bytes, u32 layer count, u32 dims[layers + 1],
and f32 W/b per layer. A u32-length metadata block (sorted-key JSON) closes
the file.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import orjson

from core.exceptions.domain import DimensionMismatch
from core.exceptions.formats import FormatError
from core.formats.binary import F32, U8, U32, ByteCursor, atomic_path, pack, read_file
from core.learnkit.mlp import Mlp

WEIGHTS_MAGIC = b"UVWT"
WEIGHTS_VERSION = 1
KIND_MLP_BUNDLE = 0


@dataclass
class WeightFile:
    nets: dict[str, Mlp]
    metadata: dict[str, Any] = field(default_factory=dict)


def _encode_net(name: str, net: Mlp) -> bytes:
    raw_name = name.encode("utf-8")
    chunks = [pack(U32, len(raw_name)), raw_name, pack(U32, len(net.weights))]
    chunks.append(np.asarray(net.dims, dtype=U32).tobytes())
    for w, b in zip(net.weights, net.biases):
        chunks.append(np.ascontiguousarray(w, dtype=F32).tobytes())
        chunks.append(np.ascontiguousarray(b, dtype=F32).tobytes())
    return b"".join(chunks)


def encode_weights(nets: dict[str, Mlp], metadata: dict[str, Any] | None = None) -> bytes:
    metadata = dict(metadata or {})
    metadata["activate_output"] = {name: net.activate_output for name, net in nets.items()}
    meta = orjson.dumps(metadata, option=orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY)
    chunks = [
        WEIGHTS_MAGIC,
        pack(U32, WEIGHTS_VERSION),
        pack(U8, KIND_MLP_BUNDLE),
        pack(U32, len(nets)),
    ]
    chunks.extend(_encode_net(name, net) for name, net in nets.items())
    chunks.extend([pack(U32, len(meta)), meta])
    return b"".join(chunks)


def save_weights(path: str | Path, nets: dict[str, Mlp], metadata: dict[str, Any] | None = None) -> None:
    payload = encode_weights(nets, metadata)
    with atomic_path(path) as tmp:
        tmp.write_bytes(payload)


def decode_weights(buf: bytes, source: str) -> WeightFile:
    cursor = ByteCursor(buf, source)
    cursor.expect_magic(WEIGHTS_MAGIC)
    cursor.expect_version(WEIGHTS_VERSION)

    at = cursor.offset
    kind = cursor.scalar(U8, "kind tag")
    if kind != KIND_MLP_BUNDLE:
        raise FormatError(f"{source}: unknown kind tag {kind}", offset=at)

    layers: dict[str, tuple[list[np.ndarray], list[np.ndarray]]] = {}
    for _ in range(cursor.scalar(U32, "net count")):
        name = cursor.take(cursor.scalar(U32, "net name length"), "net name").decode("utf-8")
        n_layers = cursor.scalar(U32, f"{name} layer count")
        at = cursor.offset
        dims = [int(d) for d in cursor.array(U32, n_layers + 1, f"{name} dims")]
        if n_layers < 1 or min(dims) < 1:
            raise FormatError(f"{source}: net {name!r} has invalid dims {dims}", offset=at)

        weights, biases = [], []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            weights.append(cursor.array(F32, fan_in * fan_out, f"{name} weights").reshape(fan_out, fan_in))
            biases.append(cursor.array(F32, fan_out, f"{name} biases"))
        layers[name] = (weights, biases)

    meta_len = cursor.scalar(U32, "metadata length")
    at = cursor.offset
    try:
        metadata = orjson.loads(cursor.take(meta_len, "metadata"))
    except orjson.JSONDecodeError as e:
        raise FormatError(f"{source}: unreadable metadata block: {e}", offset=at)
    if not isinstance(metadata, dict):
        raise FormatError(f"{source}: metadata block is not an object", offset=at)
    cursor.expect_end()

    activations = metadata.pop("activate_output", {})
    nets = {
        name: Mlp(weights=weights, biases=biases, activate_output=bool(activations.get(name, False)))
        for name, (weights, biases) in layers.items()
    }
    return WeightFile(nets=nets, metadata=metadata)


def load_weights(path: str | Path) -> WeightFile:
    return decode_weights(read_file(path, "weight file"), source=str(path))


def load_into(target: Mlp, source: Mlp, name: str) -> None:
    """Copy loaded parameters into a net built from configuration."""
    if target.dims != source.dims:
        raise DimensionMismatch(f"net {name!r} layer dims", target.dims, source.dims)
    for dst, src in zip(target.parameters(), source.parameters()):
        dst[...] = src
