from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import orjson

from core.env.actions import N_ACTIONS
from core.exceptions.domain import DimensionMismatch
from core.exceptions.formats import FormatError
from core.learnkit.mlp import Mlp, init_mlp, predict
from core.learnkit.weights import load_weights, save_weights
from schemas.cql import CqlConfig

POLICY_KIND = "policy"


@dataclass
class PolicyBundle:
    q_net: Mlp
    target_q: Mlp
    actor: Mlp | None
    input_dim: int
    codec_id: str = "raw"
    config: dict[str, Any] = field(default_factory=dict)

    @property
    def use_actor(self) -> bool:
        return self.actor is not None

    def equals(self, other: "PolicyBundle") -> bool:
        actors_match = (self.actor is None and other.actor is None) or (
            self.actor is not None and other.actor is not None and self.actor.equals(other.actor)
        )
        return (
            self.input_dim == other.input_dim
            and self.codec_id == other.codec_id
            and self.q_net.equals(other.q_net)
            and self.target_q.equals(other.target_q)
            and actors_match
        )


def init_bundle(input_dim: int, cfg: CqlConfig, codec_id: str = "raw") -> PolicyBundle:
    seed = cfg.seed or 0
    dims = [input_dim, *cfg.hidden_dims, N_ACTIONS]
    q_net = init_mlp(dims, seed)
    return PolicyBundle(
        q_net=q_net,
        target_q=q_net.copy(),
        actor=init_mlp(dims, seed + 1) if cfg.use_actor else None,
        input_dim=input_dim,
        codec_id=codec_id,
        config=cfg.model_dump(mode="json"),
    )


def _check_input(bundle: PolicyBundle, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x)
    if x.shape[-1] != bundle.input_dim:
        raise DimensionMismatch("policy input size", bundle.input_dim, x.shape[-1])
    return x


def q_values(bundle: PolicyBundle, x: np.ndarray) -> np.ndarray:
    return predict(bundle.q_net, _check_input(bundle, x))


def act(bundle: PolicyBundle, x: np.ndarray) -> int:
    """Greedy action for one input vector; argmax keeps the lowest index on ties."""
    net = bundle.actor if bundle.actor is not None else bundle.q_net
    return int(np.argmax(predict(net, _check_input(bundle, x))))


def save_bundle(path: str | Path, bundle: PolicyBundle) -> None:
    nets = {"q": bundle.q_net, "target_q": bundle.target_q}
    if bundle.actor is not None:
        nets["actor"] = bundle.actor
    metadata = {
        "kind": POLICY_KIND,
        "d": bundle.input_dim,
        "codec": bundle.codec_id,
        "config": orjson.dumps(bundle.config, option=orjson.OPT_SORT_KEYS).decode("utf-8"),
    }
    save_weights(path, nets, metadata)


def load_bundle(path: str | Path) -> PolicyBundle:
    weights = load_weights(path)
    meta = weights.metadata
    if meta.get("kind") != POLICY_KIND:
        raise FormatError(f"{path}: weight file is not a policy bundle (kind={meta.get('kind')!r})")
    if "q" not in weights.nets or "target_q" not in weights.nets:
        raise FormatError(f"{path}: policy bundle needs nets 'q' and 'target_q'")

    q_net, target_q = weights.nets["q"], weights.nets["target_q"]
    if q_net.dims != target_q.dims:
        raise FormatError(f"{path}: q dims {q_net.dims} differ from target dims {target_q.dims}")
    if q_net.in_dim != meta.get("d"):
        raise FormatError(f"{path}: metadata input size {meta.get('d')} but q net takes {q_net.in_dim}")

    return PolicyBundle(
        q_net=q_net,
        target_q=target_q,
        actor=weights.nets.get("actor"),
        input_dim=q_net.in_dim,
        codec_id=str(meta.get("codec", "raw")),
        config=orjson.loads(meta.get("config", "{}")),
    )
