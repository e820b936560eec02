"""Discrete conservative Q-learning objectives over the 27-action set."""

from dataclasses import dataclass

import numpy as np

from core.exceptions.domain import DimensionMismatch
from core.learnkit.mlp import Mlp, backward, forward, predict


@dataclass(frozen=True)
class Batch:
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    dones: np.ndarray

    @classmethod
    def from_records(cls, records: np.ndarray) -> "Batch":
        return cls(
            states=np.asarray(records["state"], dtype=np.float32),
            actions=np.asarray(records["action"], dtype=np.int64),
            rewards=np.asarray(records["reward"], dtype=np.float64),
            next_states=np.asarray(records["next_state"], dtype=np.float32),
            dones=np.asarray(records["done"], dtype=np.float64),
        )

    def __len__(self) -> int:
        return len(self.actions)


@dataclass(frozen=True)
class CqlLoss:
    total: float
    bellman_mse: float
    conservative: float
    mean_q: float


def logsumexp(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    shift = values.max(axis=-1, keepdims=True)
    return (shift + np.log(np.exp(values - shift).sum(axis=-1, keepdims=True)))[..., 0]


def softmax(logits: np.ndarray) -> np.ndarray:
    logits = np.asarray(logits, dtype=np.float64)
    e = np.exp(logits - logits.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def td_target(batch: Batch, target_q: Mlp, gamma: float) -> np.ndarray:
    """r + gamma * (1 - done) * max_a' Q_target(s', a'); no gradient reaches the target."""
    q_next = predict(target_q, batch.next_states).astype(np.float64)
    return batch.rewards + gamma * (1.0 - batch.dones) * q_next.max(axis=1)


def cql_loss_and_grads(
    q_net: Mlp, batch: Batch, y: np.ndarray, alpha: float
) -> tuple[CqlLoss, list[np.ndarray], np.ndarray]:
    """Bellman MSE plus alpha times the logsumexp penalty; also returns Q(s, .)."""
    n = len(batch)
    if y.shape != (n,):
        raise DimensionMismatch("td target length", n, y.shape)

    q, cache = forward(q_net, batch.states)
    q64 = q.astype(np.float64)
    rows = np.arange(n)
    q_data = q64[rows, batch.actions]

    td_error = q_data - y
    bellman = float(np.mean(td_error**2))
    conservative = float(np.mean(logsumexp(q64) - q_data))

    d_q = alpha / n * softmax(q64)
    d_q[rows, batch.actions] += 2.0 * td_error / n - alpha / n
    grads, _ = backward(q_net, cache, d_q)

    loss = CqlLoss(
        total=bellman + alpha * conservative,
        bellman_mse=bellman,
        conservative=conservative,
        mean_q=float(q_data.mean()),
    )
    return loss, grads, q64


def cql_loss(q_net: Mlp, batch: Batch, y: np.ndarray, alpha: float) -> CqlLoss:
    return cql_loss_and_grads(q_net, batch, y, alpha)[0]


def actor_loss_and_grads(
    actor: Mlp, states: np.ndarray, q_values: np.ndarray, entropy_weight: float
) -> tuple[float, list[np.ndarray]]:
    """-E_pi[Q] - w * H(pi), averaged over states; Q is held constant."""
    logits, cache = forward(actor, states)
    logits = logits.astype(np.float64)
    q_values = np.asarray(q_values, dtype=np.float64)
    if q_values.shape != logits.shape:
        raise DimensionMismatch("q values for actor loss", logits.shape, q_values.shape)

    n = len(logits)
    log_pi = logits - logsumexp(logits)[:, None]
    pi = np.exp(log_pi)
    expected_q = (pi * q_values).sum(axis=1)
    entropy = -(pi * log_pi).sum(axis=1)
    loss = float(-expected_q.mean() - entropy_weight * entropy.mean())

    d_logits = (-pi * (q_values - expected_q[:, None]) + entropy_weight * pi * (log_pi + entropy[:, None])) / n
    grads, _ = backward(actor, cache, d_logits)
    return loss, grads


def actor_loss(actor: Mlp, states: np.ndarray, q_values: np.ndarray, entropy_weight: float) -> float:
    return actor_loss_and_grads(actor, states, q_values, entropy_weight)[0]


def soft_update(target: Mlp, online: Mlp, tau: float) -> None:
    if target.dims != online.dims:
        raise DimensionMismatch("soft update net dims", target.dims, online.dims)
    for t, o in zip(target.parameters(), online.parameters()):
        t *= 1.0 - tau
        t += tau * o
