import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from loguru import logger

from core.cql.bundle import PolicyBundle, init_bundle, save_bundle
from core.cql.losses import Batch, actor_loss_and_grads, cql_loss_and_grads, soft_update, td_target
from core.dataset.io import open_dataset
from core.exceptions.domain import DomainError
from core.formats.binary import atomic_path
from core.learnkit.adam import adam_init, adam_step
from schemas.cql import CqlConfig

LOG_COLUMNS = ("step", "bellman_mse", "conservative", "mean_q")


@dataclass
class TrainResult:
    bundle: PolicyBundle
    log: list[tuple[int, float, float, float]] = field(default_factory=list)


def write_train_log(path: str | Path, rows: list[tuple[int, float, float, float]]) -> None:
    with atomic_path(path) as tmp:
        with open(tmp, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(LOG_COLUMNS)
            for step, bellman, conservative, mean_q in rows:
                writer.writerow([step, repr(bellman), repr(conservative), repr(mean_q)])


def train(
    dataset_path: str | Path,
    cfg: CqlConfig,
    out_path: str | Path | None = None,
    codec_id: str = "raw",
    expected_state_dim: int | None = None,
    log_path: str | Path | None = None,
) -> TrainResult:
    """Offline CQL from a transition file.

    Learning touches nothing but the file: minibatches are drawn uniformly
    with replacement from a seeded generator.
    """
    dataset = open_dataset(dataset_path, expected_state_dim)
    if dataset.count == 0:
        raise DomainError(f"{dataset_path}: dataset has no transitions")

    bundle = init_bundle(dataset.state_dim, cfg, codec_id)

    rng = np.random.default_rng(cfg.seed or 0)
    q_opt = adam_init(bundle.q_net.parameters(), cfg.q_lr)
    actor_opt = adam_init(bundle.actor.parameters(), cfg.actor_lr) if bundle.actor is not None else None

    logger.info(
        f"Training CQL on {dataset_path}: {dataset.count} transitions, d={dataset.state_dim}, "
        f"steps={cfg.train_steps}, alpha={cfg.alpha}, actor={cfg.use_actor}"
    )
    result = TrainResult(bundle=bundle)
    window = np.zeros(3, dtype=np.float64)
    for step in range(1, cfg.train_steps + 1):
        batch = Batch.from_records(dataset.batch(rng.integers(0, dataset.count, size=cfg.batch_size)))
        y = td_target(batch, bundle.target_q, cfg.gamma)
        loss, q_grads, q = cql_loss_and_grads(bundle.q_net, batch, y, cfg.alpha)
        adam_step(q_opt, bundle.q_net.parameters(), q_grads)

        if bundle.actor is not None:
            _, actor_grads = actor_loss_and_grads(bundle.actor, batch.states, q, cfg.entropy_weight)
            adam_step(actor_opt, bundle.actor.parameters(), actor_grads)

        soft_update(bundle.target_q, bundle.q_net, cfg.tau)

        window += (loss.bellman_mse, loss.conservative, loss.mean_q)
        if step % cfg.log_every == 0:
            bellman, conservative, mean_q = (window / cfg.log_every).tolist()
            result.log.append((step, bellman, conservative, mean_q))
            window[:] = 0.0
            logger.info(
                f"step {step}: bellman_mse {bellman:.6f}, conservative {conservative:.6f}, mean_q {mean_q:.6f}"
            )

    if out_path is not None:
        save_bundle(out_path, bundle)
        logger.info(f"Policy bundle written to {out_path}")
    if log_path is not None:
        write_train_log(log_path, result.log)
    return result
