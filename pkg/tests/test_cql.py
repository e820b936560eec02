import csv
import math

import numpy as np
import pytest

from core.codecs.pca import fit_pca
from core.codecs.registry import save_codec
from core.cql.bundle import act, init_bundle, load_bundle, q_values, save_bundle
from core.cql.losses import (
    Batch,
    actor_loss,
    actor_loss_and_grads,
    cql_loss,
    cql_loss_and_grads,
    soft_update,
    td_target,
)
from core.cql.trainer import train
from core.dataset.io import Transition, write_dataset
from core.env.actions import HOLD_ACTION, N_ACTIONS, encode_action
from core.env.world import RelayEnv
from core.exceptions.domain import DimensionMismatch, DomainError
from core.exceptions.formats import FormatError
from core.learnkit.gradcheck import max_relative_error, numeric_gradients
from core.learnkit.mlp import Mlp, init_mlp
from schemas.cql import CqlConfig

EAST = encode_action(1, 0, 0)
S0 = np.array([1.0, 0.0], dtype=np.float32)
S1 = np.array([0.0, 1.0], dtype=np.float32)


def cql_config(**overrides) -> CqlConfig:
    values = {"batch_size": 8, "train_steps": 10, "hidden_dims": [16], "log_every": 5, "seed": 0}
    values.update(overrides)
    return CqlConfig(**values)


def constant_net(in_dim: int, values: np.ndarray) -> Mlp:
    return Mlp(weights=[np.zeros((N_ACTIONS, in_dim))], biases=[np.asarray(values, dtype=np.float64)])


def small_batch(seed: int = 0, n: int = 6, d: int = 4) -> Batch:
    rng = np.random.default_rng(seed)
    return Batch(
        states=rng.normal(size=(n, d)),
        actions=rng.integers(0, N_ACTIONS, n),
        rewards=rng.random(n),
        next_states=rng.normal(size=(n, d)),
        dones=(rng.random(n) < 0.3).astype(np.float64),
    )


def two_state_dataset(path) -> None:
    """East stays in s0 for reward 1; hold in s1 returns to s0 for reward 1."""
    loop = [
        Transition(state=S0, action=EAST, reward=1.0, next_state=S0, done=False),
        Transition(state=S0, action=HOLD_ACTION, reward=0.0, next_state=S1, done=False),
        Transition(state=S1, action=HOLD_ACTION, reward=1.0, next_state=S0, done=False),
        Transition(state=S1, action=EAST, reward=0.0, next_state=S1, done=False),
    ]
    write_dataset(path, loop * 50, state_dim=2)


def test_td_target_uses_max_and_done_mask():
    target = constant_net(2, np.arange(N_ACTIONS, dtype=np.float64))
    batch = Batch(
        states=np.zeros((2, 2)),
        actions=np.array([0, 1]),
        rewards=np.array([1.0, 0.5]),
        next_states=np.zeros((2, 2)),
        dones=np.array([0.0, 1.0]),
    )

    assert td_target(batch, target, gamma=0.9).tolist() == pytest.approx([1.0 + 0.9 * 26.0, 0.5])


def test_conservative_term_on_uniform_q():
    batch = small_batch()
    q_net = constant_net(4, np.zeros(N_ACTIONS))
    loss = cql_loss(q_net, batch, np.zeros(len(batch)), alpha=0.5)

    assert loss.bellman_mse == 0.0
    assert loss.conservative == pytest.approx(math.log(N_ACTIONS))
    assert loss.total == pytest.approx(0.5 * math.log(N_ACTIONS))


def test_zero_alpha_is_plain_bellman_error():
    batch = small_batch()
    q_net = init_mlp([4, 8, N_ACTIONS], seed=0, dtype=np.float64)
    loss = cql_loss(q_net, batch, batch.rewards, alpha=0.0)

    assert loss.total == loss.bellman_mse
    assert loss.conservative > 0.0


def test_cql_gradients_match_finite_differences():
    batch = small_batch(seed=1)
    q_net = init_mlp([4, N_ACTIONS], seed=2, dtype=np.float64)
    y = np.random.default_rng(3).random(len(batch))

    _, analytic, _ = cql_loss_and_grads(q_net, batch, y, alpha=0.7)
    numeric = numeric_gradients(lambda: cql_loss(q_net, batch, y, 0.7).total, q_net.parameters(), h=1e-5)

    assert max_relative_error(analytic, numeric) < 1e-4


def test_cql_rejects_target_length():
    batch = small_batch()

    with pytest.raises(DimensionMismatch):
        cql_loss(init_mlp([4, N_ACTIONS], seed=0), batch, np.zeros(len(batch) + 1), alpha=0.5)


def test_actor_loss_on_uniform_policy():
    states = np.zeros((3, 4))
    q = np.tile(np.arange(N_ACTIONS, dtype=np.float64), (3, 1))
    actor = constant_net(4, np.zeros(N_ACTIONS))

    expected = -np.mean(np.arange(N_ACTIONS)) - 0.1 * math.log(N_ACTIONS)
    assert actor_loss(actor, states, q, entropy_weight=0.1) == pytest.approx(expected)


def test_actor_gradients_match_finite_differences():
    rng = np.random.default_rng(4)
    states = rng.normal(size=(5, 4))
    q = rng.normal(size=(5, N_ACTIONS))
    actor = init_mlp([4, N_ACTIONS], seed=5, dtype=np.float64)

    _, analytic = actor_loss_and_grads(actor, states, q, entropy_weight=0.05)
    numeric = numeric_gradients(lambda: actor_loss(actor, states, q, 0.05), actor.parameters(), h=1e-5)

    assert max_relative_error(analytic, numeric) < 1e-4


def test_soft_update():
    target = constant_net(2, np.zeros(N_ACTIONS))
    online = constant_net(2, np.full(N_ACTIONS, 4.0))
    soft_update(target, online, tau=0.25)

    assert np.all(target.biases[0] == 1.0)

    soft_update(target, online, tau=1.0)
    assert target.equals(online)

    with pytest.raises(DimensionMismatch):
        soft_update(target, constant_net(3, np.zeros(N_ACTIONS)), tau=0.5)


def test_act_ties_keep_lowest_index():
    bundle = init_bundle(2, cql_config(use_actor=False))
    bundle.q_net = constant_net(2, np.zeros(N_ACTIONS))

    assert act(bundle, S0) == 0


def test_act_prefers_actor_when_present():
    bundle = init_bundle(2, cql_config(use_actor=True))
    bundle.q_net = constant_net(2, np.eye(N_ACTIONS)[3])
    bundle.actor = constant_net(2, np.eye(N_ACTIONS)[7])

    assert act(bundle, S0) == 7
    assert np.argmax(q_values(bundle, S0)) == 3


def test_policy_input_size_checked():
    bundle = init_bundle(2, cql_config())

    with pytest.raises(DimensionMismatch):
        act(bundle, np.zeros(3))


def test_bundle_round_trip(tmp_path):
    bundle = init_bundle(5, cql_config(), codec_id="pca3-0123456789ab")
    path = tmp_path / "policy.uvwt"
    save_bundle(path, bundle)
    loaded = load_bundle(path)

    assert loaded.equals(bundle)
    assert loaded.use_actor
    assert loaded.config == bundle.config


def test_load_bundle_rejects_codec_file(tmp_path):
    path = tmp_path / "codec.uvwt"
    save_codec(path, fit_pca(np.random.default_rng(0).normal(size=(10, 4)), d_z=2))

    with pytest.raises(FormatError):
        load_bundle(path)


def test_zero_steps_keeps_initial_bundle(small_dataset):
    cfg = cql_config(train_steps=0)
    result = train(small_dataset, cfg)

    assert result.log == []
    assert result.bundle.equals(init_bundle(6, cfg))


def test_training_log_rows(tmp_path, small_dataset):
    log = tmp_path / "train.csv"
    out = tmp_path / "policy.uvwt"
    result = train(small_dataset, cql_config(train_steps=20), out_path=out, log_path=log)

    assert [row[0] for row in result.log] == [5, 10, 15, 20]
    with open(log, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["step", "bellman_mse", "conservative", "mean_q"]
    assert len(rows) == 5
    assert load_bundle(out).equals(result.bundle)


def test_training_is_deterministic(small_dataset):
    first = train(small_dataset, cql_config())
    second = train(small_dataset, cql_config())

    assert first.bundle.equals(second.bundle)
    assert first.log == second.log


def test_training_never_touches_the_environment(small_dataset, monkeypatch):
    def forbidden(*args, **kwargs):
        raise AssertionError("environment used during offline training")

    monkeypatch.setattr(RelayEnv, "reset", forbidden)
    monkeypatch.setattr(RelayEnv, "step", forbidden)

    train(small_dataset, cql_config(train_steps=15))


def test_training_rejects_empty_dataset(tmp_path):
    path = tmp_path / "empty.uvds"
    write_dataset(path, [], state_dim=6)

    with pytest.raises(DomainError):
        train(path, cql_config())


def test_training_checks_expected_dimension(small_dataset):
    with pytest.raises(DimensionMismatch):
        train(small_dataset, cql_config(), expected_state_dim=5)


@pytest.mark.slow
@pytest.mark.parametrize("steps", [3000, 20_000])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_learns_two_state_loop(tmp_path, seed, steps):
    path = tmp_path / "loop.uvds"
    two_state_dataset(path)
    cfg = cql_config(
        batch_size=64, gamma=0.5, train_steps=steps, q_lr=1e-3, tau=0.05,
        use_actor=False, log_every=1000, seed=seed,
    )
    bundle = train(path, cfg).bundle

    assert act(bundle, S0) == EAST
    assert act(bundle, S1) == HOLD_ACTION


@pytest.mark.slow
def test_penalty_lowers_unseen_action_values(tmp_path):
    path = tmp_path / "loop.uvds"
    two_state_dataset(path)
    unseen = [a for a in range(N_ACTIONS) if a not in (EAST, HOLD_ACTION)]
    states = np.stack([S0, S1])

    def unseen_mean(alpha: float) -> float:
        cfg = cql_config(
            batch_size=64, gamma=0.5, train_steps=2000, q_lr=1e-3, tau=0.05,
            use_actor=False, alpha=alpha, log_every=1000,
        )
        return float(q_values(train(path, cfg).bundle, states)[:, unseen].mean())

    assert unseen_mean(0.5) < unseen_mean(0.0)
