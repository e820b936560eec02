import math

import numpy as np
import pytest

from core.dataset.generate import action_entropy, generate_dataset
from core.dataset.io import DatasetWriter, Transition, open_dataset, read_dataset, write_dataset
from core.dataset.policies import (
    lookahead_placements,
    policy_centroid,
    policy_coverage,
    policy_oracle,
    policy_random,
    step_toward,
)
from core.env.actions import HOLD_ACTION, N_ACTIONS, encode_action
from core.env.world import RelayEnv
from core.exceptions.domain import DimensionMismatch, DomainError
from core.exceptions.formats import ArtifactMissing, FormatError
from helpers import SMALL_STATE_DIM, small_candidate_config, small_env_config
from schemas.dataset import PolicyMix
from schemas.radio import RadioConfig, ThresholdSet

ALL_RANDOM = PolicyMix(random=1.0, centroid=0.0, coverage=0.0, oracle=0.0)
ALL_ORACLE = PolicyMix(random=0.0, centroid=0.0, coverage=0.0, oracle=1.0)


def test_dataset_round_trip(small_dataset, random_transitions):
    assert list(read_dataset(small_dataset)) == random_transitions


def test_open_dataset_header(small_dataset):
    dataset = open_dataset(small_dataset, expected_state_dim=6)

    assert len(dataset) == 40
    assert dataset.state_dim == 6
    assert dataset.states.shape == (40, 6)


def test_truncated_dataset_rejected(small_dataset):
    small_dataset.write_bytes(small_dataset.read_bytes()[:-5])

    with pytest.raises(FormatError):
        open_dataset(small_dataset)


def test_state_dim_mismatch_rejected(small_dataset):
    with pytest.raises(DimensionMismatch):
        open_dataset(small_dataset, expected_state_dim=7)


def test_missing_dataset(tmp_path):
    with pytest.raises(ArtifactMissing):
        open_dataset(tmp_path / "absent.uvds")


def test_empty_dataset(tmp_path):
    path = tmp_path / "empty.uvds"

    assert write_dataset(path, [], state_dim=6) == 0
    assert len(open_dataset(path)) == 0


def test_failed_write_leaves_no_file(tmp_path, random_transitions):
    path = tmp_path / "broken.uvds"

    with pytest.raises(RuntimeError):
        with DatasetWriter(path, state_dim=6) as writer:
            writer.write(random_transitions[0])
            raise RuntimeError("interrupted")

    assert not path.exists()
    assert not (tmp_path / "broken.uvds.partial").exists()


@pytest.mark.parametrize(("action", "reward"), [(27, 0.5), (3, 1.5), (3, -0.1)])
def test_writer_rejects_invalid_transitions(tmp_path, action, reward):
    state = np.zeros(6, dtype=np.float32)
    bad = Transition(state=state, action=action, reward=reward, next_state=state, done=False)

    with pytest.raises(DomainError):
        write_dataset(tmp_path / "bad.uvds", [bad], state_dim=6)


def test_generate_dataset_counts(tmp_path, flat_env):
    path = tmp_path / "data.uvds"
    summary = generate_dataset(flat_env, PolicyMix(), n_transitions=20, seed=3, out_path=path, threads=2)

    assert summary.episodes == 3
    assert summary.transitions == 20
    assert sum(summary.policy_episodes.values()) == 3

    dataset = open_dataset(path, expected_state_dim=SMALL_STATE_DIM)
    dones = np.flatnonzero(dataset.records["done"]).tolist()
    # the last episode is cut at 4 steps and never reaches the horizon
    assert dones == [7, 15]
    assert np.all(dataset.records["action"] < N_ACTIONS)


def test_generate_dataset_mean_reward_matches_file(tmp_path, flat_env):
    path = tmp_path / "data.uvds"
    summary = generate_dataset(flat_env, PolicyMix(), n_transitions=16, seed=0, out_path=path, threads=1)
    rewards = open_dataset(path).records["reward"].astype(np.float64)

    assert summary.mean_reward == pytest.approx(rewards.mean())
    assert 0.0 <= summary.mean_reward <= 1.0


def test_generate_dataset_is_deterministic(tmp_path, flat_env):
    first, second = tmp_path / "a.uvds", tmp_path / "b.uvds"
    generate_dataset(flat_env, PolicyMix(), n_transitions=24, seed=5, out_path=first, threads=1)
    generate_dataset(flat_env, PolicyMix(), n_transitions=24, seed=5, out_path=second, threads=3)

    assert first.read_bytes() == second.read_bytes()


def test_transitions_chain_within_episode(tmp_path, flat_env):
    path = tmp_path / "data.uvds"
    generate_dataset(flat_env, ALL_RANDOM, n_transitions=8, seed=1, out_path=path, threads=1)
    records = open_dataset(path).records

    for t in range(7):
        assert np.array_equal(records["next_state"][t], records["state"][t + 1])


def test_random_behavior_spreads_actions(tmp_path, flat_env):
    summary = generate_dataset(
        flat_env, ALL_RANDOM, n_transitions=40, seed=2, out_path=tmp_path / "d.uvds", threads=1
    )

    assert summary.policy_episodes["random"] == 5
    assert summary.action_entropy_nats > 1.0


def test_action_entropy_bounds():
    assert action_entropy(np.full(10, 4)) == 0.0
    assert action_entropy(np.arange(N_ACTIONS)) == pytest.approx(math.log(N_ACTIONS))
    assert action_entropy(np.array([], dtype=np.int64)) == 0.0


def test_step_toward(flat_env, env_cfg):
    world, _ = flat_env.reset(0)

    assert step_toward(world, np.array([1700.0, 1500.0, 165.0]), env_cfg) == encode_action(1, -1, 0)
    assert step_toward(world, np.array([1640.0, 1560.0, 160.0]), env_cfg) == HOLD_ACTION
    assert step_toward(world, np.array([1600.0, 1600.0, 120.0]), env_cfg) == encode_action(0, 0, -1)


def test_centroid_policy_heads_for_users(flat_env, env_cfg):
    world, _ = flat_env.reset(0)
    for user, xy in zip(world.users, ([500.0, 500.0], [700.0, 600.0], [600.0, 700.0])):
        user.pos[:2] = xy

    assert policy_centroid(world, env_cfg) == encode_action(-1, -1, -1)


def test_lookahead_placements_clamped(flat_env, env_cfg):
    world, _ = flat_env.reset(0)
    world.uav_pos = np.array([2800.0, 400.0, env_cfg.uav_alt_max_m])
    placements = lookahead_placements(world, flat_env)

    assert placements[HOLD_ACTION].tolist() == world.uav_pos.tolist()
    assert placements[encode_action(1, -1, 1)].tolist() == [2800.0, 400.0, env_cfg.uav_alt_max_m]
    assert placements[encode_action(-1, 1, -1)].tolist() == [2700.0, 500.0, env_cfg.uav_alt_max_m - 10.0]


def test_coverage_policy_ties_keep_lowest_index(flat_env):
    world, _ = flat_env.reset(0)

    # every lookahead placement serves all users on open flat ground
    assert policy_coverage(world, flat_env) == 0


def test_oracle_policy_steps_toward_best_placement(flat_env, monkeypatch):
    world, _ = flat_env.reset(0)
    target = world.uav_pos + np.array([0.0, 500.0, -60.0])
    monkeypatch.setattr(flat_env.oracle, "cs_fub", lambda _: (3, target))

    assert policy_oracle(world, flat_env) == 15


def test_oracle_policy_holds_on_best_placement(flat_env, monkeypatch):
    world, _ = flat_env.reset(0)
    monkeypatch.setattr(flat_env.oracle, "cs_fub", lambda _: (3, world.uav_pos.copy()))

    assert policy_oracle(world, flat_env) == HOLD_ACTION


def test_random_policy_is_uniform():
    rng = np.random.default_rng(0)
    counts = np.bincount([policy_random(rng) for _ in range(27_000)], minlength=N_ACTIONS)
    expected = 27_000 / N_ACTIONS

    assert counts.sum() == 27_000
    assert np.all(np.abs(counts - expected) <= 0.2 * expected)
    # 26 degrees of freedom
    assert ((counts - expected) ** 2 / expected).sum() < 60.0


@pytest.mark.slow
def test_oracle_behavior_earns_more_than_random(tmp_path, flat_map):
    # short access range, so where the UAV sits decides who is served
    radio = RadioConfig(thresholds=ThresholdSet(tau_a_dbm=-66.0, tau_b_dbm=-90.0))
    env = RelayEnv(flat_map, small_env_config(episode_len=60), radio=radio, candidates=small_candidate_config())

    oracle = generate_dataset(env, ALL_ORACLE, n_transitions=300, seed=0, out_path=tmp_path / "o.uvds", threads=1)
    random = generate_dataset(env, ALL_RANDOM, n_transitions=300, seed=0, out_path=tmp_path / "r.uvds", threads=1)

    assert oracle.policy_episodes["oracle"] == random.policy_episodes["random"] == 5
    assert oracle.mean_reward >= random.mean_reward
