import numpy as np
import pytest

from core.env.actions import HOLD_ACTION, N_ACTIONS, decode_action, encode_action, quantize_action
from core.env.world import RelayEnv, normalize_rssi
from core.exceptions.config import ConfigurationError
from core.exceptions.domain import DomainError, StateError
from core.feasibility.csfub import FeasibilityOracle, FeasibilityRecord
from core.terrain.generate import generate_map
from core.terrain.grid import LandCover
from helpers import make_flat_map, small_candidate_config, small_env_config
from schemas.env import EnvConfig
from schemas.terrain import MapGenConfig


def test_reset_is_deterministic(flat_env):
    _, first = flat_env.reset(5)
    _, second = flat_env.reset(5)

    assert np.array_equal(first, second)


def test_reset_places_uav_above_base_station(flat_env):
    world, _ = flat_env.reset(0)

    assert world.t == 0
    assert world.uav_pos.tolist() == [1600.0, 1600.0, 165.0]
    for user in world.users:
        assert 400.0 <= user.pos[0] <= 2800.0
        assert 400.0 <= user.pos[1] <= 2800.0
        assert user.pos[2] == 1.5


def test_default_observation_size():
    assert EnvConfig().obs_dim == 5136


def test_observation_matches_configured_size(flat_env, env_cfg):
    _, obs = flat_env.reset(1)

    assert obs.shape == (env_cfg.state_dim,)
    assert obs.dtype == np.float32


def test_state_dim_must_match_layout():
    with pytest.raises(ValueError):
        small_env_config(state_dim=200)


def test_user_region_outside_map_rejected(flat_map):
    with pytest.raises(ConfigurationError):
        RelayEnv(flat_map, small_env_config(user_region_radius_m=2000.0))


@pytest.mark.parametrize(
    ("index", "expected"),
    [(13, (0, 0, 0)), (0, (-1, -1, -1)), (26, (1, 1, 1)), (22, (1, 0, 0)), (15, (0, 1, -1))],
)
def test_decode_action(index, expected):
    assert decode_action(index) == expected


def test_action_encoding_is_bijective():
    assert sorted(encode_action(*decode_action(k)) for k in range(N_ACTIONS)) == list(range(N_ACTIONS))


@pytest.mark.parametrize("index", [-1, 27, 2.5])
def test_decode_action_out_of_range(index):
    with pytest.raises(DomainError):
        decode_action(index)


def test_quantize_action():
    assert quantize_action((0.9, -0.9, 0.0)) == encode_action(1, -1, 0) == 19
    assert quantize_action((1 / 3, 1 / 3, 1 / 3)) == HOLD_ACTION
    assert quantize_action((-1 / 3, -1 / 3, -1 / 3)) == HOLD_ACTION
    assert quantize_action((0.0, 0.0, 0.0)) == 13


def test_quantize_rejects_non_finite():
    with pytest.raises(DomainError):
        quantize_action((float("nan"), 0.0, 0.0))


def test_hold_action_keeps_uav_in_place(flat_env):
    world, _ = flat_env.reset(2)
    start = world.uav_pos.copy()
    for _ in range(3):
        result = flat_env.step(world, HOLD_ACTION)
        assert np.array_equal(result.info.uav_pos, start)


def test_uav_clamped_to_region_and_altitude(flat_env, env_cfg):
    world, _ = flat_env.reset(3)
    for _ in range(env_cfg.episode_len):
        flat_env.step(world, encode_action(1, 1, 1))

    assert world.uav_pos[0] <= 2800.0
    assert world.uav_pos[1] <= 2800.0
    assert env_cfg.uav_alt_min_m <= world.uav_pos[2] <= env_cfg.uav_alt_max_m

    env = RelayEnv(make_flat_map(), small_env_config(episode_len=30))
    world, _ = env.reset(3)
    for _ in range(30):
        env.step(world, encode_action(-1, -1, -1))
    assert world.uav_pos.tolist() == [400.0, 400.0, 30.0]


def test_all_users_served_gives_full_reward(flat_env):
    world, _ = flat_env.reset(4)
    result = flat_env.step(world, HOLD_ACTION)

    assert result.info.n_served == result.info.n_star == 3
    assert result.reward == 1.0


def _fixed_record(n_served: int, n_star: int):
    def evaluate(self, world):
        return FeasibilityRecord(t=world.t, n_star=n_star, best_placement=np.zeros(3), n_served_actual=n_served)

    return evaluate


def test_reward_is_ratio_to_bound(flat_env, monkeypatch):
    monkeypatch.setattr(FeasibilityOracle, "evaluate", _fixed_record(2, 3))
    world, _ = flat_env.reset(0)

    assert flat_env.step(world, HOLD_ACTION).reward == pytest.approx(2 / 3)


def test_reward_zero_when_infeasible(flat_env, monkeypatch):
    monkeypatch.setattr(FeasibilityOracle, "evaluate", _fixed_record(0, 0))
    world, _ = flat_env.reset(0)

    assert flat_env.step(world, HOLD_ACTION).reward == 0.0


def test_episode_ends_exactly_at_horizon(flat_env, env_cfg):
    world, _ = flat_env.reset(6)
    dones = [flat_env.step(world, HOLD_ACTION).done for _ in range(env_cfg.episode_len)]

    assert dones == [False] * (env_cfg.episode_len - 1) + [True]
    with pytest.raises(StateError):
        flat_env.step(world, HOLD_ACTION)


def test_user_arrives_and_draws_new_waypoint(flat_env):
    world, _ = flat_env.reset(7)
    user = world.users[0]
    user.waypoint = np.array([1500.0, 1500.0])
    user.pos[:2] = [1450.0, 1500.0]

    flat_env.advance_users(world)

    assert user.pos[:2].tolist() == [1500.0, 1500.0]
    assert not np.array_equal(user.waypoint, [1500.0, 1500.0])


def test_user_step_length_bounded(flat_env, env_cfg):
    world, _ = flat_env.reset(8)
    travel = env_cfg.user_speed_mps * env_cfg.dt_s
    for _ in range(env_cfg.episode_len):
        before = world.user_positions()
        flat_env.step(world, HOLD_ACTION)
        moved = np.hypot(*(world.user_positions() - before)[:, :2].T)
        assert np.all(moved <= travel + 1e-9)


def test_user_trajectories_ignore_uav_actions(flat_env, env_cfg):
    rng = np.random.default_rng(0)
    world_a, _ = flat_env.reset(9)
    world_b, _ = flat_env.reset(9)
    for _ in range(env_cfg.episode_len):
        flat_env.step(world_a, HOLD_ACTION)
        flat_env.step(world_b, int(rng.integers(0, N_ACTIONS)))
        assert np.array_equal(world_a.user_positions(), world_b.user_positions())


def test_observations_stay_in_unit_range(env_cfg):
    terrain = generate_map(MapGenConfig(height=8, width=8, seed=2))
    env = RelayEnv(terrain, env_cfg, candidates=small_candidate_config())
    rng = np.random.default_rng(1)
    world, obs = env.reset(10)
    for _ in range(env_cfg.episode_len):
        assert obs.shape == (env_cfg.state_dim,)
        assert np.all(np.isfinite(obs))
        assert obs.min() >= 0.0 and obs.max() <= 1.0
        obs = env.step(world, int(rng.integers(0, N_ACTIONS))).next_obs


def test_rssi_normalization_endpoints():
    assert normalize_rssi(np.array([-120.0, -70.0, -200.0, 0.0])).tolist() == [0.0, 1.0, 0.0, 1.0]


def test_map_channels_on_flat_dense_map(env_cfg):
    env = RelayEnv(make_flat_map(elevation=50.0, cover=LandCover.DENSE), env_cfg)
    _, obs = env.reset(0)
    cells = env_cfg.obs_map_h * env_cfg.obs_map_w

    assert np.all(obs[:cells] == 0.0)
    assert np.all(obs[cells : 2 * cells] == 1.0)


def test_continuous_step_quantizes(flat_env):
    world_a, _ = flat_env.reset(11)
    world_b, _ = flat_env.reset(11)
    flat_env.step_continuous(world_a, (0.9, -0.9, 0.0))
    flat_env.step(world_b, 19)

    assert np.array_equal(world_a.uav_pos, world_b.uav_pos)
