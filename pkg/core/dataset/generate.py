import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from loguru import logger

from config import settings
from core.dataset.io import DatasetWriter
from core.dataset.policies import BEHAVIORS
from core.env.actions import N_ACTIONS
from core.env.world import RelayEnv
from schemas.dataset import BEHAVIOR_POLICIES, PolicyMix


@dataclass
class EpisodeRollout:
    policy: str
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    dones: np.ndarray


@dataclass
class DatasetSummary:
    episodes: int
    transitions: int
    mean_reward: float
    policy_episodes: dict[str, int] = field(default_factory=dict)
    action_entropy_nats: float = 0.0


def action_entropy(actions: np.ndarray) -> float:
    counts = np.bincount(actions, minlength=N_ACTIONS).astype(np.float64)
    if counts.sum() == 0:
        return 0.0
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


def behavior_rng(seed: int, episode_index: int) -> np.random.Generator:
    # separate stream from the env rng, which is seeded with seed + episode_index
    return np.random.default_rng([seed + episode_index, 1])


def roll_episode(env: RelayEnv, mix: PolicyMix, seed: int, episode_index: int, n_steps: int) -> EpisodeRollout:
    rng = behavior_rng(seed, episode_index)
    policy = str(rng.choice(BEHAVIOR_POLICIES, p=mix.weights))
    act = BEHAVIORS[policy]

    world, obs = env.reset(seed + episode_index)
    n_steps = min(n_steps, env.cfg.episode_len)
    states = np.empty((n_steps, env.obs_dim), dtype=np.float32)
    next_states = np.empty_like(states)
    actions = np.empty(n_steps, dtype=np.uint16)
    rewards = np.empty(n_steps, dtype=np.float32)
    dones = np.empty(n_steps, dtype=bool)

    for t in range(n_steps):
        action = act(world, env, rng)
        result = env.step(world, action)
        states[t] = obs
        actions[t] = action
        rewards[t] = result.reward
        next_states[t] = result.next_obs
        dones[t] = result.done
        obs = result.next_obs

    return EpisodeRollout(policy, states, actions, rewards, next_states, dones)


def generate_dataset(
    env: RelayEnv,
    mix: PolicyMix,
    n_transitions: int,
    seed: int,
    out_path: str | Path,
    threads: int | None = None,
) -> DatasetSummary:
    """Roll whole behavior-policy episodes until n_transitions are written.

    One policy drives each episode; episode k uses env seed `seed + k`.
    """
    threads = threads or settings.THREADS
    T = env.cfg.episode_len
    n_episodes = math.ceil(n_transitions / T)
    lengths = [min(T, n_transitions - k * T) for k in range(n_episodes)]

    summary = DatasetSummary(
        episodes=n_episodes,
        transitions=0,
        mean_reward=0.0,
        policy_episodes={name: 0 for name in BEHAVIOR_POLICIES},
    )
    reward_sum = 0.0
    action_counts = np.zeros(N_ACTIONS, dtype=np.int64)

    logger.info(f"Generating {n_transitions} transitions over {n_episodes} episodes (threads={threads})")
    with DatasetWriter(out_path, env.obs_dim) as writer, ThreadPoolExecutor(max_workers=threads) as pool:
        for start in range(0, n_episodes, threads):
            indices = range(start, min(start + threads, n_episodes))
            rollouts = pool.map(lambda k: roll_episode(env, mix, seed, k, lengths[k]), indices)
            # map yields in submission order, so the file never depends on scheduling
            for k, rollout in zip(indices, rollouts):
                writer.append(rollout.states, rollout.actions, rollout.rewards, rollout.next_states, rollout.dones)
                summary.policy_episodes[rollout.policy] += 1
                reward_sum += float(rollout.rewards.astype(np.float64).sum())
                action_counts += np.bincount(rollout.actions, minlength=N_ACTIONS)
                logger.debug(f"Episode {k} ({rollout.policy}): mean reward {rollout.rewards.mean():.4f}")
        summary.transitions = writer.count

    summary.mean_reward = reward_sum / summary.transitions
    summary.action_entropy_nats = action_entropy(np.repeat(np.arange(N_ACTIONS), action_counts))
    logger.info(
        f"Dataset written to {out_path}: {summary.transitions} transitions, mean reward {summary.mean_reward:.4f}"
    )
    return summary
