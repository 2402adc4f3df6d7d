"""Iteration loop: clear buffers, collect M episodes, update node parameters.

Collection is embarrassingly parallel; every episode derives its engine and
policy RNG streams from (run seed, iteration, episode index) alone, so results
are bitwise identical for any worker count, including the strict single-worker
mode. Updates are single-writer at the end-of-iteration barrier.
"""
from __future__ import annotations

import multiprocessing as mp
import os
import random
from dataclasses import dataclass, field

import numpy as np

from ..engine import Outcome, difficulty, new_game
from ..errors import ConfigError
from ..rewards import RewardSpec
from ..rl import PpoConfig, Transition, UpdateStats, ppo_update
from .episode import EpisodeResult, run_episode
from .topology import (SIMULTANEOUS, TRAIN_ALL, Hierarchy, TrainableMask,
                       UpdateMode, save_hierarchy)


@dataclass(frozen=True)
class EnvConfig:
    level: int = 1
    map_name: str = "std32"
    max_ticks: int = 1600


@dataclass
class IterationRecord:
    iteration: int
    episodes: int
    wins: int
    ties: int
    losses: int
    win_rate: float
    tie_rate: float
    mean_ticks: float
    node_stats: dict[str, UpdateStats] = field(default_factory=dict)


def episode_seed(run_seed: int, iteration: int, index: int) -> int:
    return (run_seed * 1_000_003 + iteration * 10_007 + index) & 0x7FFFFFFF


def collect_episode(hierarchy: Hierarchy, env: EnvConfig, reward_spec: RewardSpec,
                    seed: int) -> EpisodeResult:
    game = new_game(seed, difficulty(env.level), env.max_ticks, env.map_name)
    policy_rng = random.Random(seed ^ 0x5DEECE66D)
    return run_episode(hierarchy, game, reward_spec, policy_rng)


_FORK_CTX: dict = {}


def _fork_collect(seed: int) -> EpisodeResult:
    return collect_episode(_FORK_CTX["hierarchy"], _FORK_CTX["env"],
                           _FORK_CTX["reward"], seed)


def collect_iteration(hierarchy: Hierarchy, env: EnvConfig, reward_spec: RewardSpec,
                      seeds: list[int], workers: int) -> list[EpisodeResult]:
    if workers <= 1 or len(seeds) <= 1:
        return [collect_episode(hierarchy, env, reward_spec, s) for s in seeds]
    _FORK_CTX.update(hierarchy=hierarchy, env=env, reward=reward_spec)
    ctx = mp.get_context("fork")
    with ctx.Pool(min(workers, len(seeds))) as pool:
        results = pool.map(_fork_collect, seeds)
    _FORK_CTX.clear()
    return results


def train(hierarchy: Hierarchy, env: EnvConfig, reward_spec: RewardSpec,
          ppo_cfg: PpoConfig, iterations: int, episodes_per_iter: int,
          mode: UpdateMode = SIMULTANEOUS, mask: TrainableMask = TRAIN_ALL,
          seed: int = 0, workers: int = 1, on_iteration=None,
          best_dir: str | None = None, stop_win_rate: float | None = None,
          start_iteration: int = 0, best_so_far: float = -1.0,
          ) -> tuple[Hierarchy, list[IterationRecord]]:
    """Run Z iterations of M episodes; returns the hierarchy and curve records.

    `on_iteration(record)` fires after each iteration (CSV hook). The best
    checkpoint is saved only when an iteration's win rate beats the previous
    best. `stop_win_rate` stops early once reached.
    """
    if iterations < 1 or episodes_per_iter < 1:
        raise ConfigError("iterations and episodes_per_iter must be >= 1")
    trainable = mask.trainable(hierarchy)
    rotation = mode.rotation or tuple(trainable)
    records: list[IterationRecord] = []
    best = best_so_far
    for z in range(start_iteration, start_iteration + iterations):
        hierarchy.clear_buffers()
        seeds = [episode_seed(seed, z, i) for i in range(episodes_per_iter)]
        results = collect_iteration(hierarchy, env, reward_spec, seeds, workers)
        if not results:
            raise ConfigError("iteration completed zero episodes")
        wins = sum(r.outcome is Outcome.WIN for r in results)
        ties = sum(r.outcome is Outcome.TIE for r in results)
        for r in results:
            for name, traj in r.trajectories.items():
                hierarchy.node(name).buffer.extend(
                    Transition(t.obs, t.action, t.reward, t.next_obs, t.done,
                               t.behavior_prob) for t in traj)
        if mode.variant == "alternate":
            to_update = [rotation[z % len(rotation)]]
        else:
            to_update = trainable
        node_stats: dict[str, UpdateStats] = {}
        for name in to_update:
            node = hierarchy.node(name)
            if name not in trainable or not node.buffer:
                continue
            rng = np.random.default_rng(episode_seed(seed, z, 999_983))
            node_stats[name] = ppo_update(node.buffer, node.params, node.adam,
                                          ppo_cfg, rng)
        record = IterationRecord(
            iteration=z, episodes=len(results), wins=wins, ties=ties,
            losses=len(results) - wins - ties, win_rate=wins / len(results),
            tie_rate=ties / len(results),
            mean_ticks=sum(r.ticks for r in results) / len(results),
            node_stats=node_stats)
        records.append(record)
        if on_iteration is not None:
            on_iteration(record)
        if best_dir is not None and record.win_rate > best:
            best = record.win_rate
            save_hierarchy(best_dir, hierarchy)
        if stop_win_rate is not None and record.win_rate >= stop_win_rate:
            break
    return hierarchy, records


def evaluate(hierarchy: Hierarchy, env: EnvConfig, games: int, seed: int = 0,
             workers: int = 1, reward_spec: RewardSpec | None = None) -> dict:
    """Fixed-seed evaluation battery; reports win/tie/loss rates and length."""
    if games < 1:
        raise ConfigError("games must be >= 1")
    spec = reward_spec or RewardSpec(kind="winloss")
    seeds = [episode_seed(seed, 0, i) for i in range(games)]
    results = collect_iteration(hierarchy, env, spec, seeds, workers)
    wins = sum(r.outcome is Outcome.WIN for r in results)
    ties = sum(r.outcome is Outcome.TIE for r in results)
    return {"level": env.level, "games": games, "wins": wins, "ties": ties,
            "losses": games - wins - ties, "win_rate": wins / games,
            "tie_rate": ties / games, "loss_rate": (games - wins - ties) / games,
            "mean_ticks": sum(r.ticks for r in results) / games}
