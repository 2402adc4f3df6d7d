"""Reward regimes: terminal win/loss, score deltas, designed unit-count reward.

The designed regime compares per-kind entity counts between consecutive
decisions against expert mean final counts: progress toward the expert's
numbers earns the count delta, overshooting pays it back. Combat units are
aggregated under the "army" kind. Terminal adds beta*outcome - alpha*minutes
(the designed and score regimes share it; win/loss is outcome only).
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .engine.replay import read_replay
from .engine.types import (COMBAT_KINDS, MELEE, PRODUCTION, RANGED, SUPPLY,
                           TECH, TICKS_PER_MINUTE, WORKER, GameState, Outcome,
                           ScoreState)
from .errors import ConfigError, UsageError

ARMY_KIND = "army"
COUNTED_KINDS = (WORKER, SUPPLY, PRODUCTION, TECH, ARMY_KIND)

WINLOSS = "winloss"
SCORE = "score"
DESIGNED = "designed"

ROLE_BASE = "base"
ROLE_BATTLE = "battle"

OUTCOME_VALUE = {Outcome.WIN: 1, Outcome.TIE: 0, Outcome.LOSS: -1}


@dataclass(frozen=True)
class ExpertStats:
    means: dict[str, float]

    def __post_init__(self):
        if any(v < 0 for v in self.means.values()):
            raise ConfigError("expert stats must be nonnegative")

    def mean(self, kind: str) -> float:
        return self.means.get(kind, 0.0)


@dataclass(frozen=True)
class RewardSpec:
    kind: str = DESIGNED
    expert_stats: ExpertStats | None = None
    alpha: float = 10.0   # time penalty per match minute
    beta: float = 50.0    # outcome weight
    omega: float = 100.0  # killed-unit-value normalizer
    rho: float = 50.0     # killed-structure-value normalizer
    unit_bonus: dict = field(default_factory=dict)  # per-kind build bonus

    def __post_init__(self):
        if self.kind not in (WINLOSS, SCORE, DESIGNED):
            raise ConfigError(f"unknown reward kind {self.kind!r}")
        if self.alpha < 0 or self.beta < 0:
            raise ConfigError("alpha and beta must be >= 0")
        if self.omega <= 0 or self.rho <= 0:
            raise ConfigError("omega and rho must be > 0")
        if self.kind == DESIGNED and self.expert_stats is None:
            raise ConfigError("designed rewards need expert stats")
        if self.kind != DESIGNED and self.expert_stats is not None:
            raise ConfigError("expert stats only apply to the designed reward")


def counted_units(state: GameState, player: int) -> dict[str, int]:
    counts = dict.fromkeys(COUNTED_KINDS, 0)
    for e in state.entities.values():
        if e.owner != player:
            continue
        if e.kind in COMBAT_KINDS:
            counts[ARMY_KIND] += 1
        elif e.kind in counts:
            counts[e.kind] += 1
    return counts


def collect_expert_stats(logs: list[str]) -> ExpertStats:
    """Mean end-state counts per kind across expert replay logs."""
    if not logs:
        raise UsageError("collect_expert_stats needs at least one log")
    totals = dict.fromkeys(COUNTED_KINDS, 0.0)
    for path in logs:
        rep = read_replay(path)
        counts = rep.final_counts[0] if rep.final_counts else {}
        for kind in (WORKER, SUPPLY, PRODUCTION, TECH):
            totals[kind] += counts.get(kind, 0)
        totals[ARMY_KIND] += counts.get(MELEE, 0) + counts.get(RANGED, 0)
    n = len(logs)
    return ExpertStats({k: v / n for k, v in totals.items()})


def designed_step_reward(counts_j: dict[str, int], counts_j1: dict[str, int],
                         stats: ExpertStats) -> float:
    """Sum of sign_i * d_i: +d while below the expert mean, -d otherwise."""
    if set(counts_j) != set(counts_j1):
        raise UsageError("count maps must cover the same kinds")
    total = 0.0
    for kind, after in counts_j1.items():
        d = after - counts_j[kind]
        if d == 0:
            continue
        sign = 1.0 if after < stats.mean(kind) else -1.0
        total += sign * d
    return total


def terminal_reward(outcome: int, match_minutes: float, alpha: float,
                    beta: float) -> float:
    if match_minutes < 0:
        raise UsageError("match_minutes must be >= 0")
    return beta * outcome - alpha * match_minutes


def score_reward(prev: ScoreState, cur: ScoreState, role: str,
                 omega: float = 100.0, rho: float = 50.0) -> float:
    if role == ROLE_BATTLE:
        return ((cur.kill_unit_value - prev.kill_unit_value) / omega
                + (cur.kill_struc_value - prev.kill_struc_value) / rho)
    if role == ROLE_BASE:
        value = ((cur.total_value_units - prev.total_value_units)
                 + (cur.total_value_structures - prev.total_value_structures)) / omega
        idle = ((cur.worker_idle_ticks - prev.worker_idle_ticks)
                + (cur.production_idle_ticks - prev.production_idle_ticks)) / rho
        return value - idle
    raise UsageError(f"unknown score role {role!r}")


def winloss_reward(outcome: Outcome, terminal: bool) -> float:
    if not terminal:
        return 0.0
    return float(OUTCOME_VALUE[outcome])


@dataclass
class RewardTracker:
    """Per-episode reward bookkeeping for one player, evaluated at every
    sub-policy decision boundary."""
    spec: RewardSpec
    player: int = 0
    _counts: dict | None = None
    _score: ScoreState | None = None

    def reset(self, state: GameState):
        self._counts = counted_units(state, self.player)
        self._score = state.players[self.player].score.snapshot()

    def step(self, state: GameState, role: str) -> float:
        """Reward earned since the previous call, per the configured regime."""
        if self._counts is None:
            raise UsageError("tracker not reset")
        reward = 0.0
        spec = self.spec
        if spec.kind == DESIGNED:
            counts = counted_units(state, self.player)
            reward += designed_step_reward(self._counts, counts, spec.expert_stats)
            for kind, bonus in spec.unit_bonus.items():
                d = counts.get(kind, 0) - self._counts.get(kind, 0)
                if d > 0:
                    reward += bonus * d
            self._counts = counts
        elif spec.kind == SCORE:
            score = state.players[self.player].score.snapshot()
            reward += score_reward(self._score, score, role, spec.omega, spec.rho)
            self._score = score
        if state.terminal:
            outcome = OUTCOME_VALUE[state.outcome] if self.player == 0 else \
                -OUTCOME_VALUE[state.outcome] if state.outcome is not Outcome.TIE else 0
            if spec.kind == WINLOSS:
                reward += outcome
            else:
                reward += terminal_reward(outcome, state.tick / TICKS_PER_MINUTE,
                                          spec.alpha, spec.beta)
        return reward
