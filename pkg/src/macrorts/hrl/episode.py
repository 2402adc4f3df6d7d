"""Episode execution over the controller/sub-policy hierarchy.

Every K leaf decisions (the global sub-decision counter), each non-leaf node
along the active path flushes its pending transition (deferred next-state) and
re-picks a child. Leaves act every sub-decision: pick a macro (or a combat
network action), execute its primitive steps one engine decision each, and
record the reward earned across that execution. Rewards accumulate into every
pending ancestor, so a node's reward is exactly the sum of the leaf rewards
in its window.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from ..approx import sample_action
from ..combat import (AttackWaypointPlan, advance_plan, army_focus_location,
                      default_waypoint_plan, resolve_network_command,
                      rule_target, NetworkModel)
from ..engine.game import step
from ..engine.observe import observe_battle, observe_controller, observe_scalar
from ..engine.types import GameState, Outcome
from ..errors import UsageError
from ..mining.macros import PositionResolver, instantiate
from ..rewards import RewardSpec, RewardTracker
from .topology import Hierarchy, PolicyNode

OBS_FNS = {
    "controller": observe_controller,
    "scalar": observe_scalar,
    "battle": observe_battle,
}


class RulePlanResolver(PositionResolver):
    """Macro position resolver whose attack coordinates follow the waypoint
    plan (queued attacks); a move step regroups the wave on the army focus
    before the queued strike launches it together."""

    def __init__(self, plan: AttackWaypointPlan, player: int = 0):
        super().__init__(player)
        self.plan = plan

    def attack_pos(self, state: GameState):
        return rule_target(state, self.plan, self.player)

    def move_pos(self, state: GameState):
        return army_focus_location(state, "battle", self.player)


@dataclass
class RawTransition:
    obs: np.ndarray
    action: tuple[int, ...]
    reward: float
    next_obs: np.ndarray
    done: bool
    behavior_prob: float


@dataclass
class EpisodeResult:
    outcome: Outcome
    ticks: int
    sub_decisions: int
    controller_decisions: int
    trajectories: dict[str, list[RawTransition]]
    # chronological (active leaf, reward) per sub-decision
    decision_log: list[tuple[str, float]] = field(default_factory=list)


@dataclass
class _Pending:
    obs: np.ndarray
    action: tuple[int, ...]
    prob: float
    reward: float = 0.0


def _observe(node: PolicyNode, state: GameState) -> np.ndarray:
    return OBS_FNS[node.obs_kind](state, 0).astype(np.float32)


def run_episode(hierarchy: Hierarchy, game: GameState, reward_spec: RewardSpec,
                policy_rng: random.Random) -> EpisodeResult:
    if game.terminal:
        raise UsageError("run_episode needs a fresh game")
    tracker = RewardTracker(reward_spec)
    tracker.reset(game)
    plan = default_waypoint_plan(game, 0)
    resolver = RulePlanResolver(plan, 0)
    trajectories: dict[str, list[RawTransition]] = {n: [] for n in hierarchy.nodes}
    pending: dict[str, _Pending] = {}
    active_path: list[str] = []
    decision_log: list[tuple[str, float]] = []
    sub_t = 0
    controller_decisions = 0
    K = hierarchy.K
    root = hierarchy.node(hierarchy.root)

    def flush_pending(state: GameState, done: bool):
        for name, p in list(pending.items()):
            node = hierarchy.node(name)
            trajectories[name].append(RawTransition(
                p.obs, p.action, p.reward, _observe(node, state), done, p.prob))
            del pending[name]

    def choose_path(state: GameState) -> list[str]:
        nonlocal controller_decisions
        path = []
        node = root
        while not node.is_leaf:
            obs = _observe(node, state)
            idx, prob = sample_action(node.params, obs, policy_rng)
            pending[node.name] = _Pending(obs, idx, prob)
            if node.name == hierarchy.root:
                controller_decisions += 1
            path.append(node.name)
            node = hierarchy.node(node.children[idx[0]])
        path.append(node.name)
        return path

    while not game.terminal:
        if sub_t % K == 0:
            flush_pending(game, done=False)
            active_path = choose_path(game)
        leaf = hierarchy.node(active_path[-1])
        obs = _observe(leaf, game)
        action, prob = sample_action(leaf.params, obs, policy_rng)
        if leaf.network_leaf:
            model = NetworkModel(leaf.params,
                                 sentinel=hierarchy.combat_mode == "mixture")
            for prim in resolve_network_command(game, model, action[0], action[1],
                                                rule_plan=plan, player=0):
                step(game, prim)
                if game.terminal:
                    break
        else:
            macro = leaf.macros[action[0]]
            # instantiate lazily so each position sees the state it executes in
            for tok in macro.steps:
                step(game, instantiate(tok, game, resolver))
                if game.terminal:
                    break
        reward = tracker.step(game, leaf.role)
        for p in pending.values():
            p.reward += reward
        trajectories[leaf.name].append(RawTransition(
            obs, action, reward, _observe(leaf, game), game.terminal, prob))
        decision_log.append((leaf.name, reward))
        sub_t += 1

    flush_pending(game, done=True)
    # the last transition each node made belongs to a finished episode
    for traj in trajectories.values():
        if traj:
            last = traj[-1]
            traj[-1] = RawTransition(last.obs, last.action, last.reward,
                                     last.next_obs, True, last.behavior_prob)
    return EpisodeResult(game.outcome, game.tick, sub_t, controller_decisions,
                         {k: v for k, v in trajectories.items()}, decision_log)
