"""Battle sub-policy models: fixed-waypoint rule, learned network, mixture.

The rule attacks a fixed tour of candidate enemy sites. The network picks one
of {attack-all, retreat-all, noop} plus one of 8 anchor points placed on a
square of side = half the local view, centered on the army focus. The mixture
extends the anchor head with a sentinel index 0 that delegates the coordinate
to the rule's current waypoint.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .approx import NetSpec, Params, sample_action
from .engine.observe import observe_battle
from .engine.types import (ARMY, ATTACK, BASE, COMBAT_KINDS, MOVE, NOOP,
                           STRUCTURE_KINDS, GameState, PrimitiveAction,
                           noop_action, select_action)
from .errors import UsageError

ACTION_ATTACK_ALL = 0
ACTION_RETREAT_ALL = 1
ACTION_NOOP = 2
N_COMBAT_ACTIONS = 3
N_ANCHORS = 8


@dataclass
class AttackWaypointPlan:
    """Ordered fixed map coordinates covering candidate enemy base/mineral
    sites; a cursor advances when the current waypoint is cleared."""
    waypoints: list[tuple[int, int]]
    cursor: int = 0

    def __post_init__(self):
        if not self.waypoints:
            raise UsageError("waypoint plan must be nonempty")

    @property
    def current(self) -> tuple[int, int]:
        return self.waypoints[min(self.cursor, len(self.waypoints) - 1)]

    def visited(self) -> list[tuple[int, int]]:
        return self.waypoints[:min(self.cursor + 1, len(self.waypoints))]


def default_waypoint_plan(state: GameState, player: int = 0) -> AttackWaypointPlan:
    """Candidate enemy sites ordered nearest-first from the player's base."""
    own = state.players[player].spawn
    sites = [s for s in state.map.spawn_sites if s != own]
    sites.sort(key=lambda s: (max(abs(s[0] - own[0]), abs(s[1] - own[1])), s))
    for e in state.entities.values():
        if e.owner < 0:
            continue
    if not all(state.in_bounds(x, y) for x, y in sites):
        raise UsageError("waypoint outside map bounds")
    return AttackWaypointPlan(sites)


def _site_cleared(state: GameState, player: int, site: tuple[int, int]) -> bool:
    x, y = site
    if not state.scouted[player][y, x]:
        return False
    return not any(e.owner == 1 - player and e.kind in STRUCTURE_KINDS
                   and abs(e.x - x) <= 5 and abs(e.y - y) <= 5
                   and state.scouted[player][e.y, e.x]
                   for e in state.entities.values())


def advance_plan(state: GameState, plan: AttackWaypointPlan, player: int = 0):
    while plan.cursor < len(plan.waypoints) - 1 and \
            _site_cleared(state, player, plan.current):
        plan.cursor += 1


def rule_target(state: GameState, plan: AttackWaypointPlan,
                player: int = 0) -> tuple[int, int]:
    """Current waypoint while any remains uncleared, then a sweep over scouted
    enemy structures, then a hunt toward the nearest unscouted cell."""
    advance_plan(state, plan, player)
    if not _site_cleared(state, player, plan.current):
        return plan.current
    best = None
    for e in state.entities.values():
        if (e.owner == 1 - player and e.kind in STRUCTURE_KINDS
                and state.scouted[player][e.y, e.x]):
            if best is None or e.id < best.id:
                best = e
    if best is not None:
        return best.x, best.y
    unseen = np.argwhere(~state.scouted[player])
    if len(unseen):
        cx, cy = plan.current
        d = np.maximum(np.abs(unseen[:, 1] - cx), np.abs(unseen[:, 0] - cy))
        y, x = unseen[int(d.argmin())]
        return int(x), int(y)
    return plan.current


def combat_rule_action(state: GameState, plan: AttackWaypointPlan,
                       player: int = 0) -> PrimitiveAction:
    """Select the army, then attack the current waypoint (queued)."""
    if not any(e.owner == player and e.kind in COMBAT_KINDS
               for e in state.entities.values()):
        return noop_action()
    target = rule_target(state, plan, player)
    selected = [e for e in state.entities.values()
                if e.owner == player and e.selected]
    army_selected = bool(selected) and all(e.kind in COMBAT_KINDS for e in selected) \
        and all(e.selected for e in state.entities.values()
                if e.owner == player and e.kind in COMBAT_KINDS)
    if not army_selected:
        return select_action(ARMY)
    return PrimitiveAction(ATTACK, pos=target, queued=True)


# ---------------------------------------------------------------------------
# Army focus ("camera") strategy

def army_focus_location(state: GameState, chosen: str, player: int = 0) -> tuple[int, int]:
    """base -> own base; battle -> most injured combat unit, else centroid,
    else base."""
    base = next((e for e in state.entities.values()
                 if e.owner == player and e.kind == BASE), None)
    base_pos = (base.x, base.y) if base is not None else state.players[player].spawn
    if chosen == "base":
        return base_pos
    units = [e for e in state.entities.values()
             if e.owner == player and e.kind in COMBAT_KINDS]
    if not units:
        return base_pos
    injured = [(e.max_hp - e.hp, e) for e in units]
    worst = max(injured, key=lambda t: (t[0], -t[1].id))
    if worst[0] > 0:
        return worst[1].x, worst[1].y
    # all units at full health: fall back to the army centroid
    cx = sum(e.x for e in units) // len(units)
    cy = sum(e.y for e in units) // len(units)
    return cx, cy


def anchor_points(state: GameState, center: tuple[int, int]) -> list[tuple[int, int]]:
    """Eight points evenly placed on a centered square of side = half the
    local view; the view itself is half the map side. The center is clamped so
    every anchor stays in bounds and distinct."""
    w, h = state.map.size
    view = min(w, h) // 2
    half = view // 4  # square side = view/2, so half-side = view/4
    cx = min(max(center[0], half), w - 1 - half)
    cy = min(max(center[1], half), h - 1 - half)
    return [(cx - half, cy - half), (cx, cy - half), (cx + half, cy - half),
            (cx + half, cy), (cx + half, cy + half), (cx, cy + half),
            (cx - half, cy + half), (cx - half, cy)]


# ---------------------------------------------------------------------------
# Models

@dataclass
class RuleModel:
    plan: AttackWaypointPlan | None = None

    def battle_net_spec(self, obs_dim: int) -> None:
        return None


@dataclass
class NetworkModel:
    params: Params
    sentinel: bool = False

    @property
    def n_anchor_outputs(self) -> int:
        return N_ANCHORS + (1 if self.sentinel else 0)


@dataclass
class MixtureModel:
    network: NetworkModel
    rule: RuleModel

    def __post_init__(self):
        if not self.network.sentinel:
            raise UsageError("mixture requires the sentinel anchor output")


def network_spec(obs_dim: int, sentinel: bool = False,
                 hidden: tuple[int, ...] = (128, 128, 128),
                 shared_trunk: bool = False) -> NetSpec:
    anchors = N_ANCHORS + (1 if sentinel else 0)
    return NetSpec(input_dim=obs_dim, output_dim=N_COMBAT_ACTIONS + anchors,
                   hidden=hidden, shared_trunk=shared_trunk,
                   action_groups=(N_COMBAT_ACTIONS, anchors))


def combat_network_action(params: Params, spatial_obs: np.ndarray,
                          scalar_obs: np.ndarray, rng) -> tuple[tuple[int, int], float]:
    """Sample (action, anchor) from the two categorical heads."""
    obs = np.concatenate([np.asarray(scalar_obs).ravel(),
                          np.asarray(spatial_obs).ravel()])
    if obs.shape[0] != params.spec.input_dim:
        raise UsageError(f"observation dim {obs.shape[0]} != "
                         f"network input {params.spec.input_dim}")
    (action, anchor), prob = sample_action(params, obs, rng)
    return (action, anchor), prob


def resolve_network_command(state: GameState, model: NetworkModel,
                            action: int, anchor: int,
                            rule_plan: AttackWaypointPlan | None = None,
                            player: int = 0) -> list[PrimitiveAction]:
    """Turn a sampled (action, anchor) pair into primitive steps."""
    if action == ACTION_NOOP:
        return [noop_action()]
    focus = army_focus_location(state, "battle", player)
    anchors = anchor_points(state, focus)
    if model.sentinel:
        if anchor == 0:
            if rule_plan is None:
                raise UsageError("sentinel anchor needs a rule plan")
            advance_plan(state, rule_plan, player)
            pos = rule_plan.current
        else:
            pos = anchors[anchor - 1]
    else:
        pos = anchors[anchor]
    if action == ACTION_ATTACK_ALL:
        return [select_action(ARMY), PrimitiveAction(ATTACK, pos=pos, queued=True)]
    return [select_action(ARMY), PrimitiveAction(MOVE, pos=pos)]


def mixture_action(state: GameState, model: MixtureModel, action: int, anchor: int,
                   player: int = 0) -> list[PrimitiveAction]:
    if model.rule.plan is None:
        model.rule.plan = default_waypoint_plan(state, player)
    return resolve_network_command(state, model.network, action, anchor,
                                   rule_plan=model.rule.plan, player=player)
