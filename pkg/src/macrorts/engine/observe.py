"""Observation builders and the documented feature layout.

Scalar layout (stable, index = position in SCALAR_FEATURES):
the controller sees the CONTROLLER_SLOTS subset (~1/3 of the vector),
base-side policies see the full scalar vector, battle-side policies see the
scalar vector concatenated with the flattened spatial grid.

Spatial observation: SPATIAL_CHANNELS channels over a coarse grid obtained by
pooling COARSE_FACTOR x COARSE_FACTOR cell blocks; every value lies in [0, 1].
"""
from __future__ import annotations

import numpy as np

from ..errors import UsageError
from .types import (BASE, COMBAT_KINDS, MELEE, MINERAL, PRODUCTION, RANGED, STATS,
                    SUPPLY, TECH, TRAINS, WORKER, GameState)

COARSE_FACTOR = 4
SPATIAL_CHANNELS = 5  # own units, enemy units, resources, buildable, selected

_COUNT_KINDS = (WORKER, MELEE, RANGED, BASE, SUPPLY, PRODUCTION, TECH)
_COUNT_NORMS = (20.0, 20.0, 20.0, 4.0, 10.0, 6.0, 2.0)

SCALAR_FEATURES = (
    "game_loop",            # 0
    "minerals",             # 1
    "spent_minerals",       # 2
    "food_cap",             # 3
    "food_used",            # 4
    "food_army",            # 5
    "food_workers",         # 6
    "army_count",           # 7
    "army_worker_ratio",    # 8
    "opponent_difficulty",  # 9
    "kill_unit_value",      # 10
    "kill_struc_value",     # 11
    "total_value_units",    # 12
    "total_value_structures",  # 13
    "worker_idle_ratio",    # 14
    "production_idle_ratio",  # 15
) + tuple(f"count_{k}" for k in _COUNT_KINDS) \
  + ("training_worker", "training_melee", "training_ranged") \
  + ("building_supply", "building_production", "building_tech")

SCALAR_DIM = len(SCALAR_FEATURES)

# global subset used by the controller (~1/3 of the features)
CONTROLLER_SLOTS = (0, 1, 3, 4, 5, 6, 7, 9, 10, 11)


def observe_scalar(state: GameState, player: int) -> np.ndarray:
    if player not in (0, 1):
        raise UsageError(f"invalid player index {player}")
    p = state.players[player]
    v = np.zeros(SCALAR_DIM, dtype=np.float32)
    counts = dict.fromkeys(_COUNT_KINDS, 0)
    training = {WORKER: 0, MELEE: 0, RANGED: 0}
    building = {SUPPLY: 0, PRODUCTION: 0, TECH: 0}
    food_army = 0
    workers = idle_workers = 0
    producers = idle_producers = 0
    for e in state.entities.values():
        if e.owner != player:
            continue
        counts[e.kind] += 1
        if e.kind in COMBAT_KINDS:
            food_army += STATS[e.kind].food
        if e.kind == WORKER:
            workers += 1
            if e.gather_target is None and not e.orders:
                idle_workers += 1
        if e.kind in TRAINS and e.complete:
            producers += 1
            if not e.queue:
                idle_producers += 1
            for kind, _ in e.queue:
                training[kind] += 1
        if not e.complete and e.kind in building:
            building[e.kind] += 1
    v[0] = state.tick / max(state.max_ticks, 1)
    v[1] = p.minerals / 500.0
    v[2] = p.spent_minerals / 1000.0
    v[3] = p.food_cap / 50.0
    v[4] = p.food_used / 50.0
    v[5] = food_army / 50.0
    v[6] = workers / 50.0
    v[7] = (counts[MELEE] + counts[RANGED]) / 20.0
    v[8] = food_army / max(workers, 1) / 5.0
    v[9] = state.difficulty.level / 10.0
    v[10] = p.score.kill_unit_value / 1000.0
    v[11] = p.score.kill_struc_value / 1000.0
    v[12] = p.score.total_value_units / 1000.0
    v[13] = p.score.total_value_structures / 1000.0
    v[14] = idle_workers / max(workers, 1)
    v[15] = idle_producers / max(producers, 1)
    base = 16
    for i, kind in enumerate(_COUNT_KINDS):
        v[base + i] = counts[kind] / _COUNT_NORMS[i]
    t = base + len(_COUNT_KINDS)
    v[t + 0] = training[WORKER] / 6.0
    v[t + 1] = training[MELEE] / 6.0
    v[t + 2] = training[RANGED] / 6.0
    v[t + 3] = building[SUPPLY] / 4.0
    v[t + 4] = building[PRODUCTION] / 4.0
    v[t + 5] = building[TECH] / 4.0
    return v


def spatial_shape(state: GameState) -> tuple[int, int, int]:
    w, h = state.map.size
    return SPATIAL_CHANNELS, h // COARSE_FACTOR, w // COARSE_FACTOR


def observe_spatial(state: GameState, player: int) -> np.ndarray:
    """Channel grid: own density, enemy density (fog-masked), resources,
    buildable fraction, selected. Values in [0, 1]."""
    if player not in (0, 1):
        raise UsageError(f"invalid player index {player}")
    c, gh, gw = spatial_shape(state)
    f = COARSE_FACTOR
    block = float(f * f)
    grid = np.zeros((c, gh, gw), dtype=np.float32)
    cheat = state.players[player].vision_cheat
    scouted = state.scouted[player]
    occupied = np.zeros((gh, gw), dtype=np.float32)
    for e in state.entities.values():
        gx, gy = e.x // f, e.y // f
        if gx >= gw or gy >= gh:
            continue
        if e.kind == MINERAL:
            grid[2, gy, gx] = min(1.0, grid[2, gy, gx]
                                  + e.minerals_left / state.map.patch_minerals / block * f)
            occupied[gy, gx] += 1
        elif e.owner == player:
            grid[0, gy, gx] += 1 / block
            if e.selected:
                grid[4, gy, gx] += 1 / block
            occupied[gy, gx] += 1
        else:
            if cheat or scouted[e.y, e.x]:
                grid[1, gy, gx] += 1 / block
            occupied[gy, gx] += 1
    np.clip(grid[0], 0, 1, out=grid[0])
    np.clip(grid[1], 0, 1, out=grid[1])
    np.clip(grid[4], 0, 1, out=grid[4])
    grid[3] = 1.0 - np.clip(occupied / block, 0, 1)
    return grid


def observe_battle(state: GameState, player: int) -> np.ndarray:
    """Scalar features + flattened spatial grid (the battle-side view)."""
    return np.concatenate([observe_scalar(state, player),
                           observe_spatial(state, player).ravel()])


def battle_dim(state: GameState) -> int:
    c, gh, gw = spatial_shape(state)
    return SCALAR_DIM + c * gh * gw


def observe_controller(state: GameState, player: int) -> np.ndarray:
    return observe_scalar(state, player)[list(CONTROLLER_SLOTS)]
