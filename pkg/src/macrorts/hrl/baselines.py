"""Non-hierarchical baselines: flat single policy, random macro/primitive play."""
from __future__ import annotations

import random

from ..combat import default_waypoint_plan
from ..engine import Outcome, difficulty, new_game, step
from ..engine.types import (ARMY, BASE, MELEE, PRODUCTION, RANGED,
                            STRUCTURE_KINDS, WORKER, GameState, PrimitiveAction,
                            noop_action, select_action)
from ..errors import ConfigError
from ..mining.macros import MacroAction, instantiate
from .episode import RulePlanResolver
from .topology import FeatureLayout, Hierarchy, build_topology


def single_policy_baseline(macro_set: list[MacroAction], layout: FeatureLayout,
                           seed: int = 0,
                           hidden: tuple[int, ...] = (128, 128, 128)) -> Hierarchy:
    """One flat policy over the full macro set, trained by the same machinery."""
    return build_topology("single", macro_set, layout, seed=seed, hidden=hidden)


def random_macro_baseline(macro_set: list[MacroAction], level: int, games: int,
                          seed: int = 0, max_ticks: int = 1600,
                          map_name: str = "std32") -> float:
    """Win rate of uniformly sampling mined macros each decision."""
    if games < 1:
        raise ConfigError("games must be >= 1")
    if not macro_set:
        raise ConfigError("macro set must be nonempty")
    wins = 0
    for i in range(games):
        game = new_game(seed + i, difficulty(level), max_ticks, map_name)
        rng = random.Random((seed + i) ^ 0xA5A5A5)
        resolver = RulePlanResolver(default_waypoint_plan(game, 0), 0)
        while not game.terminal:
            macro = macro_set[rng.randrange(len(macro_set))]
            for tok in macro.steps:
                step(game, instantiate(tok, game, resolver))
                if game.terminal:
                    break
        wins += game.outcome is Outcome.WIN
    return wins / games


def _random_primitive(rng: random.Random, game: GameState) -> PrimitiveAction:
    w, h = game.map.size
    pos = (rng.randrange(w), rng.randrange(h))
    roll = rng.randrange(7)
    if roll == 0:
        return select_action(rng.choice([WORKER, BASE, PRODUCTION, MELEE, ARMY]))
    if roll == 1:
        return PrimitiveAction("build", rng.choice(list(STRUCTURE_KINDS)), pos=pos)
    if roll == 2:
        return PrimitiveAction("train", rng.choice([WORKER, MELEE, RANGED]))
    if roll == 3:
        return PrimitiveAction("attack", pos=pos, queued=rng.random() < 0.5)
    if roll == 4:
        return PrimitiveAction("move", pos=pos)
    if roll == 5:
        return PrimitiveAction("gather")
    return noop_action()


def random_primitive_baseline(level: int, games: int, seed: int = 0,
                              max_ticks: int = 1600,
                              map_name: str = "std32") -> float:
    """Win rate of uniformly random primitive actions (no macros)."""
    if games < 1:
        raise ConfigError("games must be >= 1")
    wins = 0
    for i in range(games):
        game = new_game(seed + i, difficulty(level), max_ticks, map_name)
        rng = random.Random((seed + i) ^ 0x5A5A5A)
        while not game.terminal:
            step(game, _random_primitive(rng, game))
        wins += game.outcome is Outcome.WIN
    return wins / games
