"""Core simulator types: entities, players, actions, difficulty and map configs.

Coordinates are integer cells, (x, y) with x to the right and y down.
Distances are Chebyshev unless stated otherwise. One `step()` call advances
TICKS_PER_STEP simulator ticks (one agent decision ~ the macro-action cadence).
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum

from ..errors import ConfigError

TICKS_PER_STEP = 8
TICKS_PER_MINUTE = 100  # "match minutes" for time-penalty rewards

# Entity kinds
WORKER = "worker"
MELEE = "melee-unit"
RANGED = "ranged-unit"
BASE = "base"
SUPPLY = "supply-structure"
PRODUCTION = "production-structure"
TECH = "tech-structure"
MINERAL = "mineral-patch"

UNIT_KINDS = (WORKER, MELEE, RANGED)
COMBAT_KINDS = (MELEE, RANGED)
STRUCTURE_KINDS = (BASE, SUPPLY, PRODUCTION, TECH)
ALL_KINDS = UNIT_KINDS + STRUCTURE_KINDS + (MINERAL,)


@dataclass(frozen=True)
class KindStats:
    cost: int
    hp: int
    damage: int = 0
    attack_range: int = 0
    food: int = 0          # food consumed (units) ...
    food_provided: int = 0  # ... or provided (structures)
    build_ticks: int = 0   # train time for units, construction time for structures
    sight: int = 5
    needs_power: bool = False
    needs_tech: bool = False
    aura: bool = False     # projects the power aura


STATS: dict[str, KindStats] = {
    WORKER: KindStats(cost=50, hp=40, damage=1, attack_range=1, food=1, build_ticks=32, sight=5),
    MELEE: KindStats(cost=80, hp=100, damage=3, attack_range=1, food=2, build_ticks=48, sight=5),
    RANGED: KindStats(cost=110, hp=70, damage=6, attack_range=3, food=2, build_ticks=64,
                      sight=6, needs_tech=True),
    BASE: KindStats(cost=300, hp=500, food_provided=10, build_ticks=120, sight=6, aura=True),
    SUPPLY: KindStats(cost=70, hp=150, food_provided=8, build_ticks=56, sight=4, aura=True),
    PRODUCTION: KindStats(cost=120, hp=250, build_ticks=72, sight=4, needs_power=True),
    TECH: KindStats(cost=130, hp=200, build_ticks=72, sight=4, needs_power=True),
    MINERAL: KindStats(cost=0, hp=1, sight=0),
}

POWER_AURA_RADIUS = 4
GATHER_TRIP_TICKS = 10
GATHER_YIELD = 5
MINING_SLOTS_PER_PATCH = 2
FOOD_CAP_MAX = 50
TRAINS = {BASE: (WORKER,), PRODUCTION: (MELEE, RANGED)}


class Outcome(Enum):
    ONGOING = "Ongoing"
    WIN = "Win"
    LOSS = "Loss"
    TIE = "Tie"


# ---------------------------------------------------------------------------
# Primitive actions

SELECT = "select"
BUILD = "build"
TRAIN = "train"
ATTACK = "attack"
MOVE = "move"
GATHER = "gather"
NOOP = "noop"

COMMAND_TYPES = (BUILD, TRAIN, ATTACK, MOVE, GATHER, NOOP)

ARMY = "army"  # select-target tag for "all combat units"


@dataclass(frozen=True)
class PrimitiveAction:
    """One select or command action.

    kind semantics per type:
      select: target = entity id (int), a kind name (picks one), or ARMY
      build:  target = structure kind, pos required
      train:  target = unit kind
      attack: pos required, queued optional
      move:   pos required
      gather: target = mineral entity id or None (nearest with a free slot)
      noop:   nothing
    """
    type: str
    target: int | str | None = None
    pos: tuple[int, int] | None = None
    queued: bool = False

    def is_select(self) -> bool:
        return self.type == SELECT


def select_action(target: int | str) -> PrimitiveAction:
    return PrimitiveAction(SELECT, target)


def noop_action() -> PrimitiveAction:
    return PrimitiveAction(NOOP)


# ---------------------------------------------------------------------------
# Difficulty

@dataclass(frozen=True)
class DifficultyConfig:
    """Scripted-opponent strength knobs. Levels 8-10 cheat."""
    level: int
    attack_tick: int        # never attacks before this tick
    army_target: int        # combat units required before launching an attack
    rebuild: bool           # rebuilds lost structures
    income_multiplier: float = 1.0
    vision_cheat: bool = False
    worker_target: int = 6
    production_target: int = 1
    army_cap: int = 6       # stops producing combat units beyond this
    uses_tech: bool = False

    def __post_init__(self):
        if not 1 <= self.level <= 10:
            raise ConfigError(f"difficulty level must be 1..10, got {self.level}")
        if self.level <= 7 and (self.income_multiplier != 1.0 or self.vision_cheat):
            raise ConfigError("cheating bonuses are reserved for levels 8-10")


DIFFICULTY_LEVELS: dict[int, DifficultyConfig] = {
    1: DifficultyConfig(1, attack_tick=1100, army_target=3, rebuild=False,
                        worker_target=4, production_target=1, army_cap=3),
    2: DifficultyConfig(2, attack_tick=950, army_target=4, rebuild=False,
                        worker_target=5, production_target=1, army_cap=4),
    3: DifficultyConfig(3, attack_tick=850, army_target=5, rebuild=True,
                        worker_target=6, production_target=1, army_cap=6),
    4: DifficultyConfig(4, attack_tick=750, army_target=6, rebuild=True,
                        worker_target=6, production_target=2, army_cap=8),
    5: DifficultyConfig(5, attack_tick=650, army_target=7, rebuild=True,
                        worker_target=7, production_target=2, army_cap=10),
    6: DifficultyConfig(6, attack_tick=560, army_target=8, rebuild=True,
                        worker_target=8, production_target=2, army_cap=12),
    7: DifficultyConfig(7, attack_tick=480, army_target=9, rebuild=True,
                        worker_target=8, production_target=3, army_cap=16, uses_tech=True),
    8: DifficultyConfig(8, attack_tick=440, army_target=11, rebuild=True,
                        worker_target=9, production_target=3, army_cap=18, uses_tech=True,
                        income_multiplier=1.25, vision_cheat=True),
    9: DifficultyConfig(9, attack_tick=420, army_target=12, rebuild=True,
                        worker_target=9, production_target=3, army_cap=20, uses_tech=True,
                        income_multiplier=1.5),
    10: DifficultyConfig(10, attack_tick=400, army_target=13, rebuild=True,
                         worker_target=10, production_target=4, army_cap=24, uses_tech=True,
                         income_multiplier=2.0, vision_cheat=True),
}


def difficulty(level: int) -> DifficultyConfig:
    try:
        return DIFFICULTY_LEVELS[level]
    except KeyError:
        raise ConfigError(f"unknown difficulty level {level!r}") from None


# ---------------------------------------------------------------------------
# Maps

@dataclass(frozen=True)
class MapConfig:
    name: str
    width: int = 32
    height: int = 32
    # candidate spawn sites; a game picks one per player (opposite pairing)
    spawn_sites: tuple[tuple[int, int], ...] = ()
    patches_per_site: int = 4
    patch_minerals: int = 3000

    @property
    def size(self) -> tuple[int, int]:
        return self.width, self.height


def _corner_sites(w: int, h: int, margin: int) -> tuple[tuple[int, int], ...]:
    m = margin
    return ((m, m), (w - 1 - m, h - 1 - m), (w - 1 - m, m), (m, h - 1 - m))


MAPS: dict[str, MapConfig] = {
    # default: four corner candidate sites, random opposite spawns
    "std32": MapConfig("std32", 32, 32, _corner_sites(32, 32, 5)),
    # fixed left/right spawns, shortest rush distance
    "flat32": MapConfig("flat32", 32, 32, ((5, 16), (26, 16))),
    # larger map, longer marches
    "big48": MapConfig("big48", 48, 48, _corner_sites(48, 48, 6)),
}


def map_config(name: str) -> MapConfig:
    try:
        return MAPS[name]
    except KeyError:
        raise ConfigError(f"unknown map {name!r}") from None


# ---------------------------------------------------------------------------
# Entities and game state

@dataclass
class Entity:
    id: int
    owner: int              # 0, 1, or -1 for neutral minerals
    kind: str
    x: int
    y: int
    hp: int
    max_hp: int
    selected: bool = False
    # construction/production
    complete: bool = True
    remaining_build: int = 0
    queue: list = field(default_factory=list)       # (unit_kind, ticks_left)
    # orders: list of (order_type, x, y) consumed front-first; ATTACK/MOVE only
    orders: list = field(default_factory=list)
    # gathering
    gather_target: int | None = None
    gather_timer: int = 0
    minerals_left: int = 0  # mineral patches only

    @property
    def pos(self) -> tuple[int, int]:
        return self.x, self.y

    def is_structure(self) -> bool:
        return self.kind in STRUCTURE_KINDS


@dataclass
class ScoreState:
    """Cumulative per-player score counters (the simulator's detailed score)."""
    kill_unit_value: int = 0
    kill_struc_value: int = 0
    total_value_units: int = 0       # cost of currently living units
    total_value_structures: int = 0  # cost of currently living (complete) structures
    worker_idle_ticks: int = 0
    production_idle_ticks: int = 0

    def snapshot(self) -> "ScoreState":
        return ScoreState(self.kill_unit_value, self.kill_struc_value,
                          self.total_value_units, self.total_value_structures,
                          self.worker_idle_ticks, self.production_idle_ticks)


@dataclass
class PlayerState:
    minerals: int = 50
    food_used: int = 0
    food_cap: int = 0
    income_multiplier: float = 1.0
    vision_cheat: bool = False
    spent_minerals: int = 0
    gathered_minerals: int = 0
    spawn: tuple[int, int] = (0, 0)
    score: ScoreState = field(default_factory=ScoreState)


@dataclass
class GameState:
    seed: int
    tick: int
    max_ticks: int
    map: MapConfig
    difficulty: DifficultyConfig
    entities: dict[int, Entity]
    players: list[PlayerState]
    # engine + player-1 script stream; player 0 draws from rng_p0 so that
    # replaying recorded player-0 actions regenerates player 1 identically
    rng: random.Random
    rng_p0: random.Random = None  # type: ignore[assignment]
    next_id: int = 0
    outcome: Outcome = Outcome.ONGOING
    # (x, y) -> entity id for blocking entities (structures + minerals)
    blocked: dict[tuple[int, int], int] = field(default_factory=dict)
    # per-player scouted-cell memory, row-major [y][x]
    scouted: list = field(default_factory=list)

    def action_rng(self, player: int) -> random.Random:
        return self.rng_p0 if player == 0 else self.rng

    @property
    def terminal(self) -> bool:
        return self.outcome is not Outcome.ONGOING

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.map.width and 0 <= y < self.map.height

    def alloc_id(self) -> int:
        i = self.next_id
        self.next_id += 1
        return i

    def own_entities(self, player: int):
        return (e for e in self.entities.values() if e.owner == player)

    def count(self, player: int, kind: str, complete_only: bool = False) -> int:
        return sum(1 for e in self.entities.values()
                   if e.owner == player and e.kind == kind
                   and (e.complete or not complete_only))

    def unit_counts(self, player: int) -> dict[str, int]:
        """Per-kind counts of a player's entities (built + under construction)."""
        counts = dict.fromkeys(ALL_KINDS[:-1], 0)
        for e in self.entities.values():
            if e.owner == player:
                counts[e.kind] += 1
        return counts

    def army_count(self, player: int) -> int:
        return sum(1 for e in self.entities.values()
                   if e.owner == player and e.kind in COMBAT_KINDS)

    def structures_alive(self, player: int) -> int:
        return sum(1 for e in self.entities.values()
                   if e.owner == player and e.kind in STRUCTURE_KINDS)
