"""Scripted players: difficulty-parameterized opponents and the replay expert.

Both follow the same stateless intent machine: each decision recomputes the
most urgent (selection, command) pair from the visible game state; if the
current selection already matches, the command is emitted, otherwise the
select. All memory lives in GameState, which keeps runs reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..placement import Window, sample_build_location
from .types import (ARMY, ATTACK, BASE, BUILD, COMBAT_KINDS, GATHER, MELEE, MOVE,
                    PRODUCTION, RANGED, SELECT, STATS, STRUCTURE_KINDS, SUPPLY, TECH,
                    TICKS_PER_STEP, TRAIN, WORKER, DifficultyConfig, Entity, GameState,
                    PrimitiveAction, noop_action, select_action)

_DEFENSE_RADIUS = 8
_AWAY_FROM_HOME = 12


@dataclass(frozen=True)
class ScriptProfile:
    worker_target: int
    production_target: int
    army_cap: int
    army_target: int
    attack_tick: int
    rebuild: bool
    uses_tech: bool = False
    supply_margin: int = 2
    farthest_first: bool = True     # attack the likely enemy spawn first
    gather_after_build: bool = False  # replay texture: re-gather right after a build
    batch_trains: bool = False      # save up and queue two units per producer visit


EXPERT_PROFILE = ScriptProfile(worker_target=10, production_target=3, army_cap=14,
                               army_target=8, attack_tick=0, rebuild=True,
                               uses_tech=True, supply_margin=4,
                               gather_after_build=True, batch_trains=True)

# replay generation draws on several play styles, like a pool of experts
EXPERT_PROFILES = (
    EXPERT_PROFILE,
    ScriptProfile(worker_target=8, production_target=2, army_cap=12,
                  army_target=5, attack_tick=0, rebuild=True, uses_tech=False,
                  supply_margin=2, gather_after_build=True, batch_trains=True),
    ScriptProfile(worker_target=10, production_target=4, army_cap=18,
                  army_target=11, attack_tick=0, rebuild=True, uses_tech=True,
                  supply_margin=6, gather_after_build=True, batch_trains=True),
)


def profile_for(cfg: DifficultyConfig) -> ScriptProfile:
    return ScriptProfile(worker_target=cfg.worker_target,
                         production_target=cfg.production_target,
                         army_cap=cfg.army_cap, army_target=cfg.army_target,
                         attack_tick=cfg.attack_tick, rebuild=cfg.rebuild,
                         uses_tech=cfg.uses_tech)


def _selected_kinds(state: GameState, player: int) -> set[str]:
    return {e.kind for e in state.entities.values() if e.owner == player and e.selected}


def _candidate_sites(state: GameState, player: int) -> list[tuple[int, int]]:
    own = state.players[player].spawn
    sites = [s for s in state.map.spawn_sites if s != own]
    d = lambda s: max(abs(s[0] - own[0]), abs(s[1] - own[1]))
    return sorted(sites, key=d, reverse=True)


def _site_cleared(state: GameState, player: int, site: tuple[int, int]) -> bool:
    """Scouted and free of known enemy structures."""
    x, y = site
    if not state.scouted[player][y, x]:
        return False
    for e in state.entities.values():
        if (e.owner == 1 - player and e.kind in STRUCTURE_KINDS
                and abs(e.x - x) <= 5 and abs(e.y - y) <= 5
                and state.scouted[player][e.y, e.x]):
            return False
    return True


def _attack_target(state: GameState, player: int,
                   profile: ScriptProfile) -> tuple[int, int] | None:
    if state.players[player].vision_cheat:
        own = state.players[player].spawn
        best = None
        for e in state.entities.values():
            if e.owner == 1 - player and e.kind in STRUCTURE_KINDS:
                d = max(abs(e.x - own[0]), abs(e.y - own[1]))
                if best is None or (d, e.id) < best[0]:
                    best = ((d, e.id), (e.x, e.y))
        if best is not None:
            return best[1]
    sites = _candidate_sites(state, player)
    if not profile.farthest_first:
        sites = sites[::-1]
    for s in sites:
        if not _site_cleared(state, player, s):
            return s
    # everything known is cleared: sweep remaining scouted enemy structures
    for e in state.entities.values():
        if (e.owner == 1 - player and e.kind in STRUCTURE_KINDS
                and state.scouted[player][e.y, e.x]):
            return e.x, e.y
    return sites[0] if sites else None


def _attack_ready(state: GameState, player: int, profile: ScriptProfile,
                  army: int) -> bool:
    """Strong enough to launch, or a wave is already out; halves the wave
    requirement once the enemy has lost structures."""
    me = state.players[player]
    spawn = me.spawn
    attacking = any(e.owner == player and e.kind in COMBAT_KINDS
                    and max(abs(e.x - spawn[0]), abs(e.y - spawn[1])) > _AWAY_FROM_HOME
                    for e in state.entities.values())
    needed = profile.army_target
    if me.score.kill_struc_value > 0:
        needed = max(2, needed // 2)
    launch = state.tick >= profile.attack_tick and army >= needed
    return launch or (attacking and army >= 1)


def _attack_plan(state: GameState, player: int,
                 profile: ScriptProfile) -> PrimitiveAction | None:
    """Next army command: queue the strike behind a rally march, or start one."""
    ents = state.entities
    target = _attack_target(state, player, profile)
    if target is None:
        return None
    marching = any(e.owner == player and e.kind in COMBAT_KINDS and e.orders
                   and all(o[0] == MOVE for o in e.orders) for e in ents.values())
    if marching:
        return PrimitiveAction(ATTACK, pos=target, queued=True)
    idle = [e for e in ents.values() if e.owner == player
            and e.kind in COMBAT_KINDS and not e.orders]
    if not idle:
        return None
    cx = sum(e.x for e in idle) // len(idle)
    cy = sum(e.y for e in idle) // len(idle)
    dist = max(abs(target[0] - cx), abs(target[1] - cy))
    if dist <= 6:
        return PrimitiveAction(ATTACK, pos=target)
    hop = min(10, dist - 3)
    rx = cx + (target[0] - cx) * hop // dist
    ry = cy + (target[1] - cy) * hop // dist
    if all(max(abs(e.x - rx), abs(e.y - ry)) <= 2 for e in idle):
        return PrimitiveAction(ATTACK, pos=target)  # already rallied
    return PrimitiveAction(MOVE, pos=(rx, ry))


def _intent(state: GameState, player: int, profile: ScriptProfile):
    """Return (wanted-selection, command) or None for noop."""
    me = state.players[player]
    ents = state.entities
    counts = state.unit_counts(player)
    army = counts[MELEE] + counts[RANGED]
    base_complete = any(e.owner == player and e.kind == BASE and e.complete
                        for e in ents.values())
    spawn = me.spawn

    # defend: enemy units near our structures; mass at home when outnumbered
    if army > 0:
        threat = None
        threat_size = 0
        for e in ents.values():
            if e.owner != 1 - player or e.kind in STRUCTURE_KINDS or e.kind == "mineral-patch":
                continue
            for s in ents.values():
                if (s.owner == player and s.kind in STRUCTURE_KINDS
                        and abs(e.x - s.x) <= _DEFENSE_RADIUS
                        and abs(e.y - s.y) <= _DEFENSE_RADIUS):
                    threat_size += 1
                    if threat is None:
                        threat = (e.x, e.y)
                    break
        if threat is not None:
            home = [e for e in ents.values() if e.owner == player and e.kind in COMBAT_KINDS
                    and max(abs(e.x - spawn[0]), abs(e.y - spawn[1])) <= _AWAY_FROM_HOME]
            idle = [e for e in home if not e.orders
                    and max(abs(e.x - threat[0]), abs(e.y - threat[1])) > STATS[e.kind].sight]
            if idle:
                if len(home) >= max(2, int(threat_size * 0.75)):
                    return ARMY, PrimitiveAction(ATTACK, pos=threat)
                return ARMY, PrimitiveAction(MOVE, pos=spawn)

    if profile.gather_after_build:
        just_started = any(e.owner == player and not e.complete
                           and e.kind in STRUCTURE_KINDS
                           and e.remaining_build > STATS[e.kind].build_ticks - 2 * TICKS_PER_STEP
                           for e in ents.values())
        if just_started and WORKER in _selected_kinds(state, player):
            # chain another needed build on the same selection when affordable,
            # otherwise send the builder back to minerals
            chained = _next_build(state, player, profile, counts, me)
            if chained is not None:
                return WORKER, chained
            return WORKER, PrimitiveAction(GATHER)

    # finish an attack burst before economy intents touch the selection
    attack_ready = _attack_ready(state, player, profile, army)
    sel_kinds = _selected_kinds(state, player)
    if attack_ready and sel_kinds and sel_kinds <= set(COMBAT_KINDS):
        plan = _attack_plan(state, player, profile)
        if plan is not None:
            return ARMY, plan

    # continue a production burst on the current selection before anything else
    if army < profile.army_cap and me.minerals >= 2 * STATS[MELEE].cost:
        sel_producer = next((e for e in ents.values()
                             if e.owner == player and e.selected and e.kind == PRODUCTION
                             and e.complete and 0 < len(e.queue) < 2), None)
        if sel_producer is not None:
            tech_done = any(e.owner == player and e.kind == TECH and e.complete
                            for e in ents.values())
            queued = [k for e in ents.values()
                      if e.owner == player and e.kind == PRODUCTION for k, _ in e.queue]
            kind = MELEE
            if tech_done and queued.count(RANGED) + counts[RANGED] < queued.count(MELEE) + counts[MELEE]:
                kind = RANGED
            if me.minerals >= STATS[kind].cost and me.food_used + STATS[kind].food <= me.food_cap:
                return PRODUCTION, PrimitiveAction(TRAIN, kind)

    # economy and tech
    if base_complete and counts[WORKER] < profile.worker_target and me.minerals >= STATS[WORKER].cost \
            and me.food_used + 1 <= me.food_cap:
        base = next(e for e in ents.values()
                    if e.owner == player and e.kind == BASE and e.complete)
        if not base.queue:
            return BASE, PrimitiveAction(TRAIN, WORKER)

    build = _next_build(state, player, profile, counts, me)
    if build is not None:
        return WORKER, build

    if army < profile.army_cap:
        tech_done = any(e.owner == player and e.kind == TECH and e.complete
                        for e in ents.values())
        # batching experts save up and queue two units per producer visit
        pair_cost = STATS[MELEE].cost + (STATS[RANGED].cost if tech_done
                                         else STATS[MELEE].cost)
        if profile.batch_trains:
            queue_limit = 2
            min_bank = pair_cost
        else:
            queue_limit = 2 if me.minerals >= 2 * STATS[MELEE].cost else 1
            min_bank = 0
        producer = None
        for e in ents.values():
            if e.owner == player and e.kind == PRODUCTION and e.complete \
                    and len(e.queue) < queue_limit:
                if producer is None or len(e.queue) < len(producer.queue):
                    producer = e
        if producer is not None and (not min_bank or me.minerals >= min_bank
                                     or producer.queue):
            queued = [k for e in ents.values() if e.owner == player and e.kind == PRODUCTION
                      for k, _ in e.queue]
            melee_total = counts[MELEE] + queued.count(MELEE)
            ranged_total = counts[RANGED] + queued.count(RANGED)
            kind = MELEE
            if tech_done and me.minerals >= STATS[RANGED].cost and ranged_total < melee_total:
                kind = RANGED
            if me.minerals >= STATS[kind].cost and me.food_used + STATS[kind].food <= me.food_cap:
                return PRODUCTION, PrimitiveAction(TRAIN, kind)

    # attack: launch when strong enough, keep commanding idle attackers
    if attack_ready:
        plan = _attack_plan(state, player, profile)
        if plan is not None:
            return ARMY, plan

    # idle workers back to minerals
    if any(e.owner == player and e.kind == WORKER and e.complete
           and e.gather_target is None and not e.orders for e in ents.values()):
        return WORKER, PrimitiveAction(GATHER)

    return None


def _next_build(state: GameState, player: int, profile: ScriptProfile,
                counts, me) -> PrimitiveAction | None:
    """Most urgent needed structure the player can afford, or None."""
    if counts[WORKER] == 0:
        return None
    ents = state.entities
    supply_pending = any(e.owner == player and e.kind == SUPPLY and not e.complete
                         for e in ents.values())
    if (me.food_cap - me.food_used <= profile.supply_margin and not supply_pending
            and me.food_cap < 50 and me.minerals >= STATS[SUPPLY].cost):
        return _build_cmd(state, player, SUPPLY)
    if counts[PRODUCTION] < profile.production_target \
            and me.minerals >= STATS[PRODUCTION].cost:
        return _build_cmd(state, player, PRODUCTION)
    if profile.uses_tech and counts[TECH] < 1 and counts[PRODUCTION] >= 1 \
            and me.minerals >= STATS[TECH].cost:
        return _build_cmd(state, player, TECH)
    if profile.rebuild and counts[BASE] == 0 and me.minerals >= STATS[BASE].cost:
        return _build_cmd(state, player, BASE)
    return None


def _build_cmd(state: GameState, player: int, kind: str) -> PrimitiveAction | None:
    # keep scripted bases compact: sample inside a tight window around the base
    base = next((e for e in state.entities.values()
                 if e.owner == player and e.kind == BASE), None)
    cx, cy = (base.x, base.y) if base is not None else state.players[player].spawn
    w, h = state.map.size
    window = Window.centered(cx, cy, 10, w, h)
    pos = sample_build_location(state, kind, state.action_rng(player),
                                player=player, window=window)
    if pos is None:
        return None
    return PrimitiveAction(BUILD, kind, pos=pos)


def _run_profile(state: GameState, profile: ScriptProfile, player: int) -> PrimitiveAction:
    intent = _intent(state, player, profile)
    if intent is None:
        return noop_action()
    want, command = intent
    if command is None:
        return noop_action()
    kinds = _selected_kinds(state, player)
    if want == ARMY:
        # a stale selection leaves new units uncommanded: require full coverage
        matches = bool(kinds) and kinds <= set(COMBAT_KINDS) and all(
            e.selected for e in state.entities.values()
            if e.owner == player and e.kind in COMBAT_KINDS)
    else:
        matches = want in kinds
    if matches:
        return command
    return select_action(want)


def scripted_opponent(state: GameState, cfg: DifficultyConfig,
                      player: int = 1) -> PrimitiveAction:
    """Built-in AI analog: one primitive action per decision."""
    return _run_profile(state, profile_for(cfg), player)


def scripted_expert(state: GameState, player: int = 0) -> PrimitiveAction:
    """Competent hand-written policy used to generate replay logs for mining.

    The play style is seeded by the game, standing in for a pool of experts."""
    profile = EXPERT_PROFILES[state.seed % len(EXPERT_PROFILES)]
    return _run_profile(state, profile, player)
