"""Deterministic micro-RTS game: creation, action application, tick physics.

The engine is a value-semantics state machine: `step` mutates the passed
GameState in place and returns it. Determinism contract: identical
(seed, difficulty, map, action sequence) produces bit-identical trajectories.
"""
from __future__ import annotations

import numpy as np

from ..errors import UsageError
from .types import (ARMY, ATTACK, BASE, BUILD, COMBAT_KINDS, FOOD_CAP_MAX, GATHER,
                    GATHER_TRIP_TICKS, GATHER_YIELD, MELEE, MINERAL, MINING_SLOTS_PER_PATCH,
                    MOVE, NOOP, POWER_AURA_RADIUS, PRODUCTION, RANGED, SELECT, STATS,
                    STRUCTURE_KINDS, SUPPLY, TECH, TICKS_PER_STEP, TRAIN, TRAINS, WORKER,
                    DifficultyConfig, Entity, GameState, MapConfig, Outcome,
                    PlayerState, PrimitiveAction, map_config)

import random

_QUEUE_CAP = 5
_DEFENSE_RADIUS = 8


def _outward(site, w, h):
    ox = -1 if site[0] < w // 2 else 1
    oy = -1 if site[1] < h // 2 else 1
    if site[0] == w // 2:
        ox = 0
    if site[1] == h // 2:
        oy = 0
    if ox == 0 and oy == 0:
        ox = 1
    return ox, oy


def _add_entity(state: GameState, owner: int, kind: str, x: int, y: int,
                complete: bool = True, food_reserved: bool = False) -> Entity:
    st = STATS[kind]
    e = Entity(id=state.alloc_id(), owner=owner, kind=kind, x=x, y=y,
               hp=st.hp, max_hp=st.hp, complete=complete,
               remaining_build=0 if complete else st.build_ticks)
    if kind == MINERAL:
        e.minerals_left = state.map.patch_minerals
    state.entities[e.id] = e
    if kind == MINERAL or kind in STRUCTURE_KINDS:
        state.blocked[(x, y)] = e.id
    if owner >= 0:
        p = state.players[owner]
        if kind in STRUCTURE_KINDS:
            if complete:
                p.food_cap = min(FOOD_CAP_MAX, p.food_cap + st.food_provided)
                p.score.total_value_structures += st.cost
        else:
            if not food_reserved:  # queue spawns reserved food at enqueue time
                p.food_used += st.food
            p.score.total_value_units += st.cost
    return e


def _spawn_side(state: GameState, player: int, site: tuple[int, int]):
    w, h = state.map.size
    sx, sy = site
    ox, oy = _outward(site, w, h)
    px, py = -oy, ox  # perpendicular
    state.players[player].spawn = site
    _add_entity(state, player, BASE, sx, sy)
    patches = []
    for i in (-2, -1, 1, 2):
        mx = sx + 2 * ox + i * px
        my = sy + 2 * oy + i * py
        patches.append(_add_entity(state, -1, MINERAL, mx, my))
    for i in range(5):
        wx = sx - ox + (i % 3) - 1
        wy = sy - oy + (i // 3) - 1
        if (wx, wy) == (sx, sy) or not state.in_bounds(wx, wy):
            wx, wy = sx - ox, sy + 2
        worker = _add_entity(state, player, WORKER, wx, wy)
        worker.gather_target = patches[i % len(patches)].id


def new_game(seed: int, difficulty: DifficultyConfig, max_ticks: int,
             map_cfg: MapConfig | str = "std32") -> GameState:
    """Create a fresh, fully deterministic game."""
    if max_ticks < 0:
        raise UsageError("max_ticks must be >= 0")
    if isinstance(map_cfg, str):
        map_cfg = map_config(map_cfg)
    rng = random.Random(seed)
    players = [PlayerState(), PlayerState()]
    players[1].income_multiplier = difficulty.income_multiplier
    players[1].vision_cheat = difficulty.vision_cheat
    w, h = map_cfg.size
    state = GameState(seed=seed, tick=0, max_ticks=max_ticks, map=map_cfg,
                      difficulty=difficulty, entities={}, players=players, rng=rng,
                      rng_p0=random.Random(seed ^ 0x9E3779B9),
                      scouted=[np.zeros((h, w), dtype=bool) for _ in range(2)])
    sites = map_cfg.spawn_sites
    i0 = rng.randrange(len(sites))
    s0 = sites[i0]
    # opponent spawns at the farthest candidate site
    s1 = max((s for j, s in enumerate(sites) if j != i0),
             key=lambda s: (s[0] - s0[0]) ** 2 + (s[1] - s0[1]) ** 2)
    _spawn_side(state, 0, s0)
    _spawn_side(state, 1, s1)
    _update_scouted(state)
    if max_ticks == 0:
        state.outcome = Outcome.TIE
    return state


# ---------------------------------------------------------------------------
# Action application

def _spend(state: GameState, player: int, amount: int):
    p = state.players[player]
    p.minerals -= amount
    p.spent_minerals += amount


def _selected(state: GameState, player: int):
    return [e for e in state.entities.values() if e.owner == player and e.selected]


def _clear_selection(state: GameState, player: int):
    for e in state.entities.values():
        if e.owner == player and e.selected:
            e.selected = False


def _pick_by_kind(state: GameState, player: int, kind: str) -> Entity | None:
    """Deterministic pick: idle-first for workers, shortest queue for producers."""
    best = None
    best_key = None
    for e in state.entities.values():
        if e.owner != player or e.kind != kind or not e.complete:
            continue
        if kind == WORKER:
            key = (0 if e.gather_target is None and not e.orders else 1, e.id)
        elif kind in TRAINS:
            key = (len(e.queue), e.id)
        else:
            key = (0, e.id)
        if best is None or key < best_key:
            best, best_key = e, key
    return best


def has_power(state: GameState, player: int, x: int, y: int) -> bool:
    for e in state.entities.values():
        if (e.owner == player and e.complete and STATS[e.kind].aura
                and abs(e.x - x) <= POWER_AURA_RADIUS and abs(e.y - y) <= POWER_AURA_RADIUS):
            return True
    return False


def _tech_available(state: GameState, player: int) -> bool:
    return any(e.owner == player and e.kind == TECH and e.complete
               for e in state.entities.values())


def _cell_free(state: GameState, x: int, y: int) -> bool:
    if not state.in_bounds(x, y) or (x, y) in state.blocked:
        return False
    return all(not (e.x == x and e.y == y) for e in state.entities.values())


def _nearest_patch(state: GameState, x: int, y: int, free_slot: bool) -> Entity | None:
    best, best_d = None, None
    for e in state.entities.values():
        if e.kind != MINERAL:
            continue
        if free_slot:
            assigned = sum(1 for u in state.entities.values()
                           if u.gather_target == e.id)
            if assigned >= MINING_SLOTS_PER_PATCH:
                continue
        d = max(abs(e.x - x), abs(e.y - y))
        if best is None or (d, e.id) < (best_d, best.id):
            best, best_d = e, d
    return best


def apply_action(state: GameState, player: int, action: PrimitiveAction):
    """Apply one primitive action for `player`. Ineffective commands are no-ops."""
    t = action.type
    if t == NOOP:
        return
    if t == SELECT:
        _clear_selection(state, player)
        target = action.target
        if target == ARMY:
            for e in state.entities.values():
                if e.owner == player and e.kind in COMBAT_KINDS:
                    e.selected = True
        elif isinstance(target, int):
            e = state.entities.get(target)
            if e is not None and e.owner == player:
                e.selected = True
        else:
            e = _pick_by_kind(state, player, target)
            if e is not None:
                e.selected = True
        return

    sel = _selected(state, player)
    if not sel:
        return
    p = state.players[player]

    if t == BUILD:
        kind = action.target
        if kind not in STRUCTURE_KINDS or action.pos is None:
            return
        worker = next((e for e in sel if e.kind == WORKER and e.complete), None)
        st = STATS[kind]
        x, y = action.pos
        if (worker is None or p.minerals < st.cost or not _cell_free(state, x, y)
                or (st.needs_power and not has_power(state, player, x, y))):
            return
        _spend(state, player, st.cost)
        _add_entity(state, player, kind, x, y, complete=False)
    elif t == TRAIN:
        kind = action.target
        producer = next((e for e in sel if e.complete and kind in TRAINS.get(e.kind, ())),
                        None)
        if producer is None or len(producer.queue) >= _QUEUE_CAP:
            return
        st = STATS[kind]
        if (p.minerals < st.cost or p.food_used + st.food > p.food_cap
                or (st.needs_tech and not _tech_available(state, player))):
            return
        _spend(state, player, st.cost)
        p.food_used += st.food
        producer.queue.append([kind, st.build_ticks])
    elif t == ATTACK:
        if action.pos is None:
            return
        order = (ATTACK, action.pos[0], action.pos[1])
        for e in sel:
            if STATS[e.kind].damage > 0 and e.complete:
                if action.queued and e.orders:
                    if len(e.orders) < 4 and e.orders[-1] != order:
                        e.orders.append(order)
                else:
                    e.orders = [order]
                e.gather_target = None
    elif t == MOVE:
        if action.pos is None:
            return
        order = (MOVE, action.pos[0], action.pos[1])
        for e in sel:
            if e.kind not in STRUCTURE_KINDS and e.kind != MINERAL and e.complete:
                e.orders = [order]
                e.gather_target = None
    elif t == GATHER:
        workers = [e for e in sel if e.kind == WORKER and e.complete]
        if not workers:
            return
        for e in workers:
            patch = None
            if isinstance(action.target, int):
                cand = state.entities.get(action.target)
                if cand is not None and cand.kind == MINERAL:
                    patch = cand
            if patch is None:
                patch = _nearest_patch(state, e.x, e.y, free_slot=True)
            if patch is None:
                patch = _nearest_patch(state, e.x, e.y, free_slot=False)
            if patch is not None:
                e.gather_target = patch.id
                e.gather_timer = 0
                e.orders = []


# ---------------------------------------------------------------------------
# Physics

def _free_cell_near(state: GameState, x: int, y: int) -> tuple[int, int] | None:
    occupied = {(e.x, e.y) for e in state.entities.values()}
    for r in range(1, 4):
        for dy in range(-r, r + 1):
            for dx in range(-r, r + 1):
                if max(abs(dx), abs(dy)) != r:
                    continue
                nx, ny = x + dx, y + dy
                if state.in_bounds(nx, ny) and (nx, ny) not in state.blocked \
                        and (nx, ny) not in occupied:
                    return nx, ny
    return None


def _move_toward(state: GameState, e: Entity, tx: int, ty: int):
    dx = (tx > e.x) - (tx < e.x)
    dy = (ty > e.y) - (ty < e.y)
    if dx == 0 and dy == 0:
        return
    blocked = state.blocked
    for nx, ny in ((e.x + dx, e.y + dy), (e.x + dx, e.y), (e.x, e.y + dy)):
        if (nx, ny) != (e.x, e.y) and state.in_bounds(nx, ny) and (nx, ny) not in blocked:
            e.x, e.y = nx, ny
            return


def _kill(state: GameState, e: Entity, killer_player: int | None):
    st = STATS[e.kind]
    del state.entities[e.id]
    if state.blocked.get((e.x, e.y)) == e.id:
        del state.blocked[(e.x, e.y)]
    if e.owner < 0:
        return
    p = state.players[e.owner]
    if e.kind in STRUCTURE_KINDS:
        if e.complete:
            p.food_cap = max(0, p.food_cap - st.food_provided)
            p.score.total_value_structures -= st.cost
        for kind, _ in e.queue:
            p.food_used -= STATS[kind].food
    else:
        p.food_used -= st.food
        p.score.total_value_units -= st.cost
    if killer_player is not None and killer_player != e.owner:
        score = state.players[killer_player].score
        if e.kind in STRUCTURE_KINDS:
            score.kill_struc_value += st.cost
        else:
            score.kill_unit_value += st.cost


def _tick(state: GameState):
    entities = state.entities
    snapshot = list(entities.values())

    # production queues and construction
    for e in snapshot:
        if e.kind in TRAINS and e.complete and e.owner >= 0:
            if e.queue:
                e.queue[0][1] -= 1
                if e.queue[0][1] <= 0:
                    cell = _free_cell_near(state, e.x, e.y)
                    if cell is not None:
                        kind, _ = e.queue.pop(0)
                        _add_entity(state, e.owner, kind, cell[0], cell[1],
                                    food_reserved=True)
                    else:
                        e.queue[0][1] = 1  # wait for space
            else:
                state.players[e.owner].score.production_idle_ticks += 1
        elif not e.complete and e.kind in STRUCTURE_KINDS:
            e.remaining_build -= 1
            if e.remaining_build <= 0:
                e.complete = True
                st = STATS[e.kind]
                p = state.players[e.owner]
                p.food_cap = min(FOOD_CAP_MAX, p.food_cap + st.food_provided)
                p.score.total_value_structures += st.cost

    # gathering; dict iteration order is id order, which settles slot contention
    miners_per_patch: dict[int, int] = {}
    for e in snapshot:
        if e.kind != WORKER or e.gather_target is None or e.id not in entities:
            continue
        patch = entities.get(e.gather_target)
        if patch is None:
            np_ = _nearest_patch(state, e.x, e.y, free_slot=True)
            e.gather_target = np_.id if np_ is not None else None
            e.gather_timer = 0
            continue
        if max(abs(e.x - patch.x), abs(e.y - patch.y)) > 1:
            _move_toward(state, e, patch.x, patch.y)
            continue
        n = miners_per_patch.get(patch.id, 0)
        if n >= MINING_SLOTS_PER_PATCH:
            state.players[e.owner].score.worker_idle_ticks += 1
            continue
        miners_per_patch[patch.id] = n + 1
        e.gather_timer += 1
        if e.gather_timer >= GATHER_TRIP_TICKS:
            e.gather_timer = 0
            p = state.players[e.owner]
            amount = min(patch.minerals_left,
                         int(GATHER_YIELD * p.income_multiplier + 0.5))
            p.minerals += amount
            p.gathered_minerals += amount
            patch.minerals_left -= amount
            if patch.minerals_left <= 0:
                _kill(state, patch, None)

    # movement + combat (simultaneous damage)
    enemies: list[list[tuple[int, int, int]]] = [[], []]
    for e in entities.values():
        if e.owner >= 0 and e.kind != MINERAL:
            enemies[1 - e.owner].append((e.x, e.y, e.id))
    damage: dict[int, int] = {}
    killer: dict[int, int] = {}
    for e in list(entities.values()):
        if e.id not in entities or e.owner < 0 or e.kind in STRUCTURE_KINDS \
                or not e.complete:
            continue
        st = STATS[e.kind]
        if st.damage == 0:
            continue
        if e.kind == WORKER and e.gather_target is not None:
            # mining workers fight only if an enemy is in range
            tgt = _nearest_in(enemies[e.owner], e.x, e.y, st.attack_range)
            if tgt is not None:
                damage[tgt] = damage.get(tgt, 0) + st.damage
                killer[tgt] = e.owner
            continue
        if e.orders and e.orders[0][0] == MOVE:
            _, tx, ty = e.orders[0]
            if e.x == tx and e.y == ty:
                e.orders.pop(0)
            else:
                _move_toward(state, e, tx, ty)
            continue
        tgt = _nearest_in(enemies[e.owner], e.x, e.y, st.attack_range)
        if tgt is not None:
            damage[tgt] = damage.get(tgt, 0) + st.damage
            killer[tgt] = e.owner
            continue
        chase = _nearest_in(enemies[e.owner], e.x, e.y, st.sight)
        if chase is not None:
            ce = entities[chase]
            _move_toward(state, e, ce.x, ce.y)
            continue
        if e.orders:
            _, tx, ty = e.orders[0]
            if max(abs(e.x - tx), abs(e.y - ty)) <= 1:
                e.orders.pop(0)
            else:
                _move_toward(state, e, tx, ty)

    # idle-worker accounting
    for e in entities.values():
        if e.kind == WORKER and e.gather_target is None and not e.orders:
            state.players[e.owner].score.worker_idle_ticks += 1

    for eid, dmg in damage.items():
        e = entities.get(eid)
        if e is None:
            continue
        e.hp = max(0, e.hp - dmg)
        if e.hp == 0:
            _kill(state, e, killer[eid])

    state.tick += 1


def _nearest_in(cands: list[tuple[int, int, int]], x: int, y: int,
                radius: int) -> int | None:
    best, best_key = None, None
    for cx, cy, cid in cands:
        d = abs(cx - x)
        dy = abs(cy - y)
        if dy > d:
            d = dy
        if d <= radius:
            key = (d, cid)
            if best is None or key < best_key:
                best, best_key = cid, key
    return best


def _update_scouted(state: GameState):
    w, h = state.map.size
    for player in (0, 1):
        grid = state.scouted[player]
        for e in state.entities.values():
            if e.owner != player:
                continue
            r = STATS[e.kind].sight
            grid[max(0, e.y - r):min(h, e.y + r + 1),
                 max(0, e.x - r):min(w, e.x + r + 1)] = True


def _check_outcome(state: GameState):
    alive0 = state.structures_alive(0)
    alive1 = state.structures_alive(1)
    if alive0 == 0 and alive1 == 0:
        state.outcome = Outcome.TIE
    elif alive1 == 0:
        state.outcome = Outcome.WIN
    elif alive0 == 0:
        state.outcome = Outcome.LOSS
    elif state.tick >= state.max_ticks:
        state.outcome = Outcome.TIE


def step_pair(state: GameState, action0: PrimitiveAction, action1: PrimitiveAction,
              log=None) -> tuple[GameState, Outcome]:
    """Advance one decision: both players act, then TICKS_PER_STEP ticks run."""
    if state.terminal:
        raise UsageError("step on a terminal game")
    if log is not None:
        log.action(state.tick, 0, action0)
        log.action(state.tick, 1, action1)
    apply_action(state, 0, action0)
    apply_action(state, 1, action1)
    for _ in range(TICKS_PER_STEP):
        _tick(state)
        _check_outcome(state)
        if state.terminal:
            break
    _update_scouted(state)
    return state, state.outcome


def step(state: GameState, agent_action: PrimitiveAction,
         log=None) -> tuple[GameState, Outcome]:
    """Advance one decision: agent action, scripted opponent action, physics."""
    from .scripted import scripted_opponent
    opp = scripted_opponent(state, state.difficulty, player=1)
    return step_pair(state, agent_action, opp, log=log)


def new_match(seed: int, cfg0: DifficultyConfig, cfg1: DifficultyConfig,
              max_ticks: int, map_cfg: MapConfig | str = "std32") -> GameState:
    """Scripted head-to-head game: each side gets its own cheat bonuses."""
    state = new_game(seed, cfg1, max_ticks, map_cfg)
    state.players[0].income_multiplier = cfg0.income_multiplier
    state.players[0].vision_cheat = cfg0.vision_cheat
    return state


def states_equal(a: GameState, b: GameState) -> bool:
    """Field-by-field equality, including RNG stream positions and scout memory."""
    if (a.seed, a.tick, a.max_ticks, a.map, a.difficulty, a.next_id, a.outcome) != \
            (b.seed, b.tick, b.max_ticks, b.map, b.difficulty, b.next_id, b.outcome):
        return False
    if a.entities != b.entities or a.players != b.players or a.blocked != b.blocked:
        return False
    if a.rng.getstate() != b.rng.getstate() or a.rng_p0.getstate() != b.rng_p0.getstate():
        return False
    return all(np.array_equal(x, y) for x, y in zip(a.scouted, b.scouted))


def state_digest(state: GameState) -> tuple:
    """Hashable summary of the observable game state (no RNG cursors)."""
    ents = tuple(sorted(
        (e.id, e.owner, e.kind, e.x, e.y, e.hp, e.complete, e.remaining_build,
         tuple(tuple(q) for q in e.queue), tuple(e.orders), e.gather_target,
         e.minerals_left, e.selected)
        for e in state.entities.values()))
    players = tuple((p.minerals, p.food_used, p.food_cap, p.spent_minerals,
                     p.gathered_minerals, p.score.kill_unit_value,
                     p.score.kill_struc_value, p.score.total_value_units,
                     p.score.total_value_structures, p.score.worker_idle_ticks,
                     p.score.production_idle_ticks) for p in state.players)
    return state.tick, state.outcome.value, ents, players
