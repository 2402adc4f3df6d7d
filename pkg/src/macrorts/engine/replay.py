"""Replay logs: line-delimited action records with a header and an end record.

Format (tab-separated):
    #macrorts-replay v1 seed=<n> level=<n> map=<name> max_ticks=<n>
    <tick>\t<player>\t<action_type>\t<args...>
    #end outcome=<Win|Loss|Tie> tick=<n> p0=<kind:count;...> p1=<kind:count;...>

Args per action type: select -> target ("army", kind name, or "id:<n>");
build -> kind, "x,y"; train -> kind; attack -> "x,y", "q"/"nq"; move -> "x,y";
gather -> mineral id or "-"; noop -> none.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

from ..errors import DataError
from .types import (ARMY, ATTACK, BUILD, GATHER, MOVE, NOOP, SELECT, TRAIN,
                    GameState, Outcome, PrimitiveAction, difficulty)

FORMAT_VERSION = "v1"


def _encode(action: PrimitiveAction) -> list[str]:
    t = action.type
    if t == SELECT:
        tgt = action.target
        return [f"id:{tgt}" if isinstance(tgt, int) else str(tgt)]
    if t == BUILD:
        return [str(action.target), f"{action.pos[0]},{action.pos[1]}"]
    if t == TRAIN:
        return [str(action.target)]
    if t == ATTACK:
        return [f"{action.pos[0]},{action.pos[1]}", "q" if action.queued else "nq"]
    if t == MOVE:
        return [f"{action.pos[0]},{action.pos[1]}"]
    if t == GATHER:
        return ["-" if action.target is None else str(action.target)]
    return []


def _decode(action_type: str, args: list[str]) -> PrimitiveAction:
    def pos(s):
        x, y = s.split(",")
        return int(x), int(y)

    if action_type == SELECT:
        tgt = args[0]
        if tgt.startswith("id:"):
            return PrimitiveAction(SELECT, int(tgt[3:]))
        return PrimitiveAction(SELECT, tgt)
    if action_type == BUILD:
        return PrimitiveAction(BUILD, args[0], pos=pos(args[1]))
    if action_type == TRAIN:
        return PrimitiveAction(TRAIN, args[0])
    if action_type == ATTACK:
        return PrimitiveAction(ATTACK, pos=pos(args[0]), queued=args[1] == "q")
    if action_type == MOVE:
        return PrimitiveAction(MOVE, pos=pos(args[0]))
    if action_type == GATHER:
        return PrimitiveAction(GATHER, None if args[0] == "-" else int(args[0]))
    if action_type == NOOP:
        return PrimitiveAction(NOOP)
    raise DataError(f"unknown action type {action_type!r}")


class ReplayWriter:
    def __init__(self, path: str, state: GameState):
        self.path = path
        self._fh = open(path, "w")
        self._fh.write(f"#macrorts-replay {FORMAT_VERSION} seed={state.seed} "
                       f"level={state.difficulty.level} map={state.map.name} "
                       f"max_ticks={state.max_ticks}\n")

    def action(self, tick: int, player: int, action: PrimitiveAction):
        parts = [str(tick), str(player), action.type] + _encode(action)
        self._fh.write("\t".join(parts) + "\n")

    def end(self, state: GameState):
        def fmt(player):
            counts = state.unit_counts(player)
            return ";".join(f"{k}:{n}" for k, n in counts.items() if n > 0) or "-"

        self._fh.write(f"#end outcome={state.outcome.value} tick={state.tick} "
                       f"p0={fmt(0)} p1={fmt(1)}\n")
        self._fh.close()


@dataclass
class ReplayRecord:
    tick: int
    player: int
    action: PrimitiveAction


@dataclass
class Replay:
    path: str
    seed: int
    level: int
    map_name: str
    max_ticks: int
    records: list[ReplayRecord]
    outcome: str | None = None
    end_tick: int | None = None
    final_counts: tuple[dict, dict] | None = None


def read_replay(path: str) -> Replay:
    records: list[ReplayRecord] = []
    header = None
    outcome = end_tick = final_counts = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                if line.startswith("#macrorts-replay"):
                    fields = dict(p.split("=", 1) for p in line.split()[2:])
                    header = fields
                elif line.startswith("#end"):
                    fields = dict(p.split("=", 1) for p in line.split()[1:])
                    outcome = fields["outcome"]
                    end_tick = int(fields["tick"])
                    final_counts = (_parse_counts(fields["p0"]),
                                    _parse_counts(fields["p1"]))
                else:
                    parts = line.split("\t")
                    records.append(ReplayRecord(int(parts[0]), int(parts[1]),
                                                _decode(parts[2], parts[3:])))
            except DataError:
                raise
            except Exception as exc:
                raise DataError(f"{path}:{lineno}: malformed replay line: {exc}") from exc
    if header is None:
        raise DataError(f"{path}:1: missing replay header")
    try:
        return Replay(path=path, seed=int(header["seed"]), level=int(header["level"]),
                      map_name=header["map"], max_ticks=int(header["max_ticks"]),
                      records=records, outcome=outcome, end_tick=end_tick,
                      final_counts=final_counts)
    except KeyError as exc:
        raise DataError(f"{path}:1: header missing field {exc}") from exc


def _parse_counts(s: str) -> dict:
    if s == "-":
        return {}
    out = {}
    for part in s.split(";"):
        kind, n = part.split(":")
        out[kind] = int(n)
    return out


def resimulate(replay: Replay) -> GameState:
    """Re-run a replay through the engine (player-0 records drive the game)."""
    from .game import new_game, step

    state = new_game(replay.seed, difficulty(replay.level), replay.max_ticks,
                     replay.map_name)
    p0 = [r for r in replay.records if r.player == 0]
    for rec in p0:
        if state.terminal:
            break
        if rec.tick != state.tick:
            raise DataError(f"{replay.path}: record tick {rec.tick} != "
                            f"engine tick {state.tick}")
        step(state, rec.action)
    return state


def write_game_log(path: str, state: GameState) -> ReplayWriter:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    return ReplayWriter(path, state)
