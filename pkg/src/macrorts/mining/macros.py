"""Macro-actions: pattern filtering, postprocessing, serialization, execution.

A macro-action is an ordered list of primitive-action templates mined from
expert replays. Execution issues one primitive per engine decision; position
arguments are resolved at issue time by a PositionResolver (placement module
for builds, combat model for attacks).
"""
from __future__ import annotations

import os
from dataclasses import dataclass, replace

from ..engine.types import (ARMY, ATTACK, BASE, BUILD, GATHER, MOVE, NOOP,
                            PRODUCTION, SELECT, STRUCTURE_KINDS, TICKS_PER_STEP,
                            TRAIN, TRAINS, WORKER, GameState, Outcome,
                            PrimitiveAction)
from ..errors import DataError, UsageError
from .prefixspan import Pattern
from .segment import Token

MACRO_FILE_VERSION = "v1"

# selected kind -> command types it may execute inside a macro; noop is always
# compatible. Train targets are additionally checked against what the
# selected structure can produce.
COMPATIBLE: dict[str, set[str]] = {
    WORKER: {BUILD, GATHER},
    BASE: {TRAIN},
    PRODUCTION: {TRAIN},
    ARMY: {ATTACK, MOVE},
}


@dataclass(frozen=True)
class MacroAction:
    id: int
    steps: tuple[Token, ...]
    support: int

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def select_kind(self) -> str:
        return self.steps[0][1]

    def describe(self) -> str:
        return " -> ".join(f"{t}:{a}" if a else t for t, a in self.steps)

    def is_battle(self) -> bool:
        return any(t in (ATTACK, MOVE) for t, _ in self.steps)


def passes_restrictions(tokens: tuple[Token, ...]) -> bool:
    """No repeated actions, length strictly greater than two, first is a select."""
    if len(tokens) <= 2:
        return False
    if len(set(tokens)) != len(tokens):
        return False
    return tokens[0][0] == SELECT


def filter_patterns(patterns: list[Pattern], top_k: int) -> list[Pattern]:
    """Keep the top_k most frequent patterns that satisfy all restrictions."""
    kept = [p for p in patterns if passes_restrictions(p.tokens)]
    return kept[:top_k]


def _commands_compatible(tokens: tuple[Token, ...]) -> bool:
    sel_kind = tokens[0][1]
    allowed = COMPATIBLE.get(sel_kind)
    if allowed is None:
        return False
    for t, arg in tokens[1:]:
        if t == NOOP:
            continue
        if t not in allowed:
            return False
        if t == TRAIN and arg not in TRAINS.get(sel_kind, ()):
            return False
        if t == BUILD and arg not in STRUCTURE_KINDS:
            return False
    return True


def postprocess(patterns: list[Pattern]) -> list[MacroAction]:
    """Drop multi-select and kind-incompatible patterns, dedup, assign ids."""
    macros: list[MacroAction] = []
    seen: set[tuple[Token, ...]] = set()
    for p in patterns:
        n_select = sum(1 for t, _ in p.tokens if t == SELECT)
        if n_select != 1 or p.tokens in seen:
            continue
        if not _commands_compatible(p.tokens):
            continue
        seen.add(p.tokens)
        macros.append(MacroAction(id=len(macros), steps=p.tokens, support=p.support))
    return macros


NOOP_MACRO = MacroAction(id=-1, steps=((NOOP, ""),), support=0)


# ---------------------------------------------------------------------------
# Serialization

def save_macros(path: str, macros: list[MacroAction]):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        fh.write(f"#macrorts-macros {MACRO_FILE_VERSION} count={len(macros)}\n")
        for m in macros:
            steps = "|".join(f"{t}:{a}" for t, a in m.steps)
            fh.write(f"{m.id}\t{m.support}\t{steps}\n")


def load_macros(path: str) -> list[MacroAction]:
    macros = []
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("#macrorts-macros"):
            raise DataError(f"{path}:1: not a macro file")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                mid, support, steps = line.split("\t")
                tokens = tuple((s.split(":", 1)[0], s.split(":", 1)[1])
                               for s in steps.split("|"))
                macros.append(MacroAction(int(mid), tokens, int(support)))
            except Exception as exc:
                raise DataError(f"{path}:{lineno}: malformed macro line: {exc}") from exc
    return macros


# ---------------------------------------------------------------------------
# Execution

class PositionResolver:
    """Fills concrete coordinates for position-taking steps of a macro."""

    def __init__(self, player: int = 0):
        self.player = player

    def build_pos(self, state: GameState, kind: str):
        from ..placement import sample_build_location
        return sample_build_location(state, kind, state.action_rng(self.player),
                                     player=self.player)

    def attack_pos(self, state: GameState):
        own = state.players[self.player].spawn
        sites = [s for s in state.map.spawn_sites if s != own]
        sites.sort(key=lambda s: max(abs(s[0] - own[0]), abs(s[1] - own[1])))
        return sites[0] if sites else own

    def move_pos(self, state: GameState):
        return state.players[self.player].spawn

    def attack_queued(self) -> bool:
        return True


def instantiate(token: Token, state: GameState, resolver: PositionResolver) -> PrimitiveAction:
    t, arg = token
    if t == SELECT:
        return PrimitiveAction(SELECT, arg)
    if t == BUILD:
        pos = resolver.build_pos(state, arg)
        if pos is None:
            return PrimitiveAction(NOOP)
        return PrimitiveAction(BUILD, arg, pos=pos)
    if t == TRAIN:
        return PrimitiveAction(TRAIN, arg)
    if t == ATTACK:
        pos = resolver.attack_pos(state)
        if pos is None:
            return PrimitiveAction(NOOP)
        return PrimitiveAction(ATTACK, pos=pos, queued=resolver.attack_queued())
    if t == MOVE:
        pos = resolver.move_pos(state)
        if pos is None:
            return PrimitiveAction(NOOP)
        return PrimitiveAction(MOVE, pos=pos)
    if t == GATHER:
        return PrimitiveAction(GATHER)
    return PrimitiveAction(NOOP)


def execute_macro(state: GameState, macro: MacroAction,
                  resolver: PositionResolver | None = None,
                  log=None) -> tuple[GameState, Outcome, int]:
    """Issue the macro's steps in order, one per decision; stop if the game ends."""
    from ..engine.game import step

    if state.terminal:
        raise UsageError("execute_macro on a terminal game")
    if resolver is None:
        resolver = PositionResolver()
    ticks = 0
    before = state.tick
    for token in macro.steps:
        action = instantiate(token, state, resolver)
        state, outcome = step(state, action, log=log)
        ticks = state.tick - before
        if state.terminal:
            break
    return state, state.outcome, ticks
