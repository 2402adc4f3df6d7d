"""Replay tokenization and fragment segmentation.

Tokens are (action_type, argument-kind) pairs with positions stripped, so
pattern frequencies generalize across games. One database sequence per
nonempty fragment of `fragment_ticks` ticks.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..engine.replay import Replay, read_replay
from ..engine.types import ATTACK, BUILD, GATHER, MOVE, NOOP, SELECT, TRAIN, PrimitiveAction
from ..errors import UsageError

Token = tuple[str, str]

DEFAULT_FRAGMENT_TICKS = 64  # ~8 decisions per fragment


def tokenize(action: PrimitiveAction) -> Token:
    t = action.type
    if t == SELECT:
        tgt = action.target
        return (SELECT, str(tgt) if not isinstance(tgt, int) else "id")
    if t in (BUILD, TRAIN):
        return (t, str(action.target))
    if t in (ATTACK, MOVE, GATHER, NOOP):
        return (t, "")
    raise UsageError(f"cannot tokenize action type {t!r}")


@dataclass
class SequenceDatabase:
    sequences: list[tuple[Token, ...]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.sequences)


def segment_replay(replay: Replay, fragment_ticks: int, player: int = 0) -> list[tuple[Token, ...]]:
    if fragment_ticks <= 0:
        raise UsageError("fragment_ticks must be > 0")
    fragments: dict[int, list[Token]] = {}
    for rec in replay.records:
        if rec.player != player:
            continue
        fragments.setdefault(rec.tick // fragment_ticks, []).append(tokenize(rec.action))
    return [tuple(fragments[k]) for k in sorted(fragments)]


def segment_replays(logs: list[str], fragment_ticks: int = DEFAULT_FRAGMENT_TICKS,
                    player: int = 0) -> SequenceDatabase:
    """Build the mining database: one sequence per nonempty fragment per log."""
    db = SequenceDatabase()
    for path in logs:
        db.sequences.extend(segment_replay(read_replay(path), fragment_ticks, player))
    return db
