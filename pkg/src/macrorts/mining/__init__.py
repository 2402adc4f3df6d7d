"""Macro-action mining from expert replay logs."""
from .macros import (COMPATIBLE, NOOP_MACRO, MacroAction, PositionResolver,
                     execute_macro, filter_patterns, instantiate, load_macros,
                     passes_restrictions, postprocess, save_macros)
from .prefixspan import Pattern, contains_subsequence, prefixspan
from .segment import (DEFAULT_FRAGMENT_TICKS, SequenceDatabase, Token,
                      segment_replay, segment_replays, tokenize)

DEFAULT_TOP_K = 75
DEFAULT_MAX_LEN = 4
DEFAULT_MIN_SUPPORT_FRAC = 0.03


def mine_macros(logs: list[str], fragment_ticks: int = DEFAULT_FRAGMENT_TICKS,
                min_support: int | None = None, max_len: int = DEFAULT_MAX_LEN,
                top_k: int = DEFAULT_TOP_K):
    """Full pipeline: segment -> prefixspan -> filter -> postprocess."""
    db = segment_replays(logs, fragment_ticks)
    if min_support is None:
        min_support = max(2, int(len(db.sequences) * DEFAULT_MIN_SUPPORT_FRAC))
    patterns = prefixspan(db, min_support, max_len)
    kept = filter_patterns(patterns, top_k)
    return postprocess(kept), patterns, db
