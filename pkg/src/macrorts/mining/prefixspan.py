"""Frequent-subsequence mining by prefix projection.

Emits exactly the set of subsequences (order-preserving, not necessarily
contiguous) with support >= min_support and length <= max_len, with exact
supports, sorted by (support desc, length desc, lexicographic).
"""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import UsageError
from .segment import SequenceDatabase, Token


@dataclass(frozen=True)
class Pattern:
    tokens: tuple[Token, ...]
    support: int

    def __len__(self) -> int:
        return len(self.tokens)


def prefixspan(db: SequenceDatabase, min_support: int, max_len: int) -> list[Pattern]:
    if min_support < 1:
        raise UsageError("min_support must be >= 1")
    if max_len < 1:
        raise UsageError("max_len must be >= 1")
    sequences = db.sequences
    found: list[Pattern] = []

    def grow(projection: list[tuple[int, int]], prefix: tuple[Token, ...]):
        # projection: (sequence index, postfix start) for sequences containing prefix
        counts: dict[Token, int] = {}
        for si, start in projection:
            seen = set()
            for tok in sequences[si][start:]:
                if tok not in seen:
                    seen.add(tok)
                    counts[tok] = counts.get(tok, 0) + 1
        for tok in sorted(counts):
            support = counts[tok]
            if support < min_support:
                continue
            grown = prefix + (tok,)
            found.append(Pattern(grown, support))
            if len(grown) < max_len:
                sub = []
                for si, start in projection:
                    seq = sequences[si]
                    for j in range(start, len(seq)):
                        if seq[j] == tok:
                            sub.append((si, j + 1))
                            break
                grow(sub, grown)

    grow([(i, 0) for i in range(len(sequences))], ())
    found.sort(key=lambda p: (-p.support, -len(p.tokens), p.tokens))
    return found


def contains_subsequence(seq: tuple[Token, ...], sub: tuple[Token, ...]) -> bool:
    it = iter(seq)
    return all(tok in it for tok in sub)
