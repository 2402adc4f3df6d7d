from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from macrorts.engine import Outcome, difficulty, new_game, step
from macrorts.errors import DataError, UsageError
from macrorts.mining import (MacroAction, Pattern, SequenceDatabase,
                             contains_subsequence, execute_macro, filter_patterns,
                             load_macros, mine_macros, postprocess, prefixspan,
                             save_macros, segment_replays)
from macrorts.mining.segment import segment_replay
from macrorts.engine.replay import Replay, ReplayRecord, read_replay
from macrorts.engine.types import PrimitiveAction


def brute_force_patterns(db: SequenceDatabase, min_support: int, max_len: int):
    """Enumerate every distinct subsequence, count support by containment."""
    candidates = set()
    for seq in db.sequences:
        for length in range(1, min(max_len, len(seq)) + 1):
            for idxs in combinations(range(len(seq)), length):
                candidates.add(tuple(seq[i] for i in idxs))
    out = []
    for cand in candidates:
        support = sum(1 for seq in db.sequences if contains_subsequence(seq, cand))
        if support >= min_support:
            out.append(Pattern(cand, support))
    out.sort(key=lambda p: (-p.support, -len(p.tokens), p.tokens))
    return out


def db_of(*seqs):
    return SequenceDatabase([tuple(s) for s in seqs])


token = st.sampled_from([("a", ""), ("b", ""), ("c", ""), ("d", ""), ("e", "")])
random_db = st.builds(
    lambda seqs: SequenceDatabase([tuple(s) for s in seqs]),
    st.lists(st.lists(token, min_size=0, max_size=6), min_size=0, max_size=8))


class TestPrefixSpan:
    def test_spec_example(self):
        a, b, c = ("a", ""), ("b", ""), ("c", "")
        db = db_of([a, b], [a, b], [a, c])
        found = {p.tokens: p.support for p in prefixspan(db, 2, 4)}
        assert found == {(a,): 3, (b,): 2, (a, b): 2}

    def test_min_support_above_db_size_empty(self):
        db = db_of([("a", ""), ("b", "")])
        assert prefixspan(db, len(db.sequences) + 1, 4) == []

    def test_single_sequence_all_subsequences(self):
        a, b, c = ("a", ""), ("b", ""), ("c", "")
        found = {p.tokens for p in prefixspan(db_of([a, b, c]), 1, 2)}
        assert found == {(a,), (b,), (c,), (a, b), (a, c), (b, c)}

    def test_invalid_params(self):
        with pytest.raises(UsageError):
            prefixspan(db_of(), 0, 4)
        with pytest.raises(UsageError):
            prefixspan(db_of(), 1, 0)

    @given(random_db, st.integers(1, 3), st.integers(1, 4))
    @settings(max_examples=120, deadline=None)
    def test_oracle_equivalence(self, db, min_support, max_len):
        assert prefixspan(db, min_support, max_len) == \
            brute_force_patterns(db, min_support, max_len)

    @given(random_db, st.integers(1, 3))
    @settings(max_examples=60, deadline=None)
    def test_support_antimonotone(self, db, min_support):
        found = {p.tokens: p.support for p in prefixspan(db, min_support, 4)}
        for tokens, support in found.items():
            for k in range(1, len(tokens)):
                assert found[tokens[:k]] >= support


class TestSegmentation:
    def test_bucketing_by_tick(self, tmp_path):
        path = tmp_path / "toy.replay"
        path.write_text(
            "#macrorts-replay v1 seed=0 level=1 map=std32 max_ticks=2000\n"
            "3\t0\tselect\tworker\n"
            "7\t0\tgather\t-\n"
            "120\t0\tnoop\n"
            "#end outcome=Tie tick=200 p0=- p1=-\n")
        db = segment_replays([str(path)], fragment_ticks=100)
        assert [len(s) for s in db.sequences] == [2, 1]

    def test_empty_log_empty_database(self, tmp_path):
        path = tmp_path / "empty.replay"
        path.write_text("#macrorts-replay v1 seed=0 level=1 map=std32 max_ticks=10\n")
        assert len(segment_replays([str(path)])) == 0

    def test_malformed_line_names_file_and_line(self, tmp_path):
        path = tmp_path / "bad.replay"
        path.write_text(
            "#macrorts-replay v1 seed=0 level=1 map=std32 max_ticks=10\n"
            "not-a-tick\t0\tnoop\n")
        with pytest.raises(DataError, match=r"bad\.replay:2"):
            segment_replays([str(path)])

    def test_fragment_count_matches_line_scan(self, replay_corpus):
        # independent recount: bucket (tick // F) values straight off the files
        fragment_ticks = 48
        db = segment_replays(replay_corpus["paths"], fragment_ticks)
        expected = 0
        for path in replay_corpus["paths"]:
            buckets = set()
            with open(path) as fh:
                for line in fh:
                    if line.startswith("#"):
                        continue
                    tick, player, _rest = line.split("\t", 2)
                    if player == "0":
                        buckets.add(int(tick) // fragment_ticks)
            expected += len(buckets)
        assert len(db.sequences) == expected

    def test_invalid_fragment_ticks(self):
        with pytest.raises(UsageError):
            segment_replay(Replay("x", 0, 1, "std32", 10, []), 0)


class TestFilterAndPostprocess:
    def test_repeated_action_rejected(self):
        sel = ("select", "worker")
        build = ("build", "supply-structure")
        pat = Pattern((sel, build, build), 10)
        assert filter_patterns([pat], 10) == []

    def test_first_not_select_rejected(self):
        pat = Pattern((("build", "supply-structure"), ("select", "worker"),
                       ("train", "worker")), 10)
        assert filter_patterns([pat], 10) == []

    def test_length_two_rejected(self):
        pat = Pattern((("select", "worker"), ("gather", "")), 99)
        assert filter_patterns([pat], 10) == []

    def test_top_k_cap(self, mined_macros):
        kept = filter_patterns(mined_macros["patterns"], 75)
        assert len(kept) <= 75
        from macrorts.mining import passes_restrictions
        assert all(passes_restrictions(p.tokens) for p in kept)

    def test_multi_select_removed(self):
        pat = Pattern((("select", "worker"), ("build", "supply-structure"),
                       ("select", "base")), 5)
        assert postprocess([pat]) == []

    def test_incompatible_kind_removed(self):
        # a worker cannot train
        pat = Pattern((("select", "worker"), ("train", "worker"), ("noop", "")), 5)
        assert postprocess([pat]) == []
        # a base cannot train combat units
        pat = Pattern((("select", "base"), ("train", "melee-unit"), ("noop", "")), 5)
        assert postprocess([pat]) == []

    def test_paper_shaped_pattern_kept(self):
        pat = Pattern((("select", "worker"), ("build", "supply-structure"),
                       ("gather", "")), 5)
        out = postprocess([pat])
        assert len(out) == 1 and out[0].steps == pat.tokens

    def test_duplicates_deduplicated(self):
        pat = Pattern((("select", "worker"), ("build", "supply-structure"),
                       ("gather", "")), 5)
        assert len(postprocess([pat, pat])) == 1

    def test_macro_invariants(self, mined_macros):
        macros = mined_macros["macros"]
        assert macros, "corpus must produce macros"
        for m in macros:
            assert m.steps[0][0] == "select"
            assert 2 < len(m.steps) <= 4
            assert sum(1 for t, _ in m.steps if t == "select") == 1
            assert len(set(m.steps)) == len(m.steps)

    def test_corpus_covers_build_train_battle(self, mined_macros):
        macros = mined_macros["macros"]
        assert any(m.is_battle() for m in macros)
        assert any(t == "build" for m in macros for t, _ in m.steps)
        assert any(t == "train" for m in macros for t, _ in m.steps)

    def test_mining_deterministic(self, replay_corpus, mined_macros):
        again, _, _ = mine_macros(replay_corpus["paths"])
        assert [(m.id, m.steps, m.support) for m in again] == \
            [(m.id, m.steps, m.support) for m in mined_macros["macros"]]


class TestMacroFile:
    def test_roundtrip(self, tmp_path, mined_macros):
        path = tmp_path / "macros.txt"
        save_macros(str(path), mined_macros["macros"])
        loaded = load_macros(str(path))
        assert loaded == mined_macros["macros"]

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("nope\n")
        with pytest.raises(DataError):
            load_macros(str(path))


class TestExecuteMacro:
    BUILD_MACRO = MacroAction(0, (("select", "worker"),
                                  ("build", "supply-structure"), ("gather", "")), 1)

    def test_build_macro_places_structure(self):
        state = new_game(3, difficulty(1), 2000)
        state.players[0].minerals = 200
        state, outcome, ticks = execute_macro(state, self.BUILD_MACRO)
        assert ticks == 24
        assert any(e.owner == 0 and e.kind == "supply-structure"
                   for e in state.entities.values())

    def test_build_macro_without_minerals_is_noop(self):
        state = new_game(3, difficulty(1), 2000)
        state.players[0].minerals = 0
        before_structures = sum(1 for e in state.entities.values() if e.is_structure())
        state, outcome, ticks = execute_macro(state, self.BUILD_MACRO)
        after = sum(1 for e in state.entities.values() if e.is_structure())
        assert after == before_structures
        assert state.tick == 24  # state advanced anyway

    def test_stops_when_game_ends(self):
        state = new_game(3, difficulty(1), 8)  # ends after one decision
        state, outcome, ticks = execute_macro(state, self.BUILD_MACRO)
        assert outcome is Outcome.TIE
        assert ticks == 8

    def test_terminal_state_rejected(self):
        state = new_game(3, difficulty(1), 0)
        with pytest.raises(UsageError):
            execute_macro(state, self.BUILD_MACRO)
