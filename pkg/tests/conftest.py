import pytest

from macrorts.engine import (Outcome, difficulty, new_game, scripted_expert, step,
                             write_game_log)


def play_expert_game(seed: int, level: int, max_ticks: int = 2000, log_path=None):
    state = new_game(seed, difficulty(level), max_ticks)
    log = write_game_log(str(log_path), state) if log_path else None
    while not state.terminal:
        step(state, scripted_expert(state), log=log)
    if log is not None:
        log.end(state)
    return state


@pytest.fixture(scope="session")
def replay_corpus(tmp_path_factory):
    """30 expert games vs levels 1-3, one replay log per game."""
    root = tmp_path_factory.mktemp("replays")
    paths = []
    outcomes = []
    for seed in range(30):
        path = root / f"game_{seed:03d}.replay"
        state = play_expert_game(seed, 1 + seed % 3, log_path=path)
        paths.append(str(path))
        outcomes.append(state.outcome)
    return {"paths": paths, "outcomes": outcomes}


@pytest.fixture(scope="session")
def mined_macros(replay_corpus):
    from macrorts.mining import mine_macros

    macros, patterns, db = mine_macros(replay_corpus["paths"])
    return {"macros": macros, "patterns": patterns, "db": db}
