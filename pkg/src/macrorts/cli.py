"""Command-line pipeline: gen-replays | mine | train | evaluate.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 runtime error.
All commands are reproducible from their config + seeds; the effective config
is archived beside the outputs.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .curriculum import CurriculumStage, Schedule, run_schedule
from .engine import (Outcome, difficulty, new_game, scripted_expert, step,
                     write_game_log)
from .errors import ConfigError, DataError, MacroRtsError
from .experiment import (CONFIG_PRESETS, ExperimentConfig, stage_ppo_config,
                         stage_reward_spec)
from .hrl import (ALTERNATE, SIMULTANEOUS, EnvConfig, FeatureLayout,
                  TrainableMask, UpdateMode, evaluate, load_hierarchy)
from .mining import mine_macros, load_macros, save_macros
from .rewards import ExpertStats, collect_expert_stats

CURVES_SCHEMA = "macrorts-curves v1"
EVAL_SCHEMA = "macrorts-eval v1"


def _fixed_curve_columns():
    return ["stage", "iteration", "episodes", "wins", "ties", "losses",
            "win_rate", "tie_rate", "mean_ticks"]


class CurveWriter:
    """Crash-safe incremental CSV: append + flush per row."""

    def __init__(self, path: str, node_names: list[str], resume: bool = False):
        self.path = path
        self.nodes = list(node_names)
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        if resume and os.path.exists(path):
            return
        cols = _fixed_curve_columns() + \
            [f"loss_{n}" for n in self.nodes] + [f"entropy_{n}" for n in self.nodes]
        with open(path, "w") as fh:
            fh.write(f"# {CURVES_SCHEMA} nodes={','.join(self.nodes)}\n")
            fh.write(",".join(cols) + "\n")

    def row(self, stage: int, rec):
        vals = [stage, rec.iteration, rec.episodes, rec.wins, rec.ties, rec.losses,
                f"{rec.win_rate:.10g}", f"{rec.tie_rate:.10g}",
                f"{rec.mean_ticks:.10g}"]
        for name in self.nodes:
            st = rec.node_stats.get(name)
            vals.append(f"{st.loss:.10g}" if st else "")
        for name in self.nodes:
            st = rec.node_stats.get(name)
            vals.append(f"{st.entropy:.10g}" if st else "")
        with open(self.path, "a") as fh:
            fh.write(",".join(str(v) for v in vals) + "\n")
            fh.flush()
            os.fsync(fh.fileno())


def cmd_gen_replays(cfg: ExperimentConfig, games: int | None = None) -> int:
    games = games or cfg.mining.games
    if games < 1:
        raise ConfigError("games must be >= 1")
    out = os.path.join(cfg.out, "replays")
    os.makedirs(out, exist_ok=True)
    manifest = {"games": [], "wins": 0, "ties": 0, "losses": 0}
    levels = cfg.mining.expert_levels
    for i in range(games):
        seed = cfg.seed + i
        level = levels[i % len(levels)]
        state = new_game(seed, difficulty(level), cfg.engine.max_ticks,
                         cfg.engine.map)
        path = os.path.join(out, f"game_{i:04d}.replay")
        log = write_game_log(path, state)
        while not state.terminal:
            step(state, scripted_expert(state), log=log)
        log.end(state)
        manifest["games"].append({"seed": seed, "level": level,
                                  "outcome": state.outcome.value,
                                  "ticks": state.tick, "path": path})
        key = {"Win": "wins", "Tie": "ties", "Loss": "losses"}[state.outcome.value]
        manifest[key] += 1
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=1)
    print(f"wrote {games} replays to {out} "
          f"({manifest['wins']} wins, {manifest['ties']} ties)")
    return 0


def cmd_mine(cfg: ExperimentConfig, replay_dir: str | None = None) -> int:
    replay_dir = replay_dir or os.path.join(cfg.out, "replays")
    logs = sorted(os.path.join(replay_dir, f) for f in os.listdir(replay_dir)
                  if f.endswith(".replay"))
    if not logs:
        raise DataError(f"no replay logs in {replay_dir}")
    m = cfg.mining
    macros, patterns, db = mine_macros(logs, fragment_ticks=m.fragment_ticks,
                                       min_support=m.min_support,
                                       max_len=m.max_len, top_k=m.top_k)
    if not macros:
        raise DataError(
            f"mining produced no macro-actions from {len(db.sequences)} fragments; "
            f"lower min_support (used {m.min_support or '3% of fragments'})")
    macro_path = os.path.join(cfg.out, "macros.txt")
    save_macros(macro_path, macros)
    stats = collect_expert_stats(logs)
    with open(os.path.join(cfg.out, "expert_stats.json"), "w") as fh:
        json.dump(stats.means, fh, indent=1, sort_keys=True)
    report = os.path.join(cfg.out, "frequency_report.txt")
    with open(report, "w") as fh:
        fh.write("macro-action frequency report (support-sorted)\n")
        for mac in macros:
            fh.write(f"{mac.support:6d}  {mac.describe()}\n")
        fh.write(f"\ntop mined patterns before postprocessing "
                 f"({len(patterns)} total):\n")
        for p in patterns[:30]:
            fh.write(f"{p.support:6d}  {' -> '.join(f'{t}:{a}' if a else t for t, a in p.tokens)}\n")
    print(f"mined {len(macros)} macro-actions from {len(db.sequences)} fragments "
          f"-> {macro_path}")
    return 0


def _update_mode(stage) -> UpdateMode:
    return ALTERNATE if stage.update_mode == "alternate" else SIMULTANEOUS


def cmd_train(cfg: ExperimentConfig, macro_file: str | None = None,
              resume: bool = False) -> int:
    macro_file = macro_file or os.path.join(cfg.out, "macros.txt")
    if not os.path.exists(macro_file):
        raise DataError(f"macro file {macro_file} not found; run mine first")
    macros = load_macros(macro_file)
    stats_path = os.path.join(cfg.out, "expert_stats.json")
    stats = None
    if os.path.exists(stats_path):
        with open(stats_path) as fh:
            stats = ExpertStats(json.load(fh))
    stages = []
    for s in cfg.schedule:
        stages.append(CurriculumStage(
            level=s.level, map_name=s.map or cfg.engine.map, init=s.init,
            update_mode=_update_mode(s), reward=stage_reward_spec(s, stats),
            ppo=stage_ppo_config(s), iterations=s.iterations,
            episodes_per_iter=s.episodes_per_iter,
            max_ticks=s.max_ticks or cfg.engine.max_ticks,
            mask=TrainableMask(frozenset(s.freeze)),
            stop_win_rate=s.stop_win_rate))
    schedule = Schedule(tuple(stages))
    cfg.save(os.path.join(cfg.out, "config.json"))

    # resolve node names for the CSV schema
    layout = FeatureLayout.for_map(stages[0].map_name)
    from .hrl import build_topology
    probe = build_topology(cfg.topology, macros, layout, seed=cfg.seed,
                           combat_mode=cfg.combat, hidden=cfg.hidden, K=cfg.K)
    csv_path = os.path.join(cfg.out, "curves.csv")
    state_path = os.path.join(cfg.out, "train_state.json")
    writer = CurveWriter(csv_path, probe.node_names(), resume=resume)

    done_stages = 0
    if resume and os.path.exists(state_path):
        with open(state_path) as fh:
            done_stages = json.load(fh)["completed_stages"]
        print(f"resuming after {done_stages} completed stages")

    def on_iteration(stage_idx, rec):
        writer.row(done_stages + stage_idx, rec)

    remaining = Schedule(tuple(stages[done_stages:]))
    if not remaining.stages:
        print("nothing to do")
        return 0
    outcomes = run_schedule(remaining, cfg.topology, macros, cfg.out,
                            seed=cfg.seed, workers=cfg.workers,
                            combat_mode=cfg.combat, hidden=cfg.hidden,
                            on_iteration=on_iteration, K=cfg.K)
    for i, oc in enumerate(outcomes):
        with open(state_path, "w") as fh:
            json.dump({"completed_stages": done_stages + i + 1}, fh)
        print(f"stage {done_stages + i} (L{oc.stage.level}): "
              f"best win rate {oc.best_win_rate:.2f} -> {oc.best_dir}")
    return 0


def cmd_evaluate(cfg: ExperimentConfig, checkpoint: str,
                 levels=None, games: int | None = None) -> int:
    hier = load_hierarchy(checkpoint)
    levels = levels or cfg.eval.levels
    games = games or cfg.eval.games
    out_path = os.path.join(cfg.out, "evaluation.csv")
    os.makedirs(cfg.out, exist_ok=True)
    rows = []
    for level in levels:
        env = EnvConfig(level, hier.layout.map_name,
                        cfg.eval.max_ticks or cfg.engine.max_ticks)
        res = evaluate(hier, env, games, seed=cfg.seed, workers=cfg.workers)
        rows.append(res)
        print(f"level {level}: win {res['win_rate']:.2f} tie {res['tie_rate']:.2f} "
              f"loss {res['loss_rate']:.2f} mean_ticks {res['mean_ticks']:.0f}")
    with open(out_path, "w") as fh:
        fh.write(f"# {EVAL_SCHEMA}\n")
        fh.write("level,games,wins,ties,losses,win_rate,tie_rate,loss_rate,"
                 "mean_ticks\n")
        for r in rows:
            fh.write(f"{r['level']},{r['games']},{r['wins']},{r['ties']},"
                     f"{r['losses']},{r['win_rate']:.10g},{r['tie_rate']:.10g},"
                     f"{r['loss_rate']:.10g},{r['mean_ticks']:.10g}\n")
    print(f"wrote {out_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="macrorts",
                                 description="macro-action HRL pipeline")
    ap.add_argument("--config", help="experiment config JSON")
    ap.add_argument("--preset", choices=sorted(CONFIG_PRESETS),
                    help="built-in experiment preset")
    ap.add_argument("--seed", type=int, help="override config seed")
    ap.add_argument("--workers", type=int, help="override worker count")
    ap.add_argument("--out", help="override output directory")
    sub = ap.add_subparsers(dest="command", required=True)
    g = sub.add_parser("gen-replays", help="generate expert replay logs")
    g.add_argument("--games", type=int)
    m = sub.add_parser("mine", help="mine macro-actions from replays")
    m.add_argument("--replays", help="replay directory")
    t = sub.add_parser("train", help="run the curriculum schedule")
    t.add_argument("--macros", help="macro-action file")
    t.add_argument("--resume", action="store_true",
                   help="continue from the last completed stage")
    e = sub.add_parser("evaluate", help="evaluate a checkpoint across levels")
    e.add_argument("checkpoint")
    e.add_argument("--levels", help="comma-separated levels (default 1-10)")
    e.add_argument("--games", type=int)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.preset:
            cfg = CONFIG_PRESETS[args.preset]()
            overrides = {"seed": args.seed, "workers": args.workers, "out": args.out}
            from dataclasses import replace as _replace
            cfg = _replace(cfg, **{k: v for k, v in overrides.items()
                                   if v is not None})
        else:
            cfg = ExperimentConfig.load(args.config, overrides={
                "seed": args.seed, "workers": args.workers, "out": args.out})
        if args.command == "gen-replays":
            return cmd_gen_replays(cfg, args.games)
        if args.command == "mine":
            return cmd_mine(cfg, args.replays)
        if args.command == "train":
            return cmd_train(cfg, args.macros, resume=args.resume)
        if args.command == "evaluate":
            levels = None
            if args.levels:
                levels = [int(x) for x in args.levels.split(",")]
            return cmd_evaluate(cfg, args.checkpoint, levels, args.games)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except MacroRtsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
