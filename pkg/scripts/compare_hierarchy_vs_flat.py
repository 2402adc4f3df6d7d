"""Paired comparison: two-layer hierarchy vs. the flat single-policy agent.

Trains both arms with identical seeds, episode budgets and rewards on the
chosen level, then evaluates 100 games each and reports the per-seed win-rate
gap and its median.
"""
import argparse
import json
import os
import statistics
import sys

from macrorts.engine import difficulty  # noqa: F401 (validates level)
from macrorts.hrl import (EnvConfig, FeatureLayout, build_topology, evaluate,
                          single_policy_baseline, train)
from macrorts.mining import load_macros
from macrorts.rewards import ExpertStats, RewardSpec
from macrorts.rl import ppo_preset


def train_and_eval(hier, env, reward, iterations, episodes, seed, workers):
    train(hier, env, reward, ppo_preset("paper-2layer"), iterations, episodes,
          seed=seed, workers=workers)
    return evaluate(hier, env, games=100, seed=seed + 5000,
                    workers=workers)["win_rate"]


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--macros", required=True)
    ap.add_argument("--stats", required=True, help="expert_stats.json from mine")
    ap.add_argument("--level", type=int, default=10)
    ap.add_argument("--map", default="flat32")
    ap.add_argument("--iterations", type=int, default=40)
    ap.add_argument("--episodes", type=int, default=48)
    ap.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--workers", type=int, default=min(8, os.cpu_count() or 1))
    ap.add_argument("--out", default="runs/hier_vs_flat.json")
    args = ap.parse_args()

    macros = load_macros(args.macros)
    stats = ExpertStats(json.load(open(args.stats)))
    reward = RewardSpec(kind="designed", expert_stats=stats)
    layout = FeatureLayout.for_map(args.map)
    env = EnvConfig(args.level, args.map, 1600)

    gaps = []
    for seed in args.seeds:
        hier = build_topology("two-layer", macros, layout, seed=seed,
                              hidden=(64, 64), no_leaf_noop=True)
        flat = single_policy_baseline(macros, layout, seed=seed, hidden=(64, 64))
        wr_h = train_and_eval(hier, env, reward, args.iterations, args.episodes,
                              seed, args.workers)
        wr_f = train_and_eval(flat, env, reward, args.iterations, args.episodes,
                              seed, args.workers)
        gaps.append(wr_h - wr_f)
        print(f"seed {seed}: hierarchy {wr_h:.2f} flat {wr_f:.2f} "
              f"gap {wr_h - wr_f:+.2f}", flush=True)
    med = statistics.median(gaps)
    print(f"median gap: {med:+.2f}")
    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    json.dump({"gaps": gaps, "median": med}, open(args.out, "w"), indent=1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
