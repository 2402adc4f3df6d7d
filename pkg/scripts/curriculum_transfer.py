"""Transfer-vs-scratch comparison: how fast does a stage-2 agent reach a 0.5
iteration win rate when initialized from a stage-1 checkpoint?

Per seed: train on the easy level to a threshold, then train two stage-2
agents on the harder level (one from the checkpoint, one fresh) and record
iterations-to-0.5 for each.
"""
import argparse
import json
import os
import statistics
import sys

from macrorts.curriculum import transfer_init
from macrorts.hrl import (EnvConfig, FeatureLayout, build_topology,
                          save_hierarchy, train)
from macrorts.mining import load_macros
from macrorts.rewards import ExpertStats, RewardSpec
from macrorts.rl import ppo_preset


def iterations_to_threshold(records, threshold=0.5):
    for rec in records:
        if rec.win_rate >= threshold:
            return rec.iteration + 1
    return None


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--macros", required=True)
    ap.add_argument("--stats", required=True)
    ap.add_argument("--easy", type=int, default=1)
    ap.add_argument("--hard", type=int, default=3)
    ap.add_argument("--map", default="flat32")
    ap.add_argument("--stage1-iterations", type=int, default=60)
    ap.add_argument("--stage2-iterations", type=int, default=60)
    ap.add_argument("--episodes", type=int, default=48)
    ap.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--workers", type=int, default=min(8, os.cpu_count() or 1))
    ap.add_argument("--out", default="runs/transfer.json")
    args = ap.parse_args()

    macros = load_macros(args.macros)
    stats = ExpertStats(json.load(open(args.stats)))
    reward = RewardSpec(kind="designed", expert_stats=stats)
    layout = FeatureLayout.for_map(args.map)
    ppo = ppo_preset("paper-2layer")

    results = []
    for seed in args.seeds:
        stage1 = build_topology("two-layer", macros, layout, seed=seed,
                                hidden=(64, 64), no_leaf_noop=True)
        train(stage1, EnvConfig(args.easy, args.map, 1600), reward, ppo,
              args.stage1_iterations, args.episodes, seed=seed,
              workers=args.workers, stop_win_rate=0.85)
        ck = f"runs/transfer_ck_seed{seed}"
        save_hierarchy(ck, stage1)

        env_hard = EnvConfig(args.hard, args.map, 1600)
        arms = {}
        for arm in ("transfer", "scratch"):
            agent = build_topology("two-layer", macros, layout, seed=seed + 50,
                                   hidden=(64, 64), no_leaf_noop=True)
            if arm == "transfer":
                agent = transfer_init(ck, agent)
            _, recs = train(agent, env_hard, reward, ppo,
                            args.stage2_iterations, args.episodes,
                            seed=seed + 100, workers=args.workers,
                            stop_win_rate=0.5)
            arms[arm] = iterations_to_threshold(recs)
            print(f"seed {seed} {arm}: iterations to 0.5 = {arms[arm]}",
                  flush=True)
        results.append(arms)
    cap = args.stage2_iterations
    ratio = [(r["transfer"] or cap) / (r["scratch"] or cap) for r in results]
    print(f"median transfer/scratch ratio: {statistics.median(ratio):.2f}")
    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    json.dump({"results": results, "median_ratio": statistics.median(ratio)},
              open(args.out, "w"), indent=1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
