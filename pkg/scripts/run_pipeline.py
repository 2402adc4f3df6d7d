"""End-to-end demo: replays -> mining -> one training stage -> evaluation.

Writes everything under runs/pipeline_demo (override with --out). Sized to
finish in a few minutes on a laptop; raise iterations for a real run.
"""
import argparse
import os
import sys

from macrorts.cli import cmd_evaluate, cmd_gen_replays, cmd_mine, cmd_train
from macrorts.experiment import (EngineSection, ExperimentConfig, MiningSection,
                                 StageSection)


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="runs/pipeline_demo")
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--workers", type=int, default=min(8, os.cpu_count() or 1))
    ap.add_argument("--iterations", type=int, default=30)
    ap.add_argument("--episodes", type=int, default=50)
    args = ap.parse_args()

    cfg = ExperimentConfig(
        seed=args.seed, workers=args.workers, out=args.out,
        engine=EngineSection(map="flat32", max_ticks=1600),
        mining=MiningSection(games=30),
        topology="two-layer", combat="rule", hidden=(64, 64),
        schedule=(StageSection(level=1, init="scratch", reward="designed",
                               ppo="paper-2layer", iterations=args.iterations,
                               episodes_per_iter=args.episodes,
                               stop_win_rate=0.9),),
    )
    cfg.save(os.path.join(args.out, "config.json"))
    cmd_gen_replays(cfg)
    cmd_mine(cfg)
    cmd_train(cfg)
    cmd_evaluate(cfg, os.path.join(args.out, "stage_0_L1", "best"),
                 levels=[1, 2, 3], games=50)
    print(f"done; see {args.out}/curves.csv and {args.out}/evaluation.csv")
    return 0


if __name__ == "__main__":
    sys.exit(main())
