"""Scratch probe: 2-layer training vs level 1 (tuning aid, not shipped)."""
import sys
import tempfile
import os
import time

from macrorts.engine import new_game, step, scripted_expert, write_game_log, difficulty
from macrorts.mining import mine_macros
from macrorts.rewards import RewardSpec, collect_expert_stats
from macrorts.rl import ppo_preset
from macrorts.hrl import EnvConfig, FeatureLayout, build_topology, train

map_name = sys.argv[1] if len(sys.argv) > 1 else "flat32"
max_ticks = int(sys.argv[2]) if len(sys.argv) > 2 else 1600
iters = int(sys.argv[3]) if len(sys.argv) > 3 else 50
M = int(sys.argv[4]) if len(sys.argv) > 4 else 50
seed = int(sys.argv[5]) if len(sys.argv) > 5 else 1

d = tempfile.mkdtemp()
paths = []
for s_ in range(30):
    st = new_game(s_, difficulty(1 + s_ % 3), 2000)
    p = os.path.join(d, f"g{s_}.replay")
    log = write_game_log(p, st)
    while not st.terminal:
        step(st, scripted_expert(st), log=log)
    log.end(st)
    paths.append(p)
macros, _, _ = mine_macros(paths)
stats = collect_expert_stats(paths)
print("macros:", len(macros), flush=True)

layout = FeatureLayout.for_map(map_name)
noop_flag = len(sys.argv) > 6 and sys.argv[6] == "nonoop"
hier = build_topology("two-layer", macros, layout, seed=seed, hidden=(64, 64),
                      no_leaf_noop=noop_flag)
spec = RewardSpec(kind="designed", expert_stats=stats)
env = EnvConfig(level=1, map_name=map_name, max_ticks=max_ticks)
t0 = time.time()


def report(rec):
    print(f"iter {rec.iteration}: win {rec.win_rate:.2f} tie {rec.tie_rate:.2f} "
          f"len {rec.mean_ticks:.0f} ({time.time()-t0:.0f}s)", flush=True)


train(hier, env, spec, ppo_preset("paper-2layer"), iterations=iters,
      episodes_per_iter=M, seed=seed, workers=2, on_iteration=report,
      stop_win_rate=0.92)
print("DONE", flush=True)
