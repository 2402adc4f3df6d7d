"""Curriculum schedules: staged difficulty/map training with checkpoint transfer.

Each stage trains on one (difficulty, map) pair; its best checkpoint (by
iteration win rate) seeds the next stage unless that stage asks for a fresh
start. Feature layouts are map-size independent at a fixed coarse-grid shape,
so checkpoints transfer across same-family maps.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

from .approx import AdamState
from .errors import ConfigError, DataError
from .hrl import (SIMULTANEOUS, TRAIN_ALL, EnvConfig, FeatureLayout, Hierarchy,
                  IterationRecord, TrainableMask, UpdateMode, build_topology,
                  load_hierarchy, save_hierarchy, train)
from .rewards import RewardSpec
from .rl import PpoConfig

FROM_SCRATCH = "scratch"


@dataclass(frozen=True)
class CurriculumStage:
    level: int
    map_name: str = "std32"
    init: str = "previous"        # "previous" | "scratch" | checkpoint path
    update_mode: UpdateMode = SIMULTANEOUS
    reward: RewardSpec = field(default_factory=RewardSpec.__call__)
    ppo: PpoConfig = field(default_factory=PpoConfig.__call__)
    iterations: int = 50
    episodes_per_iter: int = 50
    max_ticks: int = 1600
    mask: TrainableMask = TRAIN_ALL
    stop_win_rate: float | None = None

    def __post_init__(self):
        if self.iterations < 1 or self.episodes_per_iter < 1:
            raise ConfigError("stage needs iterations and episodes_per_iter >= 1")


@dataclass(frozen=True)
class Schedule:
    stages: tuple[CurriculumStage, ...]

    def __post_init__(self):
        if not self.stages:
            raise ConfigError("schedule must be nonempty")


@dataclass
class StageOutcome:
    stage: CurriculumStage
    records: list[IterationRecord]
    best_dir: str
    best_win_rate: float


def transfer_init(checkpoint: str, target: Hierarchy,
                  mask: TrainableMask = TRAIN_ALL) -> Hierarchy:
    """Load parameters for name-matched nodes; unmatched nodes keep fresh init.

    A node whose action space changed between topologies (e.g. the base leaf
    becoming a mid node) counts as unmatched. A matched node (same action
    space) with a different input/hidden layout is a load error."""
    source = load_hierarchy(checkpoint)
    for name, node in target.nodes.items():
        if name not in source.nodes:
            continue
        src = source.nodes[name]
        if src.params.spec.output_dim != node.params.spec.output_dim:
            continue  # repurposed node: keep the fresh init
        if src.params.spec != node.params.spec:
            raise DataError(f"node {name!r}: checkpoint spec {src.params.spec} "
                            f"does not match target {node.params.spec}")
        node.params = src.params
        node.adam = src.adam if src.adam is not None \
            else AdamState.for_params(src.params)
    return target


def run_schedule(schedule: Schedule, topology: str, macro_set, out_dir: str,
                 seed: int = 0, workers: int = 1, combat_mode: str = "rule",
                 hidden: tuple[int, ...] = (128, 128, 128),
                 on_iteration=None, K: int = 8) -> list[StageOutcome]:
    """Execute stages in order; each stage's best checkpoint feeds the next."""
    outcomes: list[StageOutcome] = []
    prev_best: str | None = None
    for idx, stage in enumerate(schedule.stages):
        layout = FeatureLayout.for_map(stage.map_name)
        hier = build_topology(topology, macro_set, layout, seed=seed + idx,
                              combat_mode=combat_mode, hidden=hidden, K=K)
        if stage.init == "previous":
            if prev_best is not None:
                hier = transfer_init(prev_best, hier, stage.mask)
        elif stage.init != FROM_SCRATCH:
            hier = transfer_init(stage.init, hier, stage.mask)
        best_dir = os.path.join(out_dir, f"stage_{idx}_L{stage.level}", "best")
        env = EnvConfig(stage.level, stage.map_name, stage.max_ticks)
        hook = (lambda rec, i=idx: on_iteration(i, rec)) if on_iteration else None
        hier, records = train(hier, env, stage.reward, stage.ppo,
                              stage.iterations, stage.episodes_per_iter,
                              mode=stage.update_mode, mask=stage.mask,
                              seed=seed + 101 * idx, workers=workers,
                              on_iteration=hook, best_dir=best_dir,
                              stop_win_rate=stage.stop_win_rate)
        if not os.path.isdir(best_dir):
            save_hierarchy(best_dir, hier)  # never beat 0 wins: keep final
        best = max((r.win_rate for r in records), default=0.0)
        outcomes.append(StageOutcome(stage, records, best_dir, best))
        prev_best = best_dir
    return outcomes
