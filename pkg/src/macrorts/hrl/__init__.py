"""Hierarchical controller/sub-policy execution and training."""
from .baselines import (random_macro_baseline, random_primitive_baseline,
                        single_policy_baseline)
from .episode import EpisodeResult, RulePlanResolver, run_episode
from .topology import (ALTERNATE, COMBAT_MODES, DEFAULT_K, SIMULTANEOUS,
                       TOPOLOGIES, TRAIN_ALL, FeatureLayout, Hierarchy,
                       PolicyNode, TrainableMask, UpdateMode, build_topology,
                       load_hierarchy, partition_macros, save_hierarchy)
from .train import (EnvConfig, IterationRecord, collect_episode,
                    collect_iteration, episode_seed, evaluate, train)
