"""Deterministic micro-RTS simulator."""
from .game import (apply_action, new_game, new_match, state_digest, states_equal,
                   step, step_pair)
from .observe import (CONTROLLER_SLOTS, SCALAR_DIM, SCALAR_FEATURES, battle_dim,
                      observe_battle, observe_controller, observe_scalar,
                      observe_spatial, spatial_shape)
from .replay import Replay, ReplayWriter, read_replay, resimulate, write_game_log
from .scripted import EXPERT_PROFILE, scripted_expert, scripted_opponent
from .types import (ARMY, ATTACK, BASE, BUILD, COMBAT_KINDS, GATHER, MAPS, MELEE,
                    MINERAL, MOVE, NOOP, PRODUCTION, RANGED, SELECT, STATS,
                    STRUCTURE_KINDS, SUPPLY, TECH, TICKS_PER_MINUTE, TICKS_PER_STEP,
                    TRAIN, UNIT_KINDS, WORKER, DifficultyConfig, Entity, GameState,
                    KindStats, MapConfig, Outcome, PlayerState, PrimitiveAction,
                    difficulty, map_config, noop_action, select_action)
