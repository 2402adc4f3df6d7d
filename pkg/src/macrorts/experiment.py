"""Experiment configuration: one JSON document drives the whole pipeline.

Every field has a default; `ExperimentConfig.from_dict(cfg.to_dict())` is
lossless. Environment variables MACRORTS_SEED, MACRORTS_WORKERS and
MACRORTS_OUT override the corresponding fields at load time.
"""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, replace

from .errors import ConfigError
from .rewards import RewardSpec, ExpertStats
from .rl import PPO_PRESETS, PpoConfig, ppo_preset

ENV_PREFIX = "MACRORTS_"


@dataclass(frozen=True)
class EngineSection:
    map: str = "flat32"
    max_ticks: int = 1600


@dataclass(frozen=True)
class MiningSection:
    games: int = 30
    expert_levels: tuple[int, ...] = (1, 2, 3)
    fragment_ticks: int = 64
    min_support: int | None = None   # None: 3% of fragments
    max_len: int = 4
    top_k: int = 75


@dataclass(frozen=True)
class StageSection:
    level: int = 1
    map: str | None = None           # None: engine.map
    init: str = "previous"           # previous | scratch | <checkpoint path>
    update_mode: str = "simultaneous"
    reward: str = "designed"         # winloss | score | designed
    ppo: str | dict = "paper-2layer"
    iterations: int = 200
    episodes_per_iter: int = 100
    max_ticks: int | None = None
    freeze: tuple[str, ...] = ()
    stop_win_rate: float | None = None


@dataclass(frozen=True)
class EvalSection:
    games: int = 100
    levels: tuple[int, ...] = tuple(range(1, 11))
    max_ticks: int | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 7
    workers: int = 2
    out: str = "runs/experiment"
    engine: EngineSection = field(default_factory=EngineSection)
    mining: MiningSection = field(default_factory=MiningSection)
    topology: str = "two-layer"
    combat: str = "rule"
    hidden: tuple[int, ...] = (64, 64)
    K: int = 8
    schedule: tuple[StageSection, ...] = (StageSection(),)
    eval: EvalSection = field(default_factory=EvalSection)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hidden"] = list(self.hidden)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        try:
            if "engine" in d:
                d["engine"] = EngineSection(**d["engine"])
            if "mining" in d:
                m = dict(d["mining"])
                if "expert_levels" in m:
                    m["expert_levels"] = tuple(m["expert_levels"])
                d["mining"] = MiningSection(**m)
            if "schedule" in d:
                stages = []
                for s in d["schedule"]:
                    s = dict(s)
                    if "freeze" in s:
                        s["freeze"] = tuple(s["freeze"])
                    stages.append(StageSection(**s))
                d["schedule"] = tuple(stages)
            if "eval" in d:
                e = dict(d["eval"])
                if "levels" in e:
                    e["levels"] = tuple(e["levels"])
                d["eval"] = EvalSection(**e)
            if "hidden" in d:
                d["hidden"] = tuple(d["hidden"])
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(f"bad experiment config: {exc}") from exc

    @classmethod
    def load(cls, path: str | None, overrides: dict | None = None) -> "ExperimentConfig":
        data = {}
        if path is not None:
            with open(path) as fh:
                data = json.load(fh)
        cfg = cls.from_dict(data)
        env_over = {}
        if os.environ.get(ENV_PREFIX + "SEED"):
            env_over["seed"] = int(os.environ[ENV_PREFIX + "SEED"])
        if os.environ.get(ENV_PREFIX + "WORKERS"):
            env_over["workers"] = int(os.environ[ENV_PREFIX + "WORKERS"])
        if os.environ.get(ENV_PREFIX + "OUT"):
            env_over["out"] = os.environ[ENV_PREFIX + "OUT"]
        if env_over:
            cfg = replace(cfg, **env_over)
        if overrides:
            cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
        return cfg

    def save(self, path: str):
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)


def stage_ppo_config(stage: StageSection) -> PpoConfig:
    if isinstance(stage.ppo, str):
        return ppo_preset(stage.ppo)
    return PpoConfig(**stage.ppo)


def stage_reward_spec(stage: StageSection, stats: ExpertStats | None) -> RewardSpec:
    if stage.reward == "designed":
        if stats is None:
            raise ConfigError("designed reward needs mined expert stats")
        return RewardSpec(kind="designed", expert_stats=stats)
    if stage.reward in ("winloss", "score"):
        return RewardSpec(kind=stage.reward)
    raise ConfigError(f"unknown reward preset {stage.reward!r}")


# Curricula presets mirroring the study design: staged non-cheating levels
# with designed rewards and alternate updating at the top, and from-scratch
# outcome-reward training at the cheating levels on the final topology.
def noncheat_schedule() -> tuple[StageSection, ...]:
    return (
        StageSection(level=1, iterations=60, stop_win_rate=0.95),
        StageSection(level=2, iterations=60, stop_win_rate=0.9),
        StageSection(level=5, iterations=80, stop_win_rate=0.85),
        StageSection(level=7, iterations=120, update_mode="alternate"),
    )


def cheat_schedule() -> tuple[StageSection, ...]:
    return tuple(
        StageSection(level=lvl, init="scratch", reward="winloss",
                     ppo="paper-final3", iterations=150)
        for lvl in (8, 9, 10))


CONFIG_PRESETS = {
    "noncheat": lambda: ExperimentConfig(schedule=noncheat_schedule()),
    "cheat": lambda: ExperimentConfig(topology="final-three-layer",
                                      schedule=cheat_schedule()),
}
