"""Hierarchy construction: controller, optional mid-level nodes, leaves.

Topologies:
  two-layer          controller -> {base, battle}
  three-layer        controller -> {base -> {building, population}, battle}
  final-three-layer  controller -> {base -> {building, population},
                                    battle -> {fight, population}}
  single             one flat policy over every macro (non-hierarchy baseline)

Macro partition: attack/move macros go to the battle side, train macros to
population, the rest (build/gather) to building; in 2-layer form the base leaf
owns all non-battle macros.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from ..approx import (AdamState, NetSpec, Params, init_params, load_checkpoint,
                      param_count, save_checkpoint)
from ..combat import network_spec
from ..engine.observe import CONTROLLER_SLOTS, SCALAR_DIM, spatial_shape
from ..engine.types import map_config
from ..engine import new_game, difficulty
from ..errors import ConfigError, DataError
from ..mining.macros import NOOP_MACRO, MacroAction
from ..rewards import ROLE_BASE, ROLE_BATTLE

DEFAULT_K = 8
TOPOLOGIES = ("two-layer", "three-layer", "final-three-layer", "single")
COMBAT_MODES = ("rule", "network", "mixture")

OBS_CONTROLLER = "controller"
OBS_SCALAR = "scalar"
OBS_BATTLE = "battle"


@dataclass(frozen=True)
class FeatureLayout:
    map_name: str
    scalar_dim: int
    controller_dim: int
    battle_dim: int

    @classmethod
    def for_map(cls, map_name: str) -> "FeatureLayout":
        cfg = map_config(map_name)
        c = 5
        gw, gh = cfg.width // 4, cfg.height // 4
        return cls(map_name, SCALAR_DIM, len(CONTROLLER_SLOTS),
                   SCALAR_DIM + c * gw * gh)

    def dim(self, obs_kind: str) -> int:
        return {OBS_CONTROLLER: self.controller_dim, OBS_SCALAR: self.scalar_dim,
                OBS_BATTLE: self.battle_dim}[obs_kind]


@dataclass
class PolicyNode:
    name: str
    obs_kind: str
    role: str                       # reward role: base | battle
    children: tuple[str, ...] = ()  # empty for leaves
    macros: list[MacroAction] = field(default_factory=list)
    network_leaf: bool = False      # battle leaf driven by the combat network
    params: Params | None = None
    adam: AdamState | None = None
    buffer: list = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def action_count(self) -> int:
        if self.children:
            return len(self.children)
        if self.network_leaf:
            return self.params.spec.output_dim
        return len(self.macros)


@dataclass
class Hierarchy:
    topology: str
    nodes: dict[str, PolicyNode]
    root: str
    K: int
    layout: FeatureLayout
    combat_mode: str = "rule"
    no_leaf_noop: bool = False
    macro_set: list[MacroAction] = field(default_factory=list)

    def node(self, name: str) -> PolicyNode:
        return self.nodes[name]

    def clear_buffers(self):
        for n in self.nodes.values():
            n.buffer.clear()

    def node_names(self) -> list[str]:
        return sorted(self.nodes)

    def params_digest(self) -> dict[str, bytes]:
        return {name: n.params.flat.tobytes() for name, n in self.nodes.items()}


def partition_macros(macros: list[MacroAction]) -> dict[str, list[MacroAction]]:
    parts = {"battle": [], "population": [], "building": []}
    for m in macros:
        if m.is_battle():
            parts["battle"].append(m)
        elif any(t == "train" for t, _ in m.steps):
            parts["population"].append(m)
        else:
            parts["building"].append(m)
    return parts


def _make_node(name: str, obs_kind: str, role: str, layout: FeatureLayout,
               out_dim: int, seed: int, hidden, shared_trunk: bool,
               children=(), macros=None, network_leaf=False,
               groups=None) -> PolicyNode:
    spec = NetSpec(input_dim=layout.dim(obs_kind), output_dim=out_dim,
                   hidden=hidden, shared_trunk=shared_trunk, action_groups=groups)
    params = init_params(spec, seed)
    return PolicyNode(name=name, obs_kind=obs_kind, role=role,
                      children=tuple(children), macros=list(macros or []),
                      network_leaf=network_leaf, params=params,
                      adam=AdamState.for_params(params))


def build_topology(kind: str, macro_set: list[MacroAction],
                   layout: FeatureLayout, seed: int = 0, K: int = DEFAULT_K,
                   combat_mode: str = "rule", no_leaf_noop: bool | None = None,
                   hidden: tuple[int, ...] = (128, 128, 128),
                   shared_trunk: bool | None = None) -> Hierarchy:
    if kind not in TOPOLOGIES:
        raise ConfigError(f"unknown topology {kind!r}")
    if combat_mode not in COMBAT_MODES:
        raise ConfigError(f"unknown combat mode {combat_mode!r}")
    if not macro_set:
        raise ConfigError("macro set must be nonempty")
    if no_leaf_noop is None:
        no_leaf_noop = kind == "final-three-layer"
    if shared_trunk is None:
        shared_trunk = kind == "final-three-layer"
    parts = partition_macros(macro_set)
    base_macros = parts["building"] + parts["population"]
    battle_macros = parts["battle"]
    if kind != "single" and combat_mode == "rule" and not battle_macros:
        raise ConfigError("no battle-capable macro in the macro set")
    if kind in ("three-layer", "final-three-layer"):
        for part in ("building", "population"):
            if not parts[part]:
                raise ConfigError(f"no macro for the {part} leaf")

    def leaf_macros(ms):
        return ms + ([NOOP_MACRO] if not no_leaf_noop else [])

    nodes: dict[str, PolicyNode] = {}

    def add(name, **kw):
        nodes[name] = _make_node(name, seed=seed + len(nodes) * 7919,
                                 layout=layout, hidden=hidden,
                                 shared_trunk=shared_trunk, **kw)

    if kind == "single":
        add("policy", obs_kind=OBS_BATTLE, role=ROLE_BASE,
            out_dim=len(leaf_macros(macro_set)), macros=leaf_macros(macro_set))
        return Hierarchy("single", nodes, "policy", K, layout, combat_mode,
                         no_leaf_noop, list(macro_set))

    if combat_mode == "rule":
        battle_leaf = dict(obs_kind=OBS_BATTLE, role=ROLE_BATTLE,
                           out_dim=len(leaf_macros(battle_macros)),
                           macros=leaf_macros(battle_macros))
    else:
        spec = network_spec(layout.battle_dim, sentinel=combat_mode == "mixture",
                            hidden=hidden, shared_trunk=shared_trunk)
        battle_leaf = dict(obs_kind=OBS_BATTLE, role=ROLE_BATTLE,
                           out_dim=spec.output_dim, network_leaf=True,
                           groups=spec.action_groups)

    if kind == "two-layer":
        add("base", obs_kind=OBS_SCALAR, role=ROLE_BASE,
            out_dim=len(leaf_macros(base_macros)), macros=leaf_macros(base_macros))
        add("battle", **battle_leaf)
        add("controller", obs_kind=OBS_CONTROLLER, role=ROLE_BASE, out_dim=2,
            children=("base", "battle"))
        return Hierarchy(kind, nodes, "controller", K, layout, combat_mode,
                         no_leaf_noop, list(macro_set))

    add("building", obs_kind=OBS_SCALAR, role=ROLE_BASE,
        out_dim=len(leaf_macros(parts["building"])),
        macros=leaf_macros(parts["building"]))
    add("population", obs_kind=OBS_SCALAR, role=ROLE_BASE,
        out_dim=len(leaf_macros(parts["population"])),
        macros=leaf_macros(parts["population"]))
    add("base", obs_kind=OBS_SCALAR, role=ROLE_BASE, out_dim=2,
        children=("building", "population"))
    if kind == "three-layer":
        add("battle", **battle_leaf)
        add("controller", obs_kind=OBS_CONTROLLER, role=ROLE_BASE, out_dim=2,
            children=("base", "battle"))
        return Hierarchy(kind, nodes, "controller", K, layout, combat_mode,
                         no_leaf_noop, list(macro_set))

    # final-three-layer: battle becomes a mid node with a fight child and a
    # control edge into the population node
    fight_leaf = dict(battle_leaf)
    add("fight", **fight_leaf)
    add("battle", obs_kind=OBS_BATTLE, role=ROLE_BATTLE, out_dim=2,
        children=("fight", "population"))
    add("controller", obs_kind=OBS_CONTROLLER, role=ROLE_BASE, out_dim=2,
        children=("base", "battle"))
    return Hierarchy(kind, nodes, "controller", K, layout, combat_mode,
                     no_leaf_noop, list(macro_set))


# ---------------------------------------------------------------------------
# Update scheduling and freezing

@dataclass(frozen=True)
class UpdateMode:
    variant: str                      # "simultaneous" | "alternate"
    rotation: tuple[str, ...] = ()    # alternate order; defaults to sorted names

    def __post_init__(self):
        if self.variant not in ("simultaneous", "alternate"):
            raise ConfigError(f"unknown update mode {self.variant!r}")


SIMULTANEOUS = UpdateMode("simultaneous")
ALTERNATE = UpdateMode("alternate")


@dataclass(frozen=True)
class TrainableMask:
    frozen: frozenset[str] = frozenset()

    def trainable(self, hierarchy: Hierarchy) -> list[str]:
        names = [n for n in hierarchy.node_names() if n not in self.frozen]
        if not names:
            raise ConfigError("at least one node must stay trainable")
        return names


TRAIN_ALL = TrainableMask()


# ---------------------------------------------------------------------------
# Hierarchy checkpoints: directory of per-node files + a topology manifest

def save_hierarchy(path: str, hierarchy: Hierarchy):
    os.makedirs(path, exist_ok=True)
    manifest = {
        "topology": hierarchy.topology, "root": hierarchy.root, "K": hierarchy.K,
        "map": hierarchy.layout.map_name, "combat_mode": hierarchy.combat_mode,
        "no_leaf_noop": hierarchy.no_leaf_noop,
        "nodes": hierarchy.node_names(),
        "macros": [{"id": m.id, "support": m.support,
                    "steps": [list(s) for s in m.steps]}
                   for m in hierarchy.macro_set],
    }
    with open(os.path.join(path, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
    for name, node in hierarchy.nodes.items():
        save_checkpoint(os.path.join(path, f"node_{name}"), node.params, node.adam,
                        extra={"obs_kind": node.obs_kind, "role": node.role,
                               "children": list(node.children),
                               "network_leaf": node.network_leaf,
                               "macro_ids": [m.id for m in node.macros]})


def load_hierarchy(path: str) -> Hierarchy:
    try:
        with open(os.path.join(path, "manifest.json")) as fh:
            manifest = json.load(fh)
    except FileNotFoundError:
        raise DataError(f"{path}: not a hierarchy checkpoint") from None
    macros = {m["id"]: MacroAction(m["id"], tuple(tuple(s) for s in m["steps"]),
                                   m["support"])
              for m in manifest["macros"]}
    macros[NOOP_MACRO.id] = NOOP_MACRO
    nodes = {}
    for name in manifest["nodes"]:
        params, adam, extra = load_checkpoint(os.path.join(path, f"node_{name}.npz"))
        nodes[name] = PolicyNode(
            name=name, obs_kind=extra["obs_kind"], role=extra["role"],
            children=tuple(extra["children"]),
            macros=[macros[i] for i in extra["macro_ids"]],
            network_leaf=extra["network_leaf"], params=params,
            adam=adam if adam is not None else AdamState.for_params(params))
    layout = FeatureLayout.for_map(manifest["map"])
    return Hierarchy(manifest["topology"], nodes, manifest["root"], manifest["K"],
                     layout, manifest["combat_mode"], manifest["no_leaf_noop"],
                     [m for i, m in sorted(macros.items()) if i >= 0])
