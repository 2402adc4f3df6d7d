"""Checkpoint files: NetSpec + Params (+ AdamState) in one .npz, bit-exact."""
from __future__ import annotations

import json
import os

import numpy as np

from ..errors import DataError
from .adam import AdamState
from .net import NetSpec, Params

CHECKPOINT_VERSION = 1


def _spec_to_dict(spec: NetSpec) -> dict:
    return {"input_dim": spec.input_dim, "output_dim": spec.output_dim,
            "hidden": list(spec.hidden), "head": spec.head,
            "shared_trunk": spec.shared_trunk,
            "action_groups": list(spec.action_groups) if spec.action_groups else None}


def _spec_from_dict(d: dict) -> NetSpec:
    return NetSpec(input_dim=d["input_dim"], output_dim=d["output_dim"],
                   hidden=tuple(d["hidden"]), head=d["head"],
                   shared_trunk=d["shared_trunk"],
                   action_groups=tuple(d["action_groups"]) if d["action_groups"] else None)


def save_checkpoint(path: str, params: Params, adam: AdamState | None = None,
                    extra: dict | None = None):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    meta = {"version": CHECKPOINT_VERSION, "spec": _spec_to_dict(params.spec),
            "init_scheme": params.init_scheme, "extra": extra or {}}
    arrays = {"flat": params.flat, "meta": np.frombuffer(
        json.dumps(meta).encode(), dtype=np.uint8)}
    if adam is not None:
        arrays.update(adam_m=adam.m, adam_v=adam.v,
                      adam_scalars=np.array([adam.step, adam.beta1, adam.beta2,
                                             adam.eps]))
    np.savez(path, **arrays)


def load_checkpoint(path: str) -> tuple[Params, AdamState | None, dict]:
    try:
        data = np.load(path if path.endswith(".npz") else path + ".npz")
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise DataError(f"{path}: corrupt checkpoint: {exc}") from exc
    meta = json.loads(bytes(data["meta"]).decode())
    if meta["version"] != CHECKPOINT_VERSION:
        raise DataError(f"{path}: unsupported checkpoint version {meta['version']}")
    params = Params(_spec_from_dict(meta["spec"]), data["flat"].copy(),
                    meta["init_scheme"])
    adam = None
    if "adam_m" in data:
        step, b1, b2, eps = data["adam_scalars"]
        adam = AdamState(data["adam_m"].copy(), data["adam_v"].copy(),
                         int(step), float(b1), float(b2), float(eps))
    return params, adam, meta["extra"]
