"""Feedforward policy/value approximators over a flat parameter vector.

A "categorical-policy" NetSpec bundles the policy head with a scalar value
head (actor-critic pair) over one Params vector, since training always needs
both; shared_trunk=False keeps the two stacks fully disjoint (the 2-layer
setup), shared_trunk=True runs both heads off one trunk (final-3 setup).
A "scalar-value" NetSpec is a bare value network.

`action_groups` partitions the policy output into independent categorical
heads (softmax per group), e.g. (3, 8) for an action head plus an anchor head.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import UsageError
from .autodiff import Tensor, parameter

POLICY_HEAD = "categorical-policy"
VALUE_HEAD = "scalar-value"

_POLICY_OUT_SCALE = 0.01


@dataclass(frozen=True)
class NetSpec:
    input_dim: int
    output_dim: int
    hidden: tuple[int, ...] = (128, 128, 128)
    head: str = POLICY_HEAD
    shared_trunk: bool = False
    action_groups: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.input_dim < 1 or self.output_dim < 1 or any(h < 1 for h in self.hidden):
            raise UsageError("all network dimensions must be >= 1")
        if self.head not in (POLICY_HEAD, VALUE_HEAD):
            raise UsageError(f"unknown head {self.head!r}")
        if self.head == VALUE_HEAD and self.output_dim != 1:
            raise UsageError("value head has output_dim = 1")
        if self.action_groups is not None and sum(self.action_groups) != self.output_dim:
            raise UsageError("action_groups must sum to output_dim")

    @property
    def groups(self) -> tuple[int, ...]:
        return self.action_groups or (self.output_dim,)


def _shapes(spec: NetSpec) -> list[tuple[str, tuple[int, ...]]]:
    def stack(prefix: str, dims: list[int]):
        out = []
        for i, (a, b) in enumerate(zip(dims[:-1], dims[1:])):
            out.append((f"{prefix}W{i}", (a, b)))
            out.append((f"{prefix}b{i}", (b,)))
        return out

    hidden = list(spec.hidden)
    if spec.head == VALUE_HEAD:
        return stack("v", [spec.input_dim] + hidden + [1])
    if spec.shared_trunk:
        return (stack("t", [spec.input_dim] + hidden)
                + stack("p", [hidden[-1], spec.output_dim])
                + stack("v", [hidden[-1], 1]))
    return (stack("p", [spec.input_dim] + hidden + [spec.output_dim])
            + stack("v", [spec.input_dim] + hidden + [1]))


@dataclass
class Params:
    spec: NetSpec
    flat: np.ndarray
    init_scheme: str = "orthogonal"
    _views: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        expected = param_count(self.spec)
        if self.flat.shape != (expected,):
            raise UsageError(f"parameter vector has {self.flat.shape}, "
                             f"spec needs ({expected},)")
        self._rebuild_views()

    def _rebuild_views(self):
        self._views = {}
        off = 0
        for name, shape in _shapes(self.spec):
            n = int(np.prod(shape))
            self._views[name] = self.flat[off:off + n].reshape(shape)
            off += n

    def view(self, name: str) -> np.ndarray:
        return self._views[name]

    def copy(self) -> "Params":
        return Params(self.spec, self.flat.copy(), self.init_scheme)

    @property
    def count(self) -> int:
        return self.flat.size


def param_count(spec: NetSpec) -> int:
    return sum(int(np.prod(shape)) for _, shape in _shapes(spec))


def _orthogonal(shape: tuple[int, int], rng: np.random.Generator, gain: float) -> np.ndarray:
    a = rng.standard_normal(shape)
    q, r = np.linalg.qr(a if shape[0] >= shape[1] else a.T)
    q = q * np.sign(np.diag(r))
    if shape[0] < shape[1]:
        q = q.T
    return gain * q[:shape[0], :shape[1]]


def init_params(spec: NetSpec, seed: int) -> Params:
    """Orthogonal-style init; policy output layer scaled down to keep the
    starting policy near uniform."""
    rng = np.random.default_rng(seed)
    flat = np.zeros(param_count(spec))
    params = Params(spec, flat)
    for name, shape in _shapes(spec):
        if len(shape) == 1:
            continue  # biases start at zero
        last_policy = name.startswith("p") and shape[1] == spec.output_dim \
            and name == [n for n, s in _shapes(spec) if n.startswith("pW")][-1]
        gain = _POLICY_OUT_SCALE if (last_policy and spec.head == POLICY_HEAD) \
            else np.sqrt(2.0)
        params.view(name)[:] = _orthogonal(shape, rng, gain)
    return params


# ---------------------------------------------------------------------------
# Fast numpy forward passes (rollout path, no graph)

def _stack_forward(params: Params, prefix: str, x: np.ndarray,
                   n_layers: int, relu_last: bool) -> np.ndarray:
    for i in range(n_layers):
        x = x @ params.view(f"{prefix}W{i}") + params.view(f"{prefix}b{i}")
        if relu_last or i < n_layers - 1:
            np.maximum(x, 0, out=x)
    return x


def _check_obs(spec: NetSpec, obs: np.ndarray) -> np.ndarray:
    obs = np.asarray(obs, dtype=np.float64)
    if obs.ndim == 1:
        obs = obs[None, :]
    if obs.shape[1] != spec.input_dim:
        raise UsageError(f"observation dim {obs.shape[1]} != spec {spec.input_dim}")
    return obs


def policy_logits(params: Params, obs: np.ndarray) -> np.ndarray:
    spec = params.spec
    if spec.head != POLICY_HEAD:
        raise UsageError("not a policy network")
    x = _check_obs(spec, obs)
    n_hidden = len(spec.hidden)
    if spec.shared_trunk:
        trunk = _stack_forward(params, "t", x, n_hidden, relu_last=True)
        return trunk @ params.view("pW0") + params.view("pb0")
    return _stack_forward(params, "p", x, n_hidden + 1, relu_last=False)


def softmax_groups(logits: np.ndarray, groups: tuple[int, ...]) -> np.ndarray:
    out = np.empty_like(logits)
    start = 0
    for g in groups:
        z = logits[:, start:start + g]
        z = z - z.max(axis=1, keepdims=True)
        e = np.exp(z)
        out[:, start:start + g] = e / e.sum(axis=1, keepdims=True)
        start += g
    return out


def forward_policy(params: Params, obs: np.ndarray) -> np.ndarray:
    """Action probabilities; softmax applied independently per action group.

    1-D obs gives a 1-D probability vector, a batch gives a matrix.
    """
    single = np.asarray(obs).ndim == 1
    probs = softmax_groups(policy_logits(params, obs), params.spec.groups)
    return probs[0] if single else probs


def forward_value(params: Params, obs: np.ndarray):
    spec = params.spec
    x = _check_obs(spec, obs)
    n_hidden = len(spec.hidden)
    if spec.head == VALUE_HEAD:
        out = _stack_forward(params, "v", x, n_hidden + 1, relu_last=False)
    elif spec.shared_trunk:
        trunk = _stack_forward(params, "t", x, n_hidden, relu_last=True)
        out = trunk @ params.view("vW0") + params.view("vb0")
    else:
        out = _stack_forward(params, "v", x, n_hidden + 1, relu_last=False)
    out = out[:, 0]
    return float(out[0]) if np.asarray(obs).ndim == 1 else out


def sample_action(params: Params, obs: np.ndarray, rng) -> tuple[tuple[int, ...], float]:
    """Sample one index per action group; returns indices and joint probability."""
    probs = forward_policy(params, obs)
    idx = []
    joint = 1.0
    start = 0
    for g in params.spec.groups:
        p = probs[start:start + g]
        r = rng.random()
        acc = 0.0
        choice = g - 1
        for i, pi in enumerate(p):
            acc += pi
            if r < acc:
                choice = i
                break
        idx.append(choice)
        joint *= float(p[choice])
        start += g
    return tuple(idx), joint


# ---------------------------------------------------------------------------
# Graph forward (training path)

@dataclass
class NetOutputs:
    """Differentiable network outputs handed to a loss definition."""
    logits: Tensor | None
    values: Tensor | None
    spec: NetSpec


def graph_forward(params: Params, obs: np.ndarray) -> tuple[dict[str, Tensor], NetOutputs]:
    spec = params.spec
    x0 = Tensor(_check_obs(spec, obs))
    tensors = {name: parameter(params.view(name)) for name, _ in _shapes(spec)}

    def stack(prefix: str, x: Tensor, n_layers: int, relu_last: bool) -> Tensor:
        for i in range(n_layers):
            x = x.matmul(tensors[f"{prefix}W{i}"]) + tensors[f"{prefix}b{i}"]
            if relu_last or i < n_layers - 1:
                x = x.relu()
        return x

    n_hidden = len(spec.hidden)
    if spec.head == VALUE_HEAD:
        values = stack("v", x0, n_hidden + 1, relu_last=False)
        return tensors, NetOutputs(None, values.sum(axis=1), spec)
    if spec.shared_trunk:
        trunk = stack("t", x0, n_hidden, relu_last=True)
        logits = trunk.matmul(tensors["pW0"]) + tensors["pb0"]
        values = trunk.matmul(tensors["vW0"]) + tensors["vb0"]
    else:
        logits = stack("p", x0, n_hidden + 1, relu_last=False)
        values = stack("v", x0, n_hidden + 1, relu_last=False)
    return tensors, NetOutputs(logits, values.sum(axis=1), spec)


def backward(params: Params, obs: np.ndarray, loss_def) -> np.ndarray:
    """Exact gradient of the scalar loss_def(NetOutputs) w.r.t. the flat vector."""
    tensors, outs = graph_forward(params, obs)
    loss = loss_def(outs)
    if not isinstance(loss, Tensor):
        raise UsageError("loss definition must return a Tensor scalar")
    loss.backward()
    grad = np.zeros_like(params.flat)
    off = 0
    for name, shape in _shapes(params.spec):
        n = int(np.prod(shape))
        g = tensors[name].grad
        if g is not None:
            grad[off:off + n] = g.ravel()
        off += n
    return grad


def loss_value(params: Params, obs: np.ndarray, loss_def) -> float:
    _, outs = graph_forward(params, obs)
    return float(loss_def(outs).data)
