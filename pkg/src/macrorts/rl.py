"""GAE advantage estimation and the clipped-surrogate policy update.

The minimized objective is
    total = -clip_surrogate + c1 * value_loss - c2 * entropy
with the surrogate clip(ratio, 1-eps, 1+eps) form, value loss as squared error
against the GAE return target, and entropy summed over action groups.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .approx import AdamState, Params, Tensor, adam_step, backward, policy_logits
from .errors import ConfigError, DataError, UsageError


@dataclass(frozen=True)
class Transition:
    obs: np.ndarray
    action: tuple[int, ...]
    reward: float
    next_obs: np.ndarray
    done: bool
    behavior_prob: float

    def __post_init__(self):
        if not 0 < self.behavior_prob <= 1:
            raise DataError(f"behavior_prob must be in (0, 1], got {self.behavior_prob}")


@dataclass(frozen=True)
class PpoConfig:
    gamma: float = 0.99
    lam: float = 0.95
    clip: float = 0.2
    c1: float = 0.5
    c2: float = 0.01
    lr: float = 3e-4
    batch_size: int = 64
    epochs: int = 4
    normalize_advantages: bool = True
    episodes_per_iter: int | None = None  # preset hint for the training loop

    def __post_init__(self):
        if not 0 <= self.gamma <= 1:
            raise ConfigError("gamma must be in [0, 1]")
        if not 0 <= self.lam <= 1:
            raise ConfigError("lambda must be in [0, 1]")
        if self.clip <= 0:
            raise ConfigError("clip epsilon must be > 0")
        if self.batch_size < 1 or self.epochs < 1:
            raise ConfigError("batch_size and epochs must be >= 1")


PPO_PRESETS: dict[str, PpoConfig] = {
    # published 2-layer parameter set
    "paper-2layer": PpoConfig(gamma=1.0, lam=1.0, clip=0.1, c1=0.01, c2=1e-5,
                              lr=1e-4, batch_size=64, epochs=20),
    # published final 3-layer parameter set
    "paper-final3": PpoConfig(gamma=0.9995, lam=0.9995, clip=0.2, c1=0.5, c2=1e-3,
                              lr=1e-4, batch_size=512, epochs=20,
                              episodes_per_iter=1000),
    # fast settings for smoke tests and toy problems
    "smoke": PpoConfig(gamma=0.99, lam=0.95, clip=0.2, c1=0.5, c2=0.01,
                       lr=3e-3, batch_size=32, epochs=4),
}


def ppo_preset(name: str) -> PpoConfig:
    try:
        return PPO_PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown PPO preset {name!r}") from None


@dataclass
class AdvantageBatch:
    advantages: np.ndarray
    returns: np.ndarray
    normalized: bool = False
    norm_mean: float = 0.0
    norm_std: float = 1.0


def compute_gae(traj: list[Transition], values: np.ndarray, gamma: float,
                lam: float) -> AdvantageBatch:
    """Truncated GAE over one episode: values has a bootstrap entry at the end
    (zero when the episode terminated)."""
    n = len(traj)
    if len(values) != n + 1:
        raise UsageError(f"values must have length {n + 1}, got {len(values)}")
    advantages = np.zeros(n)
    last = 0.0
    for t in range(n - 1, -1, -1):
        tr = traj[t]
        nonterminal = 0.0 if tr.done else 1.0
        delta = tr.reward + gamma * values[t + 1] * nonterminal - values[t]
        last = delta + gamma * lam * nonterminal * last
        advantages[t] = last
    return AdvantageBatch(advantages, advantages + values[:-1])


def normalize_advantages(adv: np.ndarray) -> AdvantageBatch:
    mean = float(adv.mean())
    std = float(adv.std())
    out = (adv - mean) / (std + 1e-8)
    batch = AdvantageBatch(out, out, normalized=True, norm_mean=mean, norm_std=std)
    return batch


@dataclass
class PpoBatch:
    obs: np.ndarray          # (B, D)
    actions: np.ndarray      # (B, n_groups) int
    advantages: np.ndarray   # (B,)
    returns: np.ndarray      # (B,)
    behavior_prob: np.ndarray  # (B,)

    def __post_init__(self):
        if len(self.obs) == 0:
            raise UsageError("empty batch")
        if (self.behavior_prob <= 0).any():
            raise DataError("zero behavior probability in batch")


@dataclass
class LossReport:
    total: float
    clip: float        # the surrogate (to be maximized)
    value: float
    entropy: float


def _group_slices(groups: tuple[int, ...]):
    start = 0
    for g in groups:
        yield start, start + g
        start += g


def _loss_terms(outs, batch: PpoBatch, old_logp: np.ndarray, cfg: PpoConfig):
    groups = outs.spec.groups
    logp = None
    entropy = None
    for gi, (a, b) in enumerate(_group_slices(groups)):
        lp = outs.logits.cols(a, b).log_softmax(axis=1)
        chosen = lp.pick(batch.actions[:, gi])
        logp = chosen if logp is None else logp + chosen
        ent_g = (lp.exp() * lp).sum(axis=1) * -1.0
        entropy = ent_g if entropy is None else entropy + ent_g
    ratio = (logp - Tensor(old_logp)).exp()
    adv = Tensor(batch.advantages)
    surrogate = (ratio * adv).minimum(ratio.clip(1 - cfg.clip, 1 + cfg.clip) * adv).mean()
    value_loss = ((outs.values - Tensor(batch.returns)) ** 2.0).mean()
    mean_entropy = entropy.mean()
    total = -1.0 * surrogate + cfg.c1 * value_loss - cfg.c2 * mean_entropy
    return total, surrogate, value_loss, mean_entropy, logp


def _old_logp(old_params: Params, batch: PpoBatch) -> np.ndarray:
    logits = policy_logits(old_params, batch.obs)
    out = np.zeros(len(batch.obs))
    for gi, (a, b) in enumerate(_group_slices(old_params.spec.groups)):
        z = logits[:, a:b]
        z = z - z.max(axis=1, keepdims=True)
        lp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
        out += lp[np.arange(len(batch.obs)), batch.actions[:, gi]]
    return out


def ppo_loss(batch: PpoBatch, old_params: Params, params: Params,
             cfg: PpoConfig) -> LossReport:
    """Loss components at the current parameters (no gradient side effects)."""
    old_logp = _old_logp(old_params, batch)
    report = [None]

    def loss_def(outs):
        total, surr, vf, ent, _ = _loss_terms(outs, batch, old_logp, cfg)
        report[0] = LossReport(float(total.data), float(surr.data),
                               float(vf.data), float(ent.data))
        return total

    from .approx import loss_value
    loss_value(params, batch.obs, loss_def)
    return report[0]


def ppo_loss_grad(batch: PpoBatch, old_logp: np.ndarray, params: Params,
                  cfg: PpoConfig) -> tuple[LossReport, np.ndarray]:
    report = [None]

    def loss_def(outs):
        total, surr, vf, ent, _ = _loss_terms(outs, batch, old_logp, cfg)
        report[0] = LossReport(float(total.data), float(surr.data),
                               float(vf.data), float(ent.data))
        return total

    grad = backward(params, batch.obs, loss_def)
    return report[0], grad


@dataclass
class UpdateStats:
    loss: float
    clip: float
    value_loss: float
    entropy: float
    approx_kl: float
    n_transitions: int


def _episode_segments(buffer: list[Transition]):
    start = 0
    for i, tr in enumerate(buffer):
        if tr.done:
            yield buffer[start:i + 1]
            start = i + 1
    if start < len(buffer):
        yield buffer[start:]


def ppo_update(buffer: list[Transition], params: Params, optimizer: AdamState,
               cfg: PpoConfig, rng: np.random.Generator) -> UpdateStats:
    """One PPO update: GAE with the pre-update network, then epochs of
    shuffled minibatches."""
    from .approx import forward_value

    if not buffer:
        raise UsageError("ppo_update on an empty buffer")
    all_adv = []
    all_ret = []
    for segment in _episode_segments(buffer):
        obs = np.stack([t.obs for t in segment])
        values = forward_value(params, obs)
        boot = 0.0 if segment[-1].done else float(
            forward_value(params, segment[-1].next_obs))
        values = np.append(values, boot)
        gae = compute_gae(segment, values, cfg.gamma, cfg.lam)
        all_adv.append(gae.advantages)
        all_ret.append(gae.returns)
    advantages = np.concatenate(all_adv)
    returns = np.concatenate(all_ret)
    if cfg.normalize_advantages:
        advantages = normalize_advantages(advantages).advantages

    obs = np.stack([t.obs for t in buffer])
    actions = np.array([t.action for t in buffer], dtype=np.int64)
    if actions.ndim == 1:
        actions = actions[:, None]
    behavior = np.array([t.behavior_prob for t in buffer])
    full = PpoBatch(obs, actions, advantages, returns, behavior)
    old_logp = _old_logp(params, full)

    n = len(buffer)
    last_report = None
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            if len(idx) == 0:
                continue
            mini = PpoBatch(obs[idx], actions[idx], advantages[idx], returns[idx],
                            behavior[idx])
            report, grad = ppo_loss_grad(mini, old_logp[idx], params, cfg)
            adam_step(params, grad, optimizer, cfg.lr)
            last_report = report

    new_logp = _old_logp(params, full)
    approx_kl = float(np.mean(old_logp - new_logp))
    return UpdateStats(last_report.total, last_report.clip, last_report.value,
                       last_report.entropy, approx_kl, n)
