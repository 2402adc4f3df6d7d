import numpy as np
import pytest

from macrorts.approx import (AdamState, NetSpec, Params, Tensor, adam_step,
                             backward, forward_policy, forward_value,
                             init_params, load_checkpoint, loss_value,
                             param_count, sample_action, save_checkpoint)
from macrorts.approx.net import VALUE_HEAD
from macrorts.errors import UsageError

rng = np.random.default_rng(12345)


def random_net(spec: NetSpec, scale=0.3) -> Params:
    p = init_params(spec, int(rng.integers(1 << 30)))
    p.flat[:] = rng.standard_normal(p.count) * scale
    p._rebuild_views()
    return p


def make_loss(spec: NetSpec, batch: int):
    """Random linear loss over outputs: healthy nonzero gradients everywhere."""
    w_logits = rng.standard_normal((batch, spec.output_dim)) \
        if spec.head != VALUE_HEAD else None
    w_values = rng.standard_normal(batch)

    def loss_def(outs):
        total = (outs.values * Tensor(w_values)).sum()
        if outs.logits is not None:
            lp = outs.logits.log_softmax(axis=1)
            total = total + (lp * Tensor(w_logits)).sum() * 0.1
        return total

    return loss_def


def finite_diff_check(spec: NetSpec, n_coords=80, h=1e-5, tol=1e-4) -> int:
    params = random_net(spec)
    obs = rng.standard_normal((4, spec.input_dim))
    loss_def = make_loss(spec, 4)
    grad = backward(params, obs, loss_def)
    bad = 0
    for i in rng.choice(params.count, size=min(n_coords, params.count),
                        replace=False):
        orig = params.flat[i]
        params.flat[i] = orig + h
        lp = loss_value(params, obs, loss_def)
        params.flat[i] = orig - h
        lm = loss_value(params, obs, loss_def)
        params.flat[i] = orig
        fd = (lp - lm) / (2 * h)
        denom = max(abs(grad[i]), abs(fd), 1e-8)
        if abs(grad[i] - fd) / denom > tol and abs(grad[i] - fd) > 1e-8:
            bad += 1
    return bad


class TestNetSpec:
    def test_dimension_validation(self):
        with pytest.raises(UsageError):
            NetSpec(input_dim=0, output_dim=2)
        with pytest.raises(UsageError):
            NetSpec(input_dim=2, output_dim=2, hidden=(0,))
        with pytest.raises(UsageError):
            NetSpec(input_dim=2, output_dim=2, head=VALUE_HEAD)
        with pytest.raises(UsageError):
            NetSpec(input_dim=2, output_dim=5, action_groups=(2, 2))

    def test_param_count_matches_vector(self):
        spec = NetSpec(input_dim=7, output_dim=3, hidden=(8, 4))
        p = init_params(spec, 0)
        assert p.count == param_count(spec)
        with pytest.raises(UsageError):
            Params(spec, np.zeros(p.count + 1))


class TestForward:
    def test_zero_weights_uniform(self):
        spec = NetSpec(input_dim=4, output_dim=5, hidden=(8,))
        p = init_params(spec, 0)
        p.flat[:] = 0
        p._rebuild_views()
        probs = forward_policy(p, np.zeros(4))
        assert np.allclose(probs, 0.2)
        assert forward_value(p, np.zeros(4)) == 0.0

    def test_probs_positive_sum_one(self):
        spec = NetSpec(input_dim=4, output_dim=6, hidden=(8, 8))
        p = random_net(spec)
        probs = forward_policy(p, rng.standard_normal(4))
        assert (probs > 0).all()
        assert abs(probs.sum() - 1) < 1e-9

    def test_logit_shift_invariance(self):
        spec = NetSpec(input_dim=4, output_dim=5, hidden=(8,))
        p = random_net(spec)
        obs = rng.standard_normal(4)
        before = forward_policy(p, obs)
        p.view("pb1")[:] += 7.5  # constant shift on every output logit
        assert np.allclose(forward_policy(p, obs), before)

    def test_grouped_softmax_per_group(self):
        spec = NetSpec(input_dim=4, output_dim=11, hidden=(8,),
                       action_groups=(3, 8))
        p = random_net(spec)
        probs = forward_policy(p, rng.standard_normal(4))
        assert abs(probs[:3].sum() - 1) < 1e-9
        assert abs(probs[3:].sum() - 1) < 1e-9

    def test_hand_computed_2_2_1_value_net(self):
        spec = NetSpec(input_dim=2, output_dim=1, hidden=(2,), head=VALUE_HEAD)
        p = init_params(spec, 3)
        p.view("vW0")[:] = [[1.0, -2.0], [0.5, 3.0]]
        p.view("vb0")[:] = [0.1, -0.2]
        p.view("vW1")[:] = [[2.0], [-1.0]]
        p.view("vb1")[:] = [0.25]
        x = np.array([1.0, 2.0])
        hiddens = np.maximum(x @ p.view("vW0") + p.view("vb0"), 0)
        expect = float(hiddens @ p.view("vW1")[:, 0] + p.view("vb1")[0])
        assert forward_value(p, x) == expect

    def test_forward_purity(self):
        spec = NetSpec(input_dim=3, output_dim=2, hidden=(4,))
        p = random_net(spec)
        obs = rng.standard_normal(3)
        assert forward_value(p, obs) == forward_value(p, obs)

    def test_dimension_mismatch_rejected(self):
        spec = NetSpec(input_dim=3, output_dim=2, hidden=(4,))
        p = random_net(spec)
        with pytest.raises(UsageError):
            forward_policy(p, np.zeros(4))
        with pytest.raises(UsageError):
            forward_value(p, np.zeros(2))

    def test_sample_action_joint_probability(self):
        spec = NetSpec(input_dim=3, output_dim=11, hidden=(4,),
                       action_groups=(3, 8))
        p = random_net(spec)
        import random as pyrandom
        obs = rng.standard_normal(3)
        probs = forward_policy(p, obs)
        idx, joint = sample_action(p, obs, pyrandom.Random(0))
        assert len(idx) == 2
        assert joint == pytest.approx(probs[idx[0]] * probs[3 + idx[1]])


class TestBackward:
    @pytest.mark.parametrize("shared", [False, True])
    def test_policy_gradcheck(self, shared):
        spec = NetSpec(input_dim=6, output_dim=4, hidden=(8, 8),
                       shared_trunk=shared)
        assert finite_diff_check(spec) == 0

    def test_value_gradcheck(self):
        spec = NetSpec(input_dim=5, output_dim=1, hidden=(8,), head=VALUE_HEAD)
        assert finite_diff_check(spec) == 0

    def test_grouped_gradcheck(self):
        spec = NetSpec(input_dim=6, output_dim=11, hidden=(8,),
                       action_groups=(3, 8))
        assert finite_diff_check(spec) == 0

    def test_constant_loss_zero_gradient(self):
        spec = NetSpec(input_dim=3, output_dim=2, hidden=(4,))
        p = random_net(spec)
        grad = backward(p, rng.standard_normal((2, 3)),
                        lambda outs: outs.values.sum() * 0.0)
        assert (grad == 0).all()

    def test_gradient_linearity(self):
        spec = NetSpec(input_dim=3, output_dim=2, hidden=(4,))
        p = random_net(spec)
        obs = rng.standard_normal((3, 3))
        g1 = backward(p, obs, lambda o: o.values.sum())
        g2 = backward(p, obs, lambda o: o.values.sum() * 2.0)
        assert np.allclose(g2, 2 * g1)

    def test_shared_trunk_gradient_is_sum_of_heads(self):
        spec = NetSpec(input_dim=5, output_dim=3, hidden=(6,), shared_trunk=True)
        p = random_net(spec)
        obs = rng.standard_normal((4, 5))
        w = rng.standard_normal((4, 3))

        def policy_loss(o):
            return (o.logits.log_softmax(axis=1) * Tensor(w)).sum()

        def value_loss(o):
            return o.values.sum()

        g_pol = backward(p, obs, policy_loss)
        g_val = backward(p, obs, value_loss)
        g_both = backward(p, obs, lambda o: policy_loss(o) + value_loss(o))
        assert np.allclose(g_both, g_pol + g_val, atol=1e-12)


class TestAdam:
    def test_zero_gradient_keeps_params(self):
        spec = NetSpec(input_dim=2, output_dim=2, hidden=(3,))
        p = random_net(spec)
        before = p.flat.copy()
        st = AdamState.for_params(p)
        adam_step(p, np.zeros(p.count), st, 0.1)
        assert (p.flat == before).all()
        assert st.step == 1

    def test_first_step_sign(self):
        spec = NetSpec(input_dim=2, output_dim=2, hidden=(3,))
        p = random_net(spec)
        before = p.flat.copy()
        g = rng.standard_normal(p.count)
        g[np.abs(g) < 0.1] = 0.5
        adam_step(p, g, AdamState.for_params(p), 0.01)
        moved = p.flat - before
        assert (np.sign(moved) == -np.sign(g)).all()

    def test_nonfinite_gradient_rejected(self):
        spec = NetSpec(input_dim=2, output_dim=2, hidden=(3,))
        p = random_net(spec)
        g = np.zeros(p.count)
        g[3] = np.nan
        with pytest.raises(UsageError, match="coordinate 3"):
            adam_step(p, g, AdamState.for_params(p), 0.01)

    def test_quadratic_convergence(self):
        target = rng.standard_normal(10)
        spec = NetSpec(input_dim=1, output_dim=1, hidden=(2,), head=VALUE_HEAD)
        p = init_params(spec, 0)
        target = rng.standard_normal(p.count)
        st = AdamState.for_params(p)
        initial = float(((p.flat - target) ** 2).sum())
        for _ in range(400):
            adam_step(p, 2 * (p.flat - target), st, 0.05)
        assert ((p.flat - target) ** 2).sum() < 1e-3 * initial


class TestCheckpoint:
    def test_bit_exact_roundtrip(self, tmp_path):
        spec = NetSpec(input_dim=6, output_dim=4, hidden=(8, 8), shared_trunk=True)
        p = random_net(spec)
        st = AdamState.for_params(p)
        st.m[:] = rng.standard_normal(p.count)
        st.step = 17
        path = str(tmp_path / "ck")
        save_checkpoint(path, p, st, {"stage": 2})
        p2, st2, extra = load_checkpoint(path + ".npz")
        assert (p2.flat == p.flat).all()
        assert p2.spec == spec
        assert (st2.m == st.m).all() and st2.step == 17
        assert extra == {"stage": 2}
        obs = rng.standard_normal(6)
        assert (forward_policy(p, obs) == forward_policy(p2, obs)).all()
        assert forward_value(p, obs) == forward_value(p2, obs)
