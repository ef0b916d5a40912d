from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chainbench.ahpo import (AhpoConfig, AhpoError, ExpertBatch, RolloutGroup, advantages,
                             ahpo_loss, clip_term, demo, gate, grad_check, on_policy_only_loss,
                             random_toy, toy_inputs, toy_loss_and_grad)


def test_advantage_examples():
    np.testing.assert_allclose(advantages([1, 0, 0, 0, 0]), [2.0, -0.5, -0.5, -0.5, -0.5], rtol=1e-6)
    assert advantages([1, 1, 1, 1, 1]).tolist() == [0.0] * 5
    np.testing.assert_allclose(advantages([1, 1, 0, 0]), [1, 1, -1, -1], rtol=1e-6)
    with pytest.raises(AhpoError) as e:
        advantages([1])
    assert e.value.code == "group_too_small"


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=2, max_size=16))
def test_advantages_are_centred(rewards):
    a = advantages(rewards)
    assert abs(a.sum()) < 1e-9
    if len(set(rewards)) > 1:
        assert abs(np.sqrt((a ** 2).mean()) - 1) < 1e-6


def test_gate_boundaries():
    assert gate([1, 1, 1, 0, 0], 2) == 0
    assert gate([1, 0, 0, 0, 0], 2) == 1
    assert gate([1, 1, 0, 0, 0], 2) == 0
    assert gate([0, 0, 0, 0, 0], 2) == 1


def test_clip_term_cases():
    assert clip_term(1.5, 1.0, 0.2) == pytest.approx(1.2)
    for a in (-2.0, -0.3, 0.0, 0.7, 3.0):
        assert clip_term(1.0, a, 0.2) == a
    # r*A = -0.5 and clip(r)*A = -0.8; the smaller of the two is kept
    assert clip_term(0.5, -1.0, 0.2) == pytest.approx(-0.8)


def _group(rng, rewards, max_len=6, spread=0.3):
    logp, old = [], []
    for _ in rewards:
        n = int(rng.integers(1, max_len + 1))
        o = -rng.uniform(0.1, 3.0, size=n)
        old.append(o)
        logp.append(np.minimum(o + rng.normal(0, spread, size=n), 0))
    return RolloutGroup(rewards, logp, old)


def _expert(rng, k=2, max_len=6):
    return ExpertBatch([-rng.uniform(0.05, 4.0, size=int(rng.integers(1, max_len + 1))) for _ in range(k)])


def test_gated_out_loss_is_bit_equal_to_on_policy():
    rng = np.random.default_rng(0)
    for _ in range(200):
        rewards = rng.permutation([1, 1] + list(rng.integers(0, 2, size=3)))
        g = _group(rng, rewards)
        res = ahpo_loss(g, _expert(rng))
        assert res.xi == 0
        assert res.loss == on_policy_only_loss(g)


def test_equal_rewards_leave_only_the_expert_term():
    rng = np.random.default_rng(1)
    for rewards in ([0] * 5, [1] * 5):
        g = _group(rng, rewards, spread=0.0)
        e = _expert(rng)
        res = ahpo_loss(g, e)
        assert all((t == 0).all() for t in res.clip_terms)
        nll = -sum(x.sum() for x in e.logp)
        z = res.xi * e.tokens + g.tokens
        assert res.loss == pytest.approx(res.xi * nll / z, rel=1e-15, abs=0)


def _reference_loss(g, e, cfg):
    """Direct transcription of the objective, one token at a time."""
    r = np.array(g.rewards, dtype=float)
    succ = int((r == 1).sum())
    xi = 1 if succ < cfg.r_hat else 0
    mean = sum(r) / len(r)
    std = (sum((x - mean) ** 2 for x in r) / len(r)) ** 0.5
    adv = [0.0] * len(r) if std == 0 else [(x - mean) / (std + cfg.eps_std) for x in r]
    total_on = 0.0
    n_on = 0
    for lp, old, a in zip(g.logp, g.old_logp, adv):
        for x, y in zip(lp, old):
            ratio = float(np.exp(x - y))
            clipped = min(max(ratio, 1 - cfg.eps), 1 + cfg.eps)
            total_on += min(ratio * a, clipped * a)
            n_on += 1
    total_off = sum(float(x) for lp in e.logp for x in lp)
    n_off = sum(len(lp) for lp in e.logp)
    if cfg.z_mode == "total_tokens":
        return -(xi * total_off + total_on) / (xi * n_off + n_on)
    return -(xi * total_off / n_off + total_on / n_on)


@pytest.mark.parametrize("mode", ["total_tokens", "per_term"])
def test_matches_reference_implementation(mode):
    rng = np.random.default_rng(2)
    cfg = AhpoConfig(z_mode=mode)
    for _ in range(200):
        g = _group(rng, rng.integers(0, 2, size=int(rng.integers(2, 8))))
        e = _expert(rng, k=int(rng.integers(1, 4)))
        got = ahpo_loss(g, e, cfg).loss
        want = _reference_loss(g, e, cfg)
        assert abs(got - want) <= 1e-12 * max(1.0, abs(want))


def test_finite_difference_gradients():
    cfg = AhpoConfig()
    worst = 0.0
    for seed in range(100):
        logits, b = random_toy(seed, cfg, rewards=[1, 0, 0, 0, 0] if seed % 2 else None)
        worst = max(worst, grad_check(logits, b, cfg))
    assert worst <= 1e-5


def test_gated_out_expert_rows_get_no_gradient():
    cfg = AhpoConfig()
    logits, b = random_toy(3, cfg, rewards=[1, 1, 1, 0, 0])
    _, grad, res = toy_loss_and_grad(logits, b, cfg)
    assert res.xi == 0
    rows = np.concatenate(b.expert_ctx)
    assert (grad[rows] == 0).all()


def test_flat_clamped_region_has_zero_gradient():
    # positive advantage and a ratio above 1+eps: the clamped branch is smaller and constant
    g = RolloutGroup([1, 0], [np.log([0.9]), np.log([0.5])], [np.log([0.5]), np.log([0.5])])
    res = ahpo_loss(g, ExpertBatch([]), AhpoConfig())
    assert res.grad_logp[0][0] == 0.0
    assert res.grad_logp[1][0] != 0.0


def test_input_validation():
    with pytest.raises(AhpoError):
        RolloutGroup([0.5, 1], [[-1.0], [-1.0]], [[-1.0], [-1.0]])
    with pytest.raises(AhpoError):
        RolloutGroup([0, 1], [[-1.0], [-1.0, -2.0]], [[-1.0], [-1.0]])
    with pytest.raises(AhpoError):
        ExpertBatch([[0.5]])
    with pytest.raises(ValueError):
        AhpoConfig(eps=1.5)
    with pytest.raises(ValueError):
        AhpoConfig(z_mode="mean")


def test_demo_runs(tmp_path):
    out = demo()
    assert out["xi"] == 1 and out["grad_check_max_rel_error"] <= 1e-5
    batch = tmp_path / "b.json"
    batch.write_text('{"rewards": [1, 0], "logp": [[-1.0], [-2.0]], "old_logp": [[-1.0], [-2.0]],'
                     ' "expert_logp": [[-0.5, -0.25]]}')
    res = demo(str(batch))
    assert res["xi"] == 1 and res["z"] == 4.0


def test_toy_inputs_are_log_probabilities():
    logits, b = random_toy(5)
    g, e = toy_inputs(logits, b)
    assert all((x <= 0).all() for x in g.logp + e.logp)
