"""Reconstruction losses, KL divergence, loss assembly, beta schedule."""

import numpy as np
import pytest

from somatic_vae.losses import (
    BetaSchedule,
    beta_at_epoch,
    kl_divergence,
    kl_grads,
    reconstruction_grad,
    reconstruction_loss,
    total_loss,
)


# ---------------------------------------------------------------- KL


def test_kl_zero_when_posterior_equals_prior():
    assert kl_divergence(np.zeros((3, 4)), np.zeros((3, 4))) == 0.0


def test_kl_closed_form_spot_values():
    # hand-evaluated: mu=1, logvar=0 -> 0.5; mu=0, logvar=ln 4 -> 1.5 - ln 2
    assert abs(kl_divergence(np.array([[1.0]]), np.array([[0.0]])) - 0.5) < 1e-12
    expected = 1.5 - np.log(2.0)
    got = kl_divergence(np.array([[0.0]]), np.array([[np.log(4.0)]]))
    assert abs(got - expected) < 1e-12


def test_kl_is_mean_over_batch_and_sum_over_dims():
    mu = np.array([[1.0, 0.0], [0.0, 0.0]])
    lv = np.array([[0.0, 0.0], [np.log(4.0), 0.0]])
    per_row = [0.5, 1.5 - np.log(2.0)]
    assert abs(kl_divergence(mu, lv) - np.mean(per_row)) < 1e-12


def test_kl_nonnegative_on_random_inputs():
    rng = np.random.default_rng(0)
    for _ in range(50):
        mu = rng.standard_normal((4, 6)) * 3.0
        lv = rng.uniform(-4.0, 4.0, (4, 6))
        assert kl_divergence(mu, lv) >= 0.0


def test_kl_zero_only_at_standard_normal():
    assert kl_divergence(np.array([[0.0, 0.1]]), np.zeros((1, 2))) > 0.0
    assert kl_divergence(np.zeros((1, 2)), np.array([[0.0, 0.1]])) > 0.0


def test_kl_rejects_shape_mismatch():
    with pytest.raises(ValueError):
        kl_divergence(np.zeros((2, 3)), np.zeros((2, 4)))


def test_kl_grads_match_finite_differences():
    rng = np.random.default_rng(1)
    mu = rng.standard_normal((3, 4))
    lv = rng.uniform(-1.0, 1.0, (3, 4))
    dmu, dlv = kl_grads(mu, lv)
    h = 1e-6
    for arr, grad in ((mu, dmu), (lv, dlv)):
        for idx in np.ndindex(arr.shape):
            orig = arr[idx]
            arr[idx] = orig + h
            hi = kl_divergence(mu, lv)
            arr[idx] = orig - h
            lo = kl_divergence(mu, lv)
            arr[idx] = orig
            assert abs((hi - lo) / (2 * h) - grad[idx]) < 1e-8


# ---------------------------------------------------------------- reconstruction


def test_soft_f1_zero_at_perfect_reconstruction():
    y = np.array([[1.0, 0.0, 1.0], [0.0, 0.0, 1.0]])
    assert abs(reconstruction_loss("soft_f1", y, y)) < 1e-15
    zeros = np.zeros((2, 3))
    assert abs(reconstruction_loss("soft_f1", zeros, zeros)) < 1e-15


def test_soft_f1_near_one_at_total_miss():
    y = np.array([[1.0, 0.0], [0.0, 1.0]])
    loss = reconstruction_loss("soft_f1", 1.0 - y, y)
    assert loss > 1.0 - 1e-7
    assert loss <= 1.0


def test_soft_f1_half_probabilities_worked_example():
    # p = 0.5 everywhere, two ones and two zeros: TP = FP = FN = 1 -> 0.5
    y = np.array([[1.0, 1.0, 0.0, 0.0]])
    p = np.full((1, 4), 0.5)
    assert abs(reconstruction_loss("soft_f1", p, y) - 0.5) < 1e-8


def test_soft_f1_stays_in_unit_interval():
    rng = np.random.default_rng(2)
    for _ in range(25):
        p = rng.random((3, 8))
        y = (rng.random((3, 8)) < 0.3).astype(float)
        loss = reconstruction_loss("soft_f1", p, y)
        assert 0.0 <= loss <= 1.0


def test_bce_half_probabilities_give_ln2():
    y = np.array([[1.0, 0.0], [0.0, 1.0]])
    p = np.full((2, 2), 0.5)
    assert abs(reconstruction_loss("bce", p, y) - np.log(2.0)) < 1e-12


def test_bce_clamps_extreme_probabilities():
    y = np.array([[1.0, 0.0]])
    p = np.array([[0.0, 1.0]])  # worst case, clamped to [1e-7, 1 - 1e-7]
    loss = reconstruction_loss("bce", p, y)
    assert np.isfinite(loss)
    assert abs(loss - (-np.log(1e-7))) < 1e-4


def test_reconstruction_rejects_bad_kind_and_shape():
    with pytest.raises(ValueError, match="kind"):
        reconstruction_loss("mse", np.ones((1, 1)), np.ones((1, 1)))
    with pytest.raises(ValueError):
        reconstruction_loss("bce", np.ones((1, 2)), np.ones((2, 1)))


def test_reconstruction_grads_match_finite_differences():
    rng = np.random.default_rng(3)
    y = (rng.random((3, 5)) < 0.4).astype(float)
    p = rng.uniform(0.05, 0.95, (3, 5))
    h = 1e-7
    for kind in ("bce", "soft_f1"):
        grad = reconstruction_grad(kind, p, y)
        for idx in np.ndindex(p.shape):
            orig = p[idx]
            p[idx] = orig + h
            hi = reconstruction_loss(kind, p, y)
            p[idx] = orig - h
            lo = reconstruction_loss(kind, p, y)
            p[idx] = orig
            fd = (hi - lo) / (2 * h)
            assert abs(fd - grad[idx]) < 1e-5 * max(abs(fd), 1.0)


def test_bce_grad_zero_at_clamped_entries():
    y = np.array([[1.0, 0.0]])
    p = np.array([[1e-9, 1.0 - 1e-9]])
    grad = reconstruction_grad("bce", p, y)
    assert np.array_equal(grad, np.zeros((1, 2)))


# ---------------------------------------------------------------- assembly


def test_total_loss_combination_examples():
    b = total_loss(0.4, 0.2, 0.01, 0.5)
    assert abs(b.total - 0.51) < 1e-15
    assert (b.recon, b.kl, b.l1, b.beta) == (0.4, 0.2, 0.01, 0.5)
    assert total_loss(0.7, 0.3, 0.05, 0.0).total == pytest.approx(0.75)
    assert total_loss(0.7, 0.3, 0.0, 1.0).total == pytest.approx(1.0)


def test_total_loss_rejects_negative_terms():
    for bad in ((-0.1, 0, 0, 0), (0, -0.1, 0, 0), (0, 0, -0.1, 0), (0, 0, 0, -0.1)):
        with pytest.raises(ValueError):
            total_loss(*bad)


# ---------------------------------------------------------------- schedule


def test_linear_warmup_values():
    sched = BetaSchedule("linear_warmup", beta_max=1.0, warmup_epochs=25)
    assert beta_at_epoch(sched, 0) == 0.0
    assert beta_at_epoch(sched, 10) == pytest.approx(0.4)
    assert beta_at_epoch(sched, 25) == 1.0
    assert beta_at_epoch(sched, 100) == 1.0


def test_linear_warmup_scales_with_beta_max():
    sched = BetaSchedule("linear_warmup", beta_max=0.25, warmup_epochs=10)
    assert beta_at_epoch(sched, 5) == pytest.approx(0.125)
    assert beta_at_epoch(sched, 40) == 0.25


def test_constant_schedule():
    sched = BetaSchedule("constant", beta_max=0.7)
    assert beta_at_epoch(sched, 0) == 0.7
    assert beta_at_epoch(sched, 99) == 0.7


def test_schedule_monotone_non_decreasing():
    sched = BetaSchedule("linear_warmup", beta_max=2.0, warmup_epochs=7)
    values = [beta_at_epoch(sched, e) for e in range(30)]
    assert all(b2 >= b1 for b1, b2 in zip(values, values[1:]))


def test_schedule_validation_errors():
    with pytest.raises(ValueError):
        beta_at_epoch(BetaSchedule("linear_warmup"), -1)
    with pytest.raises(ValueError):
        BetaSchedule("cosine").validate()
    with pytest.raises(ValueError):
        BetaSchedule("linear_warmup", beta_max=-1.0).validate()
    with pytest.raises(ValueError):
        BetaSchedule("linear_warmup", warmup_epochs=0).validate()
