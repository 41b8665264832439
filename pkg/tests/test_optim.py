"""RMSprop accumulator and update rule."""

import numpy as np
import pytest

from somatic_vae.optim import init_rmsprop, rmsprop_update


def test_zero_gradient_leaves_params_and_decays_accumulator():
    params = [{"w": np.array([1.0, 2.0])}]
    state = init_rmsprop(params)
    state.accumulators[0]["w"][:] = 0.5
    rmsprop_update(params, [{"w": np.zeros(2)}], state, lr=0.1, rho=0.9, eps=1e-8)
    assert np.array_equal(params[0]["w"], [1.0, 2.0])
    assert np.allclose(state.accumulators[0]["w"], [0.45, 0.45])


def test_first_step_from_fresh_state_matches_closed_form():
    # s = 0.1 * 1^2 = 0.1, step = 0.1 * 1 / sqrt(0.1) = sqrt(0.1)
    params = [{"w": np.array([0.0])}]
    state = init_rmsprop(params)
    rmsprop_update(params, [{"w": np.array([1.0])}], state, lr=0.1, rho=0.9, eps=0.0)
    assert np.allclose(state.accumulators[0]["w"], [0.1])
    assert np.allclose(params[0]["w"], [-np.sqrt(0.1)], rtol=1e-14)


def test_two_steps_match_hand_unrolled_recurrence():
    lr, rho, eps = 0.05, 0.9, 1e-8
    g = np.array([2.0, -1.0])
    params = [{"w": np.array([1.0, 1.0])}]
    state = init_rmsprop(params)
    rmsprop_update(params, [{"w": g.copy()}], state, lr=lr, rho=rho, eps=eps)
    rmsprop_update(params, [{"w": g.copy()}], state, lr=lr, rho=rho, eps=eps)

    s1 = (1 - rho) * g**2
    w1 = np.array([1.0, 1.0]) - lr * g / (np.sqrt(s1) + eps)
    s2 = rho * s1 + (1 - rho) * g**2
    w2 = w1 - lr * g / (np.sqrt(s2) + eps)
    assert np.allclose(state.accumulators[0]["w"], s2, rtol=1e-14)
    assert np.allclose(params[0]["w"], w2, rtol=1e-14)
    assert state.step == 2


def test_update_is_in_place_on_the_given_arrays():
    w = np.array([1.0])
    params = [{"w": w}]
    state = init_rmsprop(params)
    rmsprop_update(params, [{"w": np.array([1.0])}], state, lr=0.1)
    assert w[0] != 1.0  # the original array moved


def test_buffer_entries_without_grads_stay_untouched():
    params = [{"w": np.array([1.0]), "run_mean": np.array([0.3]), "run_var": np.array([0.7])}]
    state = init_rmsprop(params)
    rmsprop_update(params, [{"w": np.array([1.0])}], state, lr=0.1)
    assert params[0]["run_mean"][0] == 0.3
    assert params[0]["run_var"][0] == 0.7


def test_shape_mismatch_rejected():
    params = [{"w": np.zeros(2)}]
    state = init_rmsprop(params)
    with pytest.raises(ValueError, match="shape"):
        rmsprop_update(params, [{"w": np.zeros(3)}], state)


def test_accumulators_stay_nonnegative():
    rng = np.random.default_rng(0)
    params = [{"w": rng.standard_normal(8)}]
    state = init_rmsprop(params)
    for _ in range(20):
        rmsprop_update(params, [{"w": rng.standard_normal(8)}], state, lr=1e-3)
        assert (state.accumulators[0]["w"] >= 0.0).all()
