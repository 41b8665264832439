"""Micro-F1, cosine similarity, NMI, classification report, probe."""

import numpy as np
import pytest

from somatic_vae.metrics import (
    classification_report,
    eval_probe,
    fit_probe,
    mean_cosine_similarity,
    micro_f1,
    nmi,
    probe_objective,
)


# ---------------------------------------------------------------- micro-F1


def test_micro_f1_perfect_and_total_miss():
    y = np.array([[1, 0], [0, 1]])
    assert micro_f1(y, y) == 1.0
    assert micro_f1(1 - y, y) == 0.0


def test_micro_f1_pooled_counts_example():
    # TP=1, FP=1, FN=1 -> 2*1 / (2*1 + 1 + 1) = 0.5
    pred = np.array([[1, 1, 0, 0]])
    target = np.array([[1, 0, 1, 0]])
    assert micro_f1(pred, target) == 0.5


def test_micro_f1_no_positives_anywhere_is_one():
    zeros = np.zeros((3, 4), dtype=int)
    assert micro_f1(zeros, zeros) == 1.0


def test_micro_f1_pools_over_all_cells_not_rows():
    pred = np.array([[1, 0], [0, 0]])
    target = np.array([[1, 0], [0, 1]])
    # TP=1, FP=0, FN=1 pooled over the whole matrix
    assert micro_f1(pred, target) == pytest.approx(2 / 3)


def test_micro_f1_rejects_shape_mismatch():
    with pytest.raises(ValueError, match="shape"):
        micro_f1(np.ones((2, 2)), np.ones((2, 3)))


# ---------------------------------------------------------------- cosine


def test_cosine_identical_rows_give_one():
    y = np.array([[1.0, 1.0, 0.0], [0.5, 0.25, 0.0]])
    assert mean_cosine_similarity(y, y) == pytest.approx(1.0)


def test_cosine_orthogonal_supports_give_zero():
    p = np.array([[1.0, 0.0]])
    y = np.array([[0.0, 1.0]])
    assert mean_cosine_similarity(p, y) == 0.0


def test_cosine_worked_example():
    p = np.array([[1.0, 1.0]])
    y = np.array([[1.0, 0.0]])
    assert mean_cosine_similarity(p, y) == pytest.approx(1 / np.sqrt(2))


def test_cosine_zero_row_contributes_zero():
    p = np.array([[1.0, 1.0], [0.0, 0.0]])
    y = np.array([[1.0, 0.0], [1.0, 1.0]])
    expected = (1 / np.sqrt(2) + 0.0) / 2
    assert mean_cosine_similarity(p, y) == pytest.approx(expected)


def test_cosine_bounded_for_nonnegative_inputs():
    rng = np.random.default_rng(0)
    for _ in range(20):
        p = rng.random((4, 6))
        y = (rng.random((4, 6)) < 0.4).astype(float)
        value = mean_cosine_similarity(p, y)
        assert 0.0 <= value <= 1.0


# ---------------------------------------------------------------- NMI


def contingency_nmi(a, b):
    """From-first-principles oracle: joint counts, natural-log entropies,
    arithmetic-mean normalization."""
    a = np.asarray(a)
    b = np.asarray(b)
    n = len(a)
    values_a, values_b = np.unique(a), np.unique(b)
    joint = np.zeros((len(values_a), len(values_b)))
    for i, va in enumerate(values_a):
        for j, vb in enumerate(values_b):
            joint[i, j] = np.sum((a == va) & (b == vb))
    pa = joint.sum(axis=1) / n
    pb = joint.sum(axis=0) / n
    ha = -sum(p * np.log(p) for p in pa if p > 0)
    hb = -sum(p * np.log(p) for p in pb if p > 0)
    if ha == 0 and hb == 0:
        return 1.0
    if ha == 0 or hb == 0:
        return 0.0
    mi = 0.0
    for i in range(len(values_a)):
        for j in range(len(values_b)):
            pij = joint[i, j] / n
            if pij > 0:
                mi += pij * np.log(pij / (pa[i] * pb[j]))
    return mi / (0.5 * (ha + hb))


def test_nmi_identical_partitions():
    labels = np.array([0, 0, 1, 1, 2])
    assert nmi(labels, labels) == pytest.approx(1.0)


def test_nmi_independent_partitions():
    assert nmi([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(0.0, abs=1e-12)


def test_nmi_degenerate_entropy_conventions():
    assert nmi([0, 0, 0], [1, 1, 1]) == 1.0  # both entropies zero
    assert nmi([0, 0, 0], [0, 1, 2]) == 0.0  # exactly one zero


def test_nmi_invariant_to_relabeling():
    rng = np.random.default_rng(1)
    a = rng.integers(0, 4, 60)
    b = rng.integers(0, 3, 60)
    remap = {0: 7, 1: 2, 2: 9}
    b_renamed = np.array([remap[v] for v in b])
    assert nmi(a, b) == pytest.approx(nmi(a, b_renamed), abs=1e-15)


def test_nmi_symmetric_and_bounded():
    rng = np.random.default_rng(2)
    for _ in range(20):
        a = rng.integers(0, 5, 40)
        b = rng.integers(0, 3, 40)
        ab, ba = nmi(a, b), nmi(b, a)
        assert abs(ab - ba) < 1e-12
        assert 0.0 <= ab <= 1.0


def test_nmi_matches_contingency_oracle():
    rng = np.random.default_rng(3)
    for _ in range(10):
        a = rng.integers(0, 4, 50)
        b = rng.integers(0, 4, 50)
        assert nmi(a, b) == pytest.approx(contingency_nmi(a, b), abs=1e-12)


def test_nmi_matches_sklearn_arithmetic_mean():
    sklearn_metrics = pytest.importorskip("sklearn.metrics")
    rng = np.random.default_rng(4)
    for _ in range(10):
        a = rng.integers(0, 6, 80)
        b = rng.integers(0, 4, 80)
        ours = nmi(a, b)
        theirs = sklearn_metrics.normalized_mutual_info_score(
            a, b, average_method="arithmetic"
        )
        assert abs(ours - theirs) < 1e-10


def test_nmi_accepts_string_labels():
    assert nmi(["a", "a", "b", "b"], ["x", "x", "y", "y"]) == pytest.approx(1.0)


def test_nmi_rejects_length_mismatch_and_empty():
    with pytest.raises(ValueError):
        nmi([0, 1], [0, 1, 2])
    with pytest.raises(ValueError):
        nmi([], [])


# ---------------------------------------------------------------- report


def test_report_perfect_prediction():
    y = np.array([1, 0, 1, 0])
    report = classification_report(y, y)
    assert (report.precision, report.recall, report.f1) == (1.0, 1.0, 1.0)
    assert report.support == {0: 2, 1: 2}


def test_report_all_zero_predictions_convention():
    report = classification_report(np.zeros(4, dtype=int), np.array([1, 0, 1, 1]))
    assert (report.precision, report.recall, report.f1) == (0.0, 0.0, 0.0)


def test_report_no_positive_targets_convention():
    report = classification_report(np.array([1, 0]), np.zeros(2, dtype=int))
    assert report.recall == 0.0
    assert report.f1 == 0.0


def test_report_confusion_matrix_example():
    # TP=2, FP=1, FN=1 -> P = R = F1 = 2/3
    report = classification_report(np.array([1, 1, 1, 0]), np.array([1, 0, 1, 1]))
    assert report.precision == pytest.approx(2 / 3)
    assert report.recall == pytest.approx(2 / 3)
    assert report.f1 == pytest.approx(2 / 3)


def test_report_f1_equals_micro_f1_on_row_matrices():
    rng = np.random.default_rng(5)
    for _ in range(10):
        pred = rng.integers(0, 2, 12)
        target = rng.integers(0, 2, 12)
        report = classification_report(pred, target)
        assert report.f1 == pytest.approx(
            micro_f1(pred.reshape(1, -1), target.reshape(1, -1)), abs=1e-15
        )


def test_report_rejects_length_mismatch():
    with pytest.raises(ValueError):
        classification_report(np.ones(3, dtype=int), np.ones(4, dtype=int))


# ---------------------------------------------------------------- probe


def separable_data():
    rng = np.random.default_rng(6)
    pos = rng.normal((2.0, 2.0), 0.3, (20, 2))
    neg = rng.normal((-2.0, -2.0), 0.3, (20, 2))
    x = np.vstack([pos, neg])
    y = np.array([1] * 20 + [0] * 20)
    return x, y


def test_probe_perfect_on_linearly_separable_data():
    x, y = separable_data()
    model = fit_probe(x, y)
    report = eval_probe(model, x, y)
    assert report.f1 == 1.0
    assert np.isfinite(model.weights).all() and np.isfinite(model.bias)


def test_probe_rejects_degenerate_labels():
    x = np.random.default_rng(7).random((6, 3))
    with pytest.raises(ValueError, match="degenerate labels"):
        fit_probe(x, np.ones(6))
    with pytest.raises(ValueError, match="binary"):
        fit_probe(x, np.array([0, 1, 2, 0, 1, 2]))


def test_probe_l2_regularization_path_shrinks_weights():
    # fixed-step descent at lr=0.1 is stable only for l2 < 2/lr, so the
    # path is checked across the stable range
    x, y = separable_data()
    norms = [
        np.linalg.norm(fit_probe(x, y, l2=l2).weights)
        for l2 in (1e-3, 0.1, 1.0, 10.0)
    ]
    assert all(b < a for a, b in zip(norms, norms[1:]))
    assert norms[-1] < 0.1 * norms[0]
    # heavily regularized scores hug the 0.5 decision boundary
    heavy = fit_probe(x, y, l2=10.0)
    scores = 1.0 / (1.0 + np.exp(-(x @ heavy.weights + heavy.bias)))
    assert np.abs(scores - 0.5).max() < 0.2


def test_probe_objective_gradient_matches_finite_differences():
    rng = np.random.default_rng(8)
    x = rng.standard_normal((5, 3))
    y = np.array([1.0, 0.0, 1.0, 1.0, 0.0])
    w = rng.standard_normal(3) * 0.5
    b = 0.2
    l2 = 1e-2

    # analytic gradient of the fitting objective
    p = 1.0 / (1.0 + np.exp(-(x @ w + b)))
    gw = x.T @ (p - y) / len(y) + l2 * w
    gb = float((p - y).mean())

    h = 1e-6
    for j in range(3):
        wp, wm = w.copy(), w.copy()
        wp[j] += h
        wm[j] -= h
        fd = (probe_objective(wp, b, x, y, l2) - probe_objective(wm, b, x, y, l2)) / (2 * h)
        assert abs(fd - gw[j]) < 1e-6
    fd_b = (probe_objective(w, b + h, x, y, l2) - probe_objective(w, b - h, x, y, l2)) / (2 * h)
    assert abs(fd_b - gb) < 1e-6


def test_probe_fitting_decreases_objective():
    x, y = separable_data()
    model = fit_probe(x, y, iters=200)
    start = probe_objective(np.zeros(2), 0.0, x, y, model.l2_coefficient)
    end = probe_objective(model.weights, model.bias, x, y, model.l2_coefficient)
    assert end < start


def test_eval_probe_thresholds_at_half():
    from somatic_vae.metrics import ProbeModel

    # scores: sigmoid(x) >= 0.5 iff x >= 0
    model = ProbeModel(np.array([1.0]), 0.0, 0.0)
    x = np.array([[-1.0], [0.0], [2.0]])
    report = eval_probe(model, x, np.array([0, 1, 1]))
    assert report.recall == 1.0
    assert report.precision == 1.0
