import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from forgerybench.classifier import (
    GAMMA_INV_DIM,
    GridSearchConfig,
    KernelKind,
    KernelSpec,
    PRISTINE,
    TAMPERED,
    export_model_text,
    fit_scaler,
    kernel_eval,
    kernel_matrix,
    kfold_grid_search,
    load_model,
    predict,
    save_model,
    stratified_folds,
    train_svm,
)
from forgerybench.errors import (
    DimensionMismatch,
    NonConvergence,
    SingleClassTrainingSet,
    TooFewSamples,
    TooFewSamplesPerClass,
)

from . import oracles

RBF1 = KernelSpec(KernelKind.RBF, 1.0)
LINEAR = KernelSpec(KernelKind.POLY, 1.0, degree=1, coef0=0.0)
XOR_X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
XOR_Y = np.array([-1, -1, 1, 1])


def dual_feasible(model, atol=1e-6):
    alpha = np.abs(model.dual_coeffs)
    return bool(np.all(alpha >= 0) and np.all(alpha <= model.c + 1e-12)
                and abs(model.dual_coeffs.sum()) <= atol)


# -------------------------------------------------------------- scaler


def test_scaler_examples():
    s = fit_scaler(np.array([[0.0], [2.0]]))
    assert list(s.mean) == [1.0] and list(s.scale) == [1.0]
    s = fit_scaler(np.ones((4, 3)))
    assert np.all(s.scale == 1.0)
    s = fit_scaler(np.array([[1.0, 10], [3, 10], [5, 10]]))
    assert np.allclose(s.mean, [3, 10])
    assert s.scale[0] == pytest.approx(math.sqrt(8 / 3)) and s.scale[1] == 1.0


def test_scaler_errors():
    with pytest.raises(TooFewSamples):
        fit_scaler(np.zeros((1, 3)))
    with pytest.raises(DimensionMismatch):
        fit_scaler([np.zeros(2), np.zeros(3)])


# ------------------------------------------------------------- kernels


def test_kernel_examples():
    assert kernel_eval(RBF1, [1, 2, 3], [1, 2, 3]) == 1.0
    assert kernel_eval(LINEAR, [1, 2], [3, 4]) == 11.0
    k = KernelSpec(KernelKind.RBF, 0.5)
    assert kernel_eval(k, [0, 0], [2, 0]) == pytest.approx(0.135335, abs=1e-6)
    with pytest.raises(DimensionMismatch):
        kernel_eval(k, [0, 0], [1, 2, 3])


def test_kernel_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec(KernelKind.RBF, 0.0)
    with pytest.raises(ValueError):
        KernelSpec(KernelKind.POLY, 1.0, degree=0)


vectors = arrays(np.float64, 4, elements=st.floats(-5, 5, allow_nan=False))


@given(vectors, vectors, st.floats(1e-3, 3), st.integers(1, 4))
def test_kernel_symmetry_and_rbf_bounds(a, b, gamma, degree):
    for k in (KernelSpec(KernelKind.RBF, gamma), KernelSpec(KernelKind.POLY, gamma, degree)):
        assert kernel_eval(k, a, b) == kernel_eval(k, b, a)
    v = kernel_eval(KernelSpec(KernelKind.RBF, gamma), a, b)
    assert 0 <= v <= 1
    if np.array_equal(a, b):
        assert v == 1.0


def test_kernel_matrix_matches_oracle(rng):
    A, B = rng.normal(size=(5, 3)), rng.normal(size=(4, 3))
    for kind, k in (("RBF", KernelSpec(KernelKind.RBF, 0.3)),
                    ("POLY", KernelSpec(KernelKind.POLY, 0.3, 3, 1.0))):
        ref = oracles.oracle_kernel(kind, 0.3, 3, 1.0, A, B)
        assert np.allclose(kernel_matrix(k, A, B), ref, rtol=1e-12)


# ------------------------------------------------------------- training


def test_two_point_pair_and_tie():
    model = train_svm(np.array([[-1.0], [1.0]]), ["pristine", "tampered"], LINEAR, 1.0)
    assert predict(model, [-1.0])[0] == PRISTINE
    assert predict(model, [1.0])[0] == TAMPERED
    label, value = predict(model, [0.0])
    assert value == pytest.approx(0.0, abs=1e-12)
    # the exact midpoint resolves to pristine
    model.bias = 0.0
    assert predict(model, [0.0]) == (PRISTINE, 0.0)


def test_xor_matches_qp_oracle():
    model = train_svm(XOR_X, XOR_Y, RBF1, 10.0, tol=1e-6)
    assert np.array_equal(model.predict_labels(XOR_X), XOR_Y)
    ref = oracles.OracleSvm(XOR_X, XOR_Y, 10.0, "RBF", 1.0)
    grid = np.random.default_rng(4).uniform(-0.5, 1.5, (50, 2))
    mine = model.decision_function(grid)
    theirs = ref.decision(grid)
    assert np.max(np.abs(mine - theirs)) <= 1e-3
    assert np.array_equal(np.sign(mine), np.sign(theirs))
    assert dual_feasible(model)


@pytest.mark.parametrize("seed", range(5))
def test_random_separable_vs_oracle(seed):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(-2, 1, (10, 2)), rng.normal(2, 1, (10, 2))])
    y = np.repeat([-1, 1], 10)
    model = train_svm(X, y, KernelSpec(KernelKind.RBF, 0.5), 1.0, tol=1e-6)
    ref = oracles.OracleSvm(X, y, 1.0, "RBF", 0.5)
    assert np.max(np.abs(model.decision_function(X) - ref.decision(X))) <= 1e-3
    assert dual_feasible(model)


def test_training_deterministic(rng):
    X = rng.normal(size=(30, 4))
    y = np.where(X[:, 0] + 0.3 * rng.normal(size=30) > 0, 1, -1)
    k = KernelSpec(KernelKind.RBF, 0.25)
    a = train_svm(X, y, k, 10.0, seed=3)
    b = train_svm(X, y, k, 10.0, seed=3)
    assert np.array_equal(a.dual_coeffs, b.dual_coeffs) and a.bias == b.bias


def test_training_errors(rng):
    with pytest.raises(SingleClassTrainingSet):
        train_svm(rng.normal(size=(4, 2)), [1, 1, 1, 1], RBF1, 1.0)
    with pytest.raises(DimensionMismatch):
        train_svm(rng.normal(size=(4, 2)), [1, -1, 1], RBF1, 1.0)
    model = train_svm(XOR_X, XOR_Y, RBF1, 1.0)
    with pytest.raises(DimensionMismatch):
        predict(model, [1.0, 2.0, 3.0])


def test_non_convergence_reports_violation(rng):
    X = rng.normal(size=(40, 3))
    y = np.where(rng.random(40) > 0.5, 1, -1)
    with pytest.raises(NonConvergence) as info:
        train_svm(X, y, KernelSpec(KernelKind.RBF, 1.0), 1000.0, tol=1e-12, max_epochs=1)
    assert info.value.max_violation > 1e-12
    assert info.value.model is not None


@given(st.floats(0.01, 100))
def test_prediction_invariant_to_feature_rescaling(scale):
    rng = np.random.default_rng(7)
    X = rng.normal(size=(24, 3))
    y = np.where(X[:, 0] - X[:, 1] > 0, 1, -1)
    test = rng.normal(size=(10, 3))
    k = KernelSpec(KernelKind.RBF, 0.5)
    a = train_svm(X, y, k, 1.0, tol=1e-6).predict_labels(test)
    b = train_svm(X * scale, y, k, 1.0, tol=1e-6).predict_labels(test * scale)
    assert np.array_equal(a, b)


def test_model_file_round_trip(tmp_path, rng):
    X = rng.normal(size=(20, 5))
    y = np.where(X[:, 0] > 0, 1, -1)
    model = train_svm(X, y, KernelSpec(KernelKind.POLY, 0.1, 2), 10.0, seed=9, method="DUA")
    path = tmp_path / "m.model"
    save_model(model, path)
    back = load_model(path)
    assert back.kernel == model.kernel and back.c == model.c and back.seed == 9
    assert back.method == "DUA"
    assert np.array_equal(back.decision_function(X), model.decision_function(X))
    text = export_model_text(model)
    assert "POLY" in text and "DUA" in text


# ---------------------------------------------------------- grid search


def blobs(n=20, seed=0):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(-3, 0.5, (n, 2)), rng.normal(3, 0.5, (n, 2))])
    return X, np.repeat([-1, 1], n)


def test_stratified_folds_partition():
    y = np.repeat([-1, 1], [13, 17])
    folds = stratified_folds(y, 5, seed=1)
    everything = np.sort(np.concatenate(folds))
    assert np.array_equal(everything, np.arange(30))
    for f in folds:
        assert 2 <= np.sum(y[f] < 0) <= 3 and 3 <= np.sum(y[f] > 0) <= 4


def test_single_cell_grid():
    X, y = blobs()
    cfg = GridSearchConfig(c_grid=(5.0,), gamma_grid=(0.2,), folds=4)
    res = kfold_grid_search(X, y, KernelKind.RBF, cfg)
    assert res.c == 5.0 and res.kernel.gamma == 0.2
    assert len(res.cv_table) == 1


def test_duplicate_grid_values_tie():
    X, y = blobs()
    cfg = GridSearchConfig(c_grid=(1.0, 1.0), gamma_grid=(0.5,), folds=4)
    res = kfold_grid_search(X, y, KernelKind.RBF, cfg)
    a, b = res.cv_table
    assert (a.mean, a.std) == (b.mean, b.std)
    assert res.c == 1.0


def test_separable_tie_prefers_small_c():
    X, y = blobs()
    cfg = GridSearchConfig(c_grid=(1000.0, 0.01), gamma_grid=(1.0,), degree_grid=(1,),
                           coef0=0.0, folds=5)
    res = kfold_grid_search(X, y, KernelKind.POLY, cfg)
    assert all(cell.mean == 1.0 for cell in res.cv_table)
    assert res.c == 0.01


def test_inverse_dimension_gamma():
    X, y = blobs()
    cfg = GridSearchConfig(c_grid=(1.0,), gamma_grid=(GAMMA_INV_DIM,), folds=3)
    assert kfold_grid_search(X, y, KernelKind.RBF, cfg).kernel.gamma == 0.5


def test_too_few_per_class():
    X, y = blobs(n=3)
    with pytest.raises(TooFewSamplesPerClass):
        kfold_grid_search(X, y, KernelKind.RBF, GridSearchConfig(folds=4))


def test_grid_config_validation():
    with pytest.raises(ValueError):
        GridSearchConfig(folds=1)
    with pytest.raises(ValueError):
        GridSearchConfig(c_grid=())


def test_grid_search_deterministic():
    X, y = blobs(seed=5)
    X = X + np.random.default_rng(1).normal(0, 2, X.shape)
    cfg = GridSearchConfig(c_grid=(0.1, 10.0), gamma_grid=(0.1, 1.0), folds=4, seed=11)
    a = kfold_grid_search(X, y, KernelKind.RBF, cfg)
    b = kfold_grid_search(X, y, KernelKind.RBF, cfg)
    assert a.cv_table == b.cv_table and a.kernel == b.kernel and a.c == b.c


def test_non_converged_cell_is_disqualified():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(40, 3))
    y = np.where(rng.random(40) > 0.5, 1, -1)
    cfg = GridSearchConfig(c_grid=(1e-4, 1000.0), gamma_grid=(1.0,), folds=4, max_epochs=1)
    res = kfold_grid_search(X, y, KernelKind.RBF, cfg)
    by_c = {cell.c: cell for cell in res.cv_table}
    assert by_c[1e-4].converged and not by_c[1000.0].converged
    assert res.c == 1e-4 and not res.all_disqualified
    cfg = GridSearchConfig(c_grid=(1000.0,), gamma_grid=(1.0,), folds=4, max_epochs=1)
    assert kfold_grid_search(X, y, KernelKind.RBF, cfg).all_disqualified
