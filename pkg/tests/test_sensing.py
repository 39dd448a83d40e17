"""Sensing operator and planted model tests, with naive oracles."""

import numpy as np
import pytest

from matsense import (PlantedInstance, SensingOperator, gen_operator,
                      gen_planted, numerical_rank, operator_norm,
                      plant_instance)


def test_operator_matrices_exactly_symmetric():
    op = gen_operator(30, 240, seed=7)
    assert op.mats.shape == (240, 30, 30)
    for A in op.mats:
        assert np.array_equal(A, A.T)


def test_operator_regeneration_bit_identical():
    a = gen_operator(12, 40, seed=123)
    b = gen_operator(12, 40, seed=123)
    assert np.array_equal(a.mats, b.mats)
    c = gen_operator(12, 40, seed=124)
    assert not np.array_equal(a.mats, c.mats)


def test_operator_param_validation():
    with pytest.raises(ValueError):
        gen_operator(0, 5, seed=1)
    with pytest.raises(ValueError):
        gen_operator(5, 0, seed=1)


def test_diagonal_entries_unit_variance():
    # Monte-Carlo: collect >= 1e4 diagonal entries of A_1 across seeds
    d = 30
    vals = []
    for seed in range(340):
        vals.extend(np.diag(gen_operator(d, 1, seed=seed).mats[0]))
    vals = np.array(vals)
    assert vals.size >= 10000
    assert 0.9 <= vals.var() <= 1.1


def test_apply_zero_and_identity():
    op = gen_operator(10, 25, seed=3)
    assert np.array_equal(op.apply(np.zeros((10, 10))), np.zeros(25))
    traces = np.array([np.trace(A) for A in op.mats])
    np.testing.assert_allclose(op.apply(np.eye(10)), traces, rtol=1e-12)


def test_apply_matches_naive_double_loop():
    op = gen_operator(7, 12, seed=11)
    rng = np.random.default_rng(0)
    X = rng.standard_normal((7, 7))
    got = op.apply(X)
    for i in range(12):
        naive = 0.0
        for j in range(7):
            for k in range(7):
                naive += op.mats[i, j, k] * X[j, k]
        assert abs(got[i] - naive) <= 1e-10 * (1.0 + abs(naive))


def test_apply_symmetric_part_only():
    op = gen_operator(9, 15, seed=5)
    rng = np.random.default_rng(1)
    X = rng.standard_normal((9, 9))
    sym = 0.5 * (X + X.T)
    np.testing.assert_allclose(op.apply(X), op.apply(sym), rtol=1e-12, atol=1e-12)


def test_adjoint_basis_vectors_and_zero():
    op = gen_operator(8, 10, seed=9)
    e1 = np.zeros(10)
    e1[0] = 1.0
    assert np.array_equal(op.adjoint(e1), op.mats[0])
    assert np.array_equal(op.adjoint(np.zeros(10)), np.zeros((8, 8)))


def test_adjoint_identity_hundred_pairs():
    op = gen_operator(8, 20, seed=21)
    rng = np.random.default_rng(2)
    for _ in range(100):
        X = rng.standard_normal((8, 8))
        y = rng.standard_normal(20)
        lhs = float(op.apply(X) @ y)
        rhs = float(np.sum(X * op.adjoint(y)))
        assert abs(lhs - rhs) <= 1e-10 * (1.0 + abs(lhs))


def test_shape_errors():
    op = gen_operator(6, 8, seed=2)
    with pytest.raises(ValueError):
        op.apply(np.zeros((5, 5)))
    with pytest.raises(ValueError):
        op.adjoint(np.zeros(9))


def test_operator_norm_identity_matrix_case():
    d = 5
    mats = np.eye(d)[None, :, :].copy()
    op = SensingOperator(d=d, m=1, mats=mats, seed=0)
    est = operator_norm(op, iters=50)
    assert abs(est - np.sqrt(d)) <= 1e-10


def test_operator_norm_monotone_in_iters():
    op = gen_operator(6, 10, seed=17)
    prev = 0.0
    for iters in range(1, 12):
        cur = operator_norm(op, iters=iters)
        assert cur >= prev - 1e-12
        prev = cur


def test_operator_norm_matches_dense_svd():
    op = gen_operator(4, 6, seed=31)
    J = op.mats.reshape(6, 16)
    exact = np.linalg.svd(J, compute_uv=False)[0]
    est = operator_norm(op, iters=500)
    assert abs(est - exact) <= 1e-6 * exact


def test_planted_model_contract():
    X = gen_planted(30, 2, seed=7)
    assert abs(np.trace(X) - 1.0) <= 1e-12
    assert numerical_rank(X) == 2
    lam = np.linalg.eigvalsh(X)
    assert lam[0] >= -1e-12 * lam[-1]
    assert np.array_equal(X, gen_planted(30, 2, seed=7))
    with pytest.raises(ValueError):
        gen_planted(5, 6, seed=1)
    with pytest.raises(ValueError):
        gen_planted(5, 0, seed=1)


def test_plant_instance_b_matches_operator():
    op = gen_operator(10, 30, seed=4)
    inst = plant_instance(op, 3, seed=4)
    assert isinstance(inst, PlantedInstance)
    assert np.array_equal(inst.b, op.apply(inst.x_star))
    lam = np.linalg.eigvalsh(inst.x_star)
    assert lam[-1] < inst.xi ** 2
