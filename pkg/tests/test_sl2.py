import math
import random

import numpy as np
import pytest

from arnoldflow.errors import DecompositionFailed
from arnoldflow.sl2 import (Mat2, U_GEN, V_GEN, X_GEN, chi_eval,
                            drift_quadratic_check, g_mat, h_mat, local_coords,
                            product_identity_residual, renorm_residual, v_mat)


def test_generator_matrices():
    assert h_mat(0.0).as_array().tolist() == [[1, 0], [0, 1]]
    g = g_mat(math.log(2))
    assert g.a == pytest.approx(2.0) and g.d == pytest.approx(0.5)
    assert g.det() == pytest.approx(1.0)
    assert U_GEN.as_array().tolist() == [[0, 1], [0, 0]]
    assert V_GEN.as_array().tolist() == [[0, 0], [1, 0]]
    assert X_GEN.as_array().tolist() == [[1, 0], [0, -1]]


def test_renorm_exact_cases():
    assert renorm_residual(1.0, 0.0) == 0.0
    assert renorm_residual(1.0, math.log(2)) < 1e-15
    prod = h_mat(1.0) @ g_mat(math.log(2))
    assert np.allclose(prod.as_array(), [[2.0, 0.5], [0.0, 0.5]])


def test_renorm_contract_random():
    rng = random.Random(0)
    for _ in range(300):
        t = rng.uniform(-10 ** 6, 10 ** 6)
        s = rng.uniform(-20, 20)
        assert renorm_residual(t, s) < 1e-10 * (1 + abs(t) * math.exp(abs(s)))


def test_det_preserved_under_products():
    rng = random.Random(1)
    m = h_mat(0.0)
    for _ in range(1000):
        kind = rng.randrange(3)
        f = (h_mat, g_mat, v_mat)[kind]
        m = m @ f(rng.uniform(-0.01, 0.01))
    assert abs(m.det() - 1.0) < 1e-12


def test_local_coords_identity():
    X = h_mat(0.3) @ g_mat(0.2)
    vb, s, r, resid = local_coords(X, X)
    assert (vb, s, r) == (0.0, 0.0, 0.0)
    assert chi_eval(s, r, 5.0) == 5.0
    assert resid == 0.0


def test_local_coords_opposite_horocycle():
    # X = v_(1/k) Y: decomposition gives v_bar = 0, s = 0, r = 1/k
    Y = Mat2(1.2, 0.3, 0.4, (1 + 0.3 * 0.4) / 1.2)
    for k in (10.0, 100.0, 1000.0):
        X = v_mat(1.0 / k) @ Y
        vb, s, r, resid = local_coords(X, Y)
        assert vb == pytest.approx(0.0, abs=1e-12)
        assert s == pytest.approx(0.0, abs=1e-12)
        assert r == pytest.approx(1.0 / k, rel=1e-10)
        assert resid < 1e-10


def test_local_coords_failure_mode():
    X = Mat2(0.0, 1.0, -1.0, 0.0)  # rotation by pi/2: lower-right 0 vs Id
    with pytest.raises(DecompositionFailed):
        local_coords(X, h_mat(0.0))


def test_decomposition_roundtrip_random():
    rng = random.Random(2)
    for _ in range(300):
        Y = Mat2(rng.uniform(0.5, 2), rng.uniform(-1, 1), rng.uniform(-1, 1),
                 0.0)
        Y = Mat2(Y.a, Y.b, Y.c, (1 + Y.b * Y.c) / Y.a)
        ss = rng.uniform(-0.05, 0.05)
        X = (h_mat(rng.uniform(-0.05, 0.05))
             @ Mat2(math.exp(ss), 0.0, rng.uniform(-0.05, 0.05),
                    math.exp(-ss))) @ Y
        vb, s, r, resid = local_coords(X, Y)
        assert resid < 1e-10


def test_product_identity_random():
    rng = random.Random(3)
    worst = 0.0
    for _ in range(200):
        Y = Mat2(rng.uniform(0.5, 2), rng.uniform(-1, 1), rng.uniform(-1, 1),
                 0.0)
        Y = Mat2(Y.a, Y.b, Y.c, (1 + Y.b * Y.c) / Y.a)
        ss = rng.uniform(-0.02, 0.02)
        X = (h_mat(rng.uniform(-0.02, 0.02))
             @ Mat2(math.exp(ss), 0.0, rng.uniform(-0.02, 0.02),
                    math.exp(-ss))) @ Y
        vb, s, r, _ = local_coords(X, Y)
        if r == 0.0:
            continue
        T = rng.uniform(-1.0, 1.0) / math.sqrt(abs(r))
        worst = max(worst, product_identity_residual(X, Y, T))
    assert worst < 1e-9


def test_chi_closed_form():
    assert chi_eval(0.0, 0.0, 7.0) == 7.0
    d = drift_quadratic_check(0.0, 1e-4, np.arange(1.0, 301.0))
    assert d["first_unit_shift_T"] == pytest.approx(100.0, abs=1.0)
    assert d["closed_form_first_T"] == pytest.approx(100.0)
    assert d["quadratic_coeff_error"] < 1e-10


def test_chi_scaling_law():
    # doubling r divides the unit-shift time by sqrt(2)
    a = drift_quadratic_check(0.0, 1e-4, np.arange(1.0, 400.0))
    b = drift_quadratic_check(0.0, 2e-4, np.arange(1.0, 400.0))
    assert b["closed_form_first_T"] == pytest.approx(
        a["closed_form_first_T"] / math.sqrt(2.0))


def test_chi_zero_r():
    d = drift_quadratic_check(0.5, 0.0, np.arange(1.0, 100.0))
    assert d["quadratic_coeff_error"] < 1e-12
