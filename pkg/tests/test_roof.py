import math

import numpy as np
import pytest
from scipy.integrate import quad

from arnoldflow.contfrac import from_quotients
from arnoldflow.errors import NonPositiveRoof, SingularPoint
from arnoldflow.roof import ConstantRoof, CosProbe, RoofSpec, shear_coefficient

GOLDEN = from_quotients([1] * 30)
CANON = RoofSpec(0.6, 0.3, 0.1)


def test_eval_at_half():
    assert CANON.eval(0.5) == pytest.approx(0.9 * math.log(2) + 0.1)


def test_first_derivative_at_half():
    assert CANON.eval(0.5, 1) == pytest.approx(-1.2 + 0.6)


def test_singularity_raises():
    with pytest.raises(SingularPoint):
        CANON.eval(0.0)


def test_asymptotic_r1():
    # f(x)/(-log x) -> A_minus within 1% by x = 1e-8
    x = 1e-8
    assert CANON.eval(x) / (-math.log(x)) == pytest.approx(0.6, rel=0.01)


def test_asymptotics_rj():
    # f^(j)(x) * (-1)^j x^j / (j-1)! -> A_minus
    for j in (1, 2, 3, 4):
        x = 1e-10
        val = CANON.eval(x, j) * (-1) ** j * x ** j / math.factorial(j - 1)
        assert val == pytest.approx(0.6, rel=1e-6)


def test_derivative_finite_differences():
    rng = np.random.default_rng(0)
    roof = RoofSpec(0.7, 0.2, 0.05, (0.02, -0.01), (0.015,))
    xs = rng.uniform(0.01, 0.99, 100)
    h = 1e-6
    for order in (1, 2, 3, 4):
        num = (roof.eval(xs + h, order - 1) - roof.eval(xs - h, order - 1)) \
            / (2 * h)
        exact = roof.eval(xs, order)
        scale = np.maximum(np.abs(exact), 1.0)
        assert np.max(np.abs(num - exact) / scale) < 1e-5


def test_integral_closed_form():
    assert CANON.integral() == pytest.approx(1.0)
    r2 = RoofSpec(1.0, 2.0, 0.0)
    assert r2.integral() == pytest.approx(3.0)
    assert r2.normalize().A_minus == pytest.approx(1 / 3)


def test_integral_against_quadrature():
    roof = RoofSpec(0.45, 0.9, 0.2, (0.05,), (-0.03, 0.01))
    val, err = quad(lambda t: float(roof.eval(t)), 0, 1, points=[0, 1],
                    limit=200)
    assert roof.integral() == pytest.approx(val, abs=1e-10)


def test_partial_integral_against_quadrature():
    roof = RoofSpec(0.45, 0.9, 0.2, (0.05,), (-0.03, 0.01))
    for a, b in ((0.0, 0.3), (0.2, 0.9), (1e-6, 1.0)):
        val, _ = quad(lambda t: float(roof.eval(t)), a, b, limit=200)
        assert roof.integral_on(a, b) == pytest.approx(val, abs=1e-9)


def test_normalize_rejects_nothing_positive():
    with pytest.raises(NonPositiveRoof):
        RoofSpec(0.6, 0.3, -5.0)  # grossly negative offset kills positivity


def test_truncation_window():
    tr = CANON.truncate(5, GOLDEN)  # q_5 = 8, window 1/32
    assert tr.eval(1.0 / 64) == 0.0
    assert tr.eval(1.0 - 1.0 / 64) == 0.0
    assert tr.eval(0.5) == pytest.approx(CANON.eval(0.5))
    assert tr.eval(0.5, 1) == pytest.approx(CANON.eval(0.5, 1))


def test_truncation_integral_tail():
    n = 8
    tr = CANON.truncate(n, GOLDEN)
    w = 1.0 / (4 * GOLDEN.q[n])
    tail = CANON.integral_to(w) + CANON.integral_on(1 - w, 1.0)
    assert CANON.integral() - tr.integral() == pytest.approx(tail, rel=1e-12)
    # tail is O(log q_n / q_n)
    assert tail <= 3.0 * math.log(GOLDEN.q[n]) / GOLDEN.q[n]


def test_variation_pure_log_unimodal():
    roof = RoofSpec(1.0, 2.0, 0.0)
    n = next(i for i in range(GOLDEN.depth) if GOLDEN.q[i] == 13)
    tr = roof.truncate(n, GOLDEN)
    eps = 1.0 / (4 * 13)
    x_min = 1.0 / 3.0  # f' = 0 at A_minus (1 - x) = A_plus x
    expected = roof.eval(eps) + (roof.eval(eps) - roof.eval(x_min)) \
        + (roof.eval(1 - eps) - roof.eval(x_min)) + roof.eval(1 - eps)
    assert tr.variation(0) == pytest.approx(expected, rel=1e-9)
    assert tr.variation(0) <= 3 * (roof.A_minus + roof.A_plus) \
        * math.log(GOLDEN.q[n]) + 20


def test_variation_cos_probe():
    assert CosProbe(1).variation() == 4.0
    assert CosProbe(3, 0.5).variation() == 6.0


def test_constant_roof():
    c = ConstantRoof(2.5)
    assert c.eval(0.3) == 2.5
    assert c.variation() == 0.0
    assert c.integral() == 2.5


def test_shear_coefficient_sign():
    # Birkhoff sums of f' grow with coefficient A_plus - A_minus: the
    # integral of f' over [eps, 1-eps] is f(1-eps) - f(eps)
    roof = CANON
    eps = 1e-6
    diff = roof.eval(1 - eps) - roof.eval(eps)
    assert diff / math.log(1 / eps) == pytest.approx(
        shear_coefficient(roof), rel=1e-3)
    assert shear_coefficient(roof) == pytest.approx(-0.3)


def test_serialization_roundtrip():
    roof = RoofSpec(0.45, 0.9, 0.2, (0.05,), (-0.03, 0.01))
    again = RoofSpec.from_dict(roof.to_dict())
    assert again == roof
