import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arnoldflow.contfrac import (cf_expand, check_diophantine,
                                 construct_alpha_in_D, dist_qn_alpha,
                                 from_decimal, from_quadratic, from_quotients,
                                 ostrowski_decode, ostrowski_encode,
                                 OstrowskiDigits)
from arnoldflow.errors import (DepthExceeded, InsufficientPrecision,
                               InvalidDigits, NotRepresentable, RationalInput)

GOLDEN = from_quotients([1] * 30)
SQRT2M1 = from_quadratic(-1, 1, 2, 1, 24)


def test_golden_denominators():
    assert GOLDEN.q[:7] == (1, 1, 2, 3, 5, 8, 13)


def test_sqrt2_denominators():
    # quotients all 2; recurrence by hand: 1, 2, 5, 12, 29
    assert SQRT2M1.quotients[:5] == (2, 2, 2, 2, 2)
    assert SQRT2M1.q[:5] == (1, 2, 5, 12, 29)


def test_explicit_quotients():
    cf = cf_expand([2, 3, 1], 3)
    assert cf.quotients == (2, 3, 1)
    assert cf.q == (1, 2, 7, 9)


def test_recurrence_and_coprimality_exact():
    cf = construct_alpha_in_D(3, 40)
    for n in range(1, cf.depth):
        assert cf.p[n + 1] == cf.quotients[n] * cf.p[n] + cf.p[n - 1]
        assert cf.q[n + 1] == cf.quotients[n] * cf.q[n] + cf.q[n - 1]
        assert math.gcd(cf.p[n], cf.q[n]) == 1


def test_dist_bounds_sqrt2():
    db = dist_qn_alpha(SQRT2M1, 1)
    # ||2 alpha|| = 1 - (2 sqrt 2 - 2) = 3 - 2 sqrt 2 = 0.17157...
    assert db.value == pytest.approx(3 - 2 * math.sqrt(2), abs=1e-12)
    assert db.certified
    assert float(db.lower_bound) == pytest.approx(0.1)
    assert float(db.upper_bound) == pytest.approx(0.2)


def test_dist_bounds_golden_n2():
    db = dist_qn_alpha(GOLDEN, 2)
    assert 1 / 6 < db.value < 1 / 3
    assert db.certified


def test_dist_bounds_all_indices_certified():
    for cf in (GOLDEN, SQRT2M1, construct_alpha_in_D(3, 32)):
        top = cf.depth - 1 if cf.surd is not None else cf.depth - 2
        for n in range(1, top + 1):
            assert dist_qn_alpha(cf, n).certified


def test_dist_depth_exceeded():
    with pytest.raises(DepthExceeded):
        dist_qn_alpha(GOLDEN, GOLDEN.depth)


def test_ostrowski_golden_ten():
    d = ostrowski_encode(10, GOLDEN)
    # 10 = 8 + 2 = q_5 + q_2
    assert d.level_digit(5) == 1 and d.level_digit(2) == 1
    assert sum(d.digits) == 2
    assert ostrowski_decode(d) == 10


def test_ostrowski_single_denominator():
    for m in range(2, 9):
        d = ostrowski_encode(GOLDEN.q[m], GOLDEN)
        assert d.level_digit(m) == 1 and sum(d.digits) == 1


def test_ostrowski_invalid_digits():
    with pytest.raises(InvalidDigits):
        OstrowskiDigits((), GOLDEN)
    with pytest.raises(InvalidDigits):
        OstrowskiDigits((0, 1, 1), GOLDEN)  # adjacent maximal digits
    with pytest.raises(InvalidDigits):
        OstrowskiDigits((1,), GOLDEN)  # d_0 <= a_1 - 1 = 0


def test_ostrowski_not_representable():
    with pytest.raises(NotRepresentable):
        ostrowski_encode(GOLDEN.q[GOLDEN.depth], GOLDEN)
    with pytest.raises(NotRepresentable):
        ostrowski_encode(0, GOLDEN)


@given(st.integers(min_value=1, max_value=10 ** 5))
@settings(max_examples=300, deadline=None)
def test_ostrowski_roundtrip_property(n):
    assert ostrowski_decode(ostrowski_encode(n, GOLDEN)) == n
    if n < SQRT2M1.q[SQRT2M1.depth]:
        assert ostrowski_decode(ostrowski_encode(n, SQRT2M1)) == n


def test_decimal_expansion_certified():
    # 80 digits of pi - 3; plenty for depth 20
    s = ("0.1415926535897932384626433832795028841971693993751058209749445923"
         "0781640628620899")
    cf = from_decimal(s, 20)
    assert cf.quotients[:5] == (7, 15, 1, 292, 1)


def test_decimal_insufficient_precision():
    with pytest.raises(InsufficientPrecision):
        from_decimal("0.142", 5)


def test_decimal_rational_input():
    with pytest.raises(RationalInput):
        from_decimal("0.5", 5, exact=True)


def test_quadratic_rational_rejected():
    with pytest.raises(RationalInput):
        from_quadratic(1, 0, 5, 2, 10)


def test_diophantine_golden():
    d = check_diophantine(GOLDEN)
    # ratio tends to the golden mean; only small scales can be witnesses
    assert all(GOLDEN.q[n] <= 8 for n in d.d2_witnesses)
    assert all(GOLDEN.q[n] <= 3 for n in d.d3_violations)
    assert d.d_alpha >= 1.0


def test_diophantine_k_alpha_definition():
    d = check_diophantine(GOLDEN)
    for n in range(1, GOLDEN.depth):
        if GOLDEN.q[n] < 2:
            continue
        in_k = GOLDEN.q[n + 1] <= GOLDEN.q[n] * math.log(GOLDEN.q[n]) ** 0.875
        assert (n in d.k_alpha) == in_k


def test_construct_alpha_witnesses():
    cf = construct_alpha_in_D(3, 30)
    d = check_diophantine(cf)
    designed = [n for n in d.d2_witnesses if n >= 5]
    assert len(designed) >= 9
    assert not [n for n in d.d3_violations if n >= 5]
    # q grows at least Fibonacci-fast
    for n in range(1, cf.depth):
        assert cf.q[n + 1] >= cf.q[n] + cf.q[n - 1]


def test_construct_alpha_degenerate_gap():
    cf = construct_alpha_in_D(31, 30)
    assert all(a == 1 for a in cf.quotients)  # no designed witnesses fit
    d = check_diophantine(cf)
    # only the small-scale noise witnesses of an all-ones sequence remain
    assert all(cf.q[n] <= 8 for n in d.d2_witnesses)


def test_d1_partial_sums_monotone():
    d = check_diophantine(construct_alpha_in_D(3, 40))
    assert all(b >= a for a, b in zip(d.d1_partial_sums,
                                      d.d1_partial_sums[1:]))
    assert d.d1_increments_decreasing
