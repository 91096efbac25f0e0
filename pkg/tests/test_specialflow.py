import math
import random

import numpy as np
import pytest

from arnoldflow.contfrac import from_quadratic
from arnoldflow.errors import HypothesisFailed
from arnoldflow.roof import ConstantRoof, RoofSpec
from arnoldflow.specialflow import (FlowPoint, evolve, flow_samples,
                                    hit_count, hit_count_detailed,
                                    verify_hit_linearity, verify_rescaling)

GOLDEN = from_quadratic(-1, 1, 5, 2, 40)
CANON = RoofSpec(0.6, 0.3, 0.1)
ONE = ConstantRoof(1.0)


def test_hit_count_constant_roof():
    assert hit_count(ONE, GOLDEN, 0.3, 0.0, 7.3) == 7


def test_hit_count_zero_time():
    assert hit_count(CANON, GOLDEN, 0.33, 0.2, 0.0) == 0


def test_hit_count_negative_time():
    n = hit_count(ONE, GOLDEN, 0.3, 0.5, -2.2)
    # f^(n) <= 0.5 - 2.2 < f^(n+1): n = -2
    assert n == -2


def test_hit_count_estimate_matches_incremental():
    rng = random.Random(0)
    for _ in range(60):
        x = rng.random()
        s = rng.random() * float(CANON.eval(x)) * 0.9
        t = rng.uniform(-300.0, 10 ** 3)
        fast = hit_count_detailed(CANON, GOLDEN, x, s, t, estimate=True)
        slow = hit_count_detailed(CANON, GOLDEN, x, s, t, estimate=False)
        assert fast[0] == slow[0]


def test_hit_count_boundary_tie_flag():
    x = 0.3
    s0 = float(CANON.eval(x)) + float(CANON.eval((x + GOLDEN.alpha_float) % 1))
    n, amb = hit_count_detailed(CANON, GOLDEN, x, 0.0, s0)
    assert amb and n == 1  # smaller side of the tie


def test_evolve_constant_roof():
    p = evolve(ONE, GOLDEN, FlowPoint(0.3, 0.0), 2.5)
    assert p.z == pytest.approx((0.3 + 2 * GOLDEN.alpha_float) % 1.0)
    assert p.r == pytest.approx(0.5)


def test_evolve_identity():
    p = FlowPoint(0.42, 0.11)
    q = evolve(CANON, GOLDEN, p, 0.0)
    assert q.z == pytest.approx(p.z) and q.r == pytest.approx(p.r)


def test_flow_property():
    rng = random.Random(1)
    for _ in range(40):
        z = rng.random()
        p = FlowPoint(z, rng.random() * float(CANON.eval(z)) * 0.9)
        t1, t2 = rng.uniform(-10 ** 3, 10 ** 3), rng.uniform(-10 ** 3, 10 ** 3)
        a = evolve(CANON, GOLDEN, evolve(CANON, GOLDEN, p, t1), t2)
        b = evolve(CANON, GOLDEN, p, t1 + t2)
        assert abs(a.z - b.z) + abs(a.r - b.r) < 1e-8


def test_flowpoint_invariant_preserved():
    rng = random.Random(2)
    for _ in range(40):
        z = rng.random()
        p = FlowPoint(z, rng.random() * float(CANON.eval(z)) * 0.95)
        q = evolve(CANON, GOLDEN, p, rng.uniform(-100, 100))
        assert 0.0 <= q.r < float(CANON.eval(q.z))


def test_rescaling_identity_scale():
    rep = verify_rescaling(CANON, GOLDEN, 1.0, FlowPoint(0.4, 0.2), 12.3)
    assert rep.measured == 0.0


def test_rescaling_hand_case():
    # constant roof 1, scale 2: flow under roof 2 at t=3 lands at (x+a, 1)
    rep = verify_rescaling(ONE, GOLDEN, 2.0, FlowPoint(0.4, 0.0), 3.0)
    assert rep.passed
    assert rep.details["left"][1] == pytest.approx(1.0)


def test_rescaling_random_instances():
    rng = random.Random(3)
    for _ in range(40):
        z = rng.random()
        p = FlowPoint(z, rng.random() * float(CANON.eval(z)) * 0.9)
        rep = verify_rescaling(CANON, GOLDEN,
                               rng.choice([0.5, math.pi / 3, 2.0]), p,
                               rng.uniform(-200, 200))
        assert rep.measured < 1e-8


def test_hit_linearity_constant_roof():
    rep = verify_hit_linearity(ONE, GOLDEN, FlowPoint(0.3, 0.5), 99.5, 2.0)
    assert rep.measured < 1.0


def test_hit_linearity_threshold_guard():
    with pytest.raises(HypothesisFailed):
        verify_hit_linearity(CANON, GOLDEN, FlowPoint(0.3, 0.1), 2.0, 1.0)


def test_hit_linearity_calibrated_on_grid():
    rng = random.Random(4)
    ratios = []
    for t in np.geomspace(10, 10 ** 3, 8):
        p = FlowPoint(rng.random(), 0.05)
        rep = verify_hit_linearity(CANON, GOLDEN, p, float(t))
        ratios.append(rep.details["ratio"])
    c = 2.0 * max(ratios)
    for t in np.geomspace(10 ** 3, 10 ** 5, 6):
        p = FlowPoint(rng.random(), 0.05)
        rep = verify_hit_linearity(CANON, GOLDEN, p, float(t), c)
        assert rep.passed
    # backward direction through the cocycle convention
    rep = verify_hit_linearity(CANON, GOLDEN, FlowPoint(0.37, 0.02), -10 ** 4,
                               max(c, 2.0))
    assert rep.passed


def test_flow_samples_match_evolve():
    p = FlowPoint(0.37, 0.1)
    z, r, ns = flow_samples(CANON, GOLDEN, p, 0.7, 50)
    cur = p
    for k in range(12):
        cur = evolve(CANON, GOLDEN, cur, 0.7)
        assert cur.z == pytest.approx(z[k], abs=1e-9)
        assert cur.r == pytest.approx(r[k], abs=1e-9)
