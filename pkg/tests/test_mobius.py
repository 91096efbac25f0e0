import math
import random

import numpy as np
import pytest

from arnoldflow.contfrac import construct_alpha_in_D, from_quadratic
from arnoldflow.errors import SequenceTooShort
from arnoldflow.mobius import (BandObservable, MobiusTable, kbsz_sum, mertens,
                               mobius_sieve, mu_trial, orthogonality_sum,
                               usic_statistic)
from arnoldflow.roof import RoofSpec
from arnoldflow.specialflow import FlowPoint, flow_samples

TABLE = mobius_sieve(10 ** 5)
CANON = RoofSpec(0.6, 0.3, 0.1)
GOLDEN = from_quadratic(-1, 1, 5, 2, 40)


def test_mu_first_values():
    assert TABLE.values[1:9].tolist() == [1, -1, -1, 0, -1, 1, -1, 0]


def test_mu_thirty():
    assert TABLE.mu(30) == -1


def test_sieve_matches_trial_division():
    rng = random.Random(0)
    for n in rng.sample(range(1, TABLE.N + 1), 800):
        assert TABLE.mu(n) == mu_trial(n)


def test_multiplicativity_on_coprime_pairs():
    rng = random.Random(1)
    done = 0
    while done < 300:
        m = rng.randint(2, 300)
        n = rng.randint(2, 300)
        if math.gcd(m, n) != 1:
            continue
        assert TABLE.mu(m * n) == TABLE.mu(m) * TABLE.mu(n)
        done += 1


def test_mertens_small_values():
    # M(1..10) = 1, 0, -1, -1, -2, -1, -2, -2, -2, -1
    assert [mertens(n, TABLE) for n in range(1, 11)] == \
        [1, 0, -1, -1, -2, -1, -2, -2, -2, -1]


def test_mertens_known_checkpoints():
    assert mertens(10 ** 4, TABLE) == -23
    assert mertens(10 ** 5, TABLE) == -48


def test_kbsz_constant_sequence():
    seq = np.ones(10 ** 4)
    assert kbsz_sum(seq, 2, 3, 3000) == pytest.approx(1.0)


def test_kbsz_alternating_sequence():
    n_max = 2000
    seq = np.array([0.0] + [(-1.0) ** n for n in range(1, 3 * n_max + 1)])
    val = kbsz_sum(seq, 2, 3, n_max)
    # a_(2n) conj(a_(3n)) = (-1)^n: partial sums bounded by 1
    assert abs(val) <= 1.0 / n_max + 1e-12


def test_kbsz_requires_long_sequence():
    with pytest.raises(SequenceTooShort):
        kbsz_sum(np.ones(10), 2, 3, 100)


def test_band_observable_zero_mean():
    obs = BandObservable(CANON, 0.2, 0.6, 0.0, 0.5)
    z, r, _ = flow_samples(CANON, GOLDEN, FlowPoint(0.123, 0.05), 0.9,
                           200000)
    vals = obs.sample(z, r)
    assert abs(float(np.mean(vals))) < 5e-3


def test_orthogonality_constant_observable_reduces_to_mertens():
    class One:
        def sample(self, z, r):
            return np.ones_like(z)

    val = orthogonality_sum(One(), CANON, GOLDEN, FlowPoint(0.3, 0.1), 1.0,
                            TABLE, 10 ** 4)
    assert val == pytest.approx(mertens(10 ** 4, TABLE) / 10 ** 4)


def test_birkhoff_average_of_zero_mean_observable_decays():
    obs = BandObservable(CANON, 0.15, 0.55, 0.1, 0.6)
    z, r, _ = flow_samples(CANON, GOLDEN, FlowPoint(0.123, 0.05), 1.0,
                           10 ** 5)
    vals = obs.sample(z, r)
    cums = np.cumsum(vals)
    a1 = abs(cums[10 ** 3 - 1]) / 10 ** 3
    a2 = abs(cums[10 ** 5 - 1]) / 10 ** 5
    assert a2 < a1


def test_usic_zero_observable():
    assert usic_statistic(np.zeros(3000), TABLE, 10 ** 3, 31) == 0.0


def test_usic_constant_trend():
    u_small = usic_statistic(np.ones(2 * 10 ** 3 + 31), TABLE, 10 ** 3, 31)
    u_big = usic_statistic(np.ones(2 * 10 ** 4 + 100), TABLE, 10 ** 4, 100)
    assert u_big < u_small


def test_usic_momo_variant():
    seq = np.ones(2 * 10 ** 3 + 31)
    a = usic_statistic(seq, TABLE, 10 ** 3, 31)
    b = usic_statistic(seq, TABLE, 10 ** 3, 31, momo_blocks=True)
    assert a > 0 and b > 0 and a != b


def test_usic_parameter_guards():
    with pytest.raises(ValueError):
        usic_statistic(np.ones(10 ** 4), TABLE, 10 ** 3, 200)
    with pytest.raises(SequenceTooShort):
        usic_statistic(np.ones(100), TABLE, 10 ** 3, 31)
