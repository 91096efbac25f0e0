"""Mobius function machinery and orthogonality statistics.

Vectorized sieve up to 1e8, Mertens sums, the two-prime cross-correlation
test, flow-sampled orthogonality averages and short-interval statistics
(with the moving-block variant).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import BudgetExceeded, SequenceTooShort
from .specialflow import FlowPoint, flow_samples

__all__ = ["MobiusTable", "mobius_sieve", "mertens", "mu_trial",
           "kbsz_sum", "BandObservable", "orthogonality_sum",
           "usic_statistic"]

_SIEVE_BUDGET = 10 ** 8


@dataclass(frozen=True)
class MobiusTable:
    N: int
    values: np.ndarray  # int8, index 0 unused

    def mu(self, n: int) -> int:
        if not 1 <= n <= self.N:
            raise SequenceTooShort(f"mu({n}) beyond table limit {self.N}")
        return int(self.values[n])


def mobius_sieve(N: int) -> MobiusTable:
    """mu(1..N) by prime-by-prime sign flips and square kills."""
    if N > _SIEVE_BUDGET:
        raise BudgetExceeded(f"sieve limit {N} beyond budget")
    if N < 1:
        raise ValueError("N must be positive")
    is_prime = np.ones(N + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(N) + 1):
        if is_prime[p]:
            is_prime[p * p:: p] = False
    mu = np.ones(N + 1, dtype=np.int8)
    for p in np.nonzero(is_prime)[0]:
        mu[p::p] = -mu[p::p]
        p2 = int(p) * int(p)
        if p2 <= N:
            mu[p2::p2] = 0
    mu[0] = 0
    return MobiusTable(N, mu)


def mu_trial(n: int) -> int:
    """mu by trial factorization (independent oracle for the sieve)."""
    if n < 1:
        raise ValueError("n must be positive")
    out = 1
    d = 2
    while d * d <= n:
        if n % d == 0:
            n //= d
            if n % d == 0:
                return 0
            out = -out
        d += 1 if d == 2 else 2
    if n > 1:
        out = -out
    return out


def mertens(N: int, table: Optional[MobiusTable] = None) -> int:
    if table is None or table.N < N:
        table = mobius_sieve(N)
    return int(np.sum(table.values[1: N + 1], dtype=np.int64))


# ---------------------------------------------------------------------------
# cross-correlation criterion sums


def kbsz_sum(seq: np.ndarray, p: int, q: int, N: int) -> complex:
    """(1/N) sum_(n<=N) a_(p n) conj(a_(q n)) for a 1-indexed sequence array."""
    if p == q:
        raise ValueError("need distinct primes")
    seq = np.asarray(seq)
    need = max(p, q) * N
    if seq.size < need + 1:
        raise SequenceTooShort(f"need indices up to {need}")
    n = np.arange(1, N + 1)
    return complex(np.sum(seq[p * n] * np.conj(seq[q * n])) / N)


# ---------------------------------------------------------------------------
# flow-coupled statistics


class BandObservable:
    """Indicator of a base-interval x height-band box, centered to zero mean.

    The mean is taken against the flow-invariant measure (normalized area
    under the roof), computed by closed-form base integration.
    """

    def __init__(self, roof, z_lo: float, z_hi: float,
                 r_lo: float, r_hi: float):
        if not 0.0 <= z_lo < z_hi <= 1.0 or not 0.0 <= r_lo < r_hi:
            raise ValueError("need a proper box")
        self.roof = roof
        self.z_lo, self.z_hi = z_lo, z_hi
        self.r_lo, self.r_hi = r_lo, r_hi
        area = roof.integral()
        # integral over [z_lo, z_hi] of (min(f, r_hi) - min(f, r_lo))+ by
        # piecewise closed forms on a fine partition (f has at most a few
        # crossings of each level in the box)
        zs = np.linspace(z_lo, z_hi, 20001)
        mids = 0.5 * (zs[:-1] + zs[1:])
        fv = roof.eval(mids, 0)
        clipped = np.clip(fv, r_lo, r_hi) - r_lo
        self.mean = float(np.sum(clipped) * (z_hi - z_lo) / len(mids) / area)

    def sample(self, z: np.ndarray, r: np.ndarray) -> np.ndarray:
        inside = ((self.z_lo <= z) & (z < self.z_hi)
                  & (self.r_lo <= r) & (r < self.r_hi))
        return inside.astype(np.float64) - self.mean


def orthogonality_sum(observable, roof, cf, x0: FlowPoint, t0: float,
                      table: MobiusTable, N: int) -> float:
    """(1/N) sum_(n<=N) F(T_(n t0) x0) mu(n)."""
    if table.N < N:
        raise SequenceTooShort("mu table shorter than N")
    z, r, _ = flow_samples(roof, cf, x0, t0, N)
    vals = observable.sample(z, r)
    mu = table.values[1: N + 1].astype(np.float64)
    return float(np.sum(vals * mu) / N)


def usic_statistic(seq: np.ndarray, table: MobiusTable, M: int, H: int,
                   momo_blocks: bool = False) -> float:
    """Short-interval orthogonality statistic of a 1-indexed sample sequence.

    Default: (1/M) sum_(M<=m<2M) |(1/H) sum_(m<=h<m+H) seq[h] mu(h)|.
    momo_blocks=True instead averages |block sums| over consecutive
    H-blocks of [1, 2M), normalized by the total length (the moving-orbit
    flavor with a single orbit).
    """
    if H < 2 or 10 * H > M:
        raise ValueError("need 2 <= H <= M/10")
    need = 2 * M + H
    seq = np.asarray(seq, dtype=np.float64)
    if seq.size < need or table.N < need:
        raise SequenceTooShort(f"need indices up to {need}")
    prod = seq[1: need] * table.values[1: need]
    cum = np.concatenate([[0.0], np.cumsum(prod)])  # cum[k] = sum of first k
    if momo_blocks:
        starts = np.arange(0, 2 * M - H, H)
        sums = cum[starts + H] - cum[starts]
        return float(np.sum(np.abs(sums)) / (starts[-1] + H))
    m = np.arange(M, 2 * M)
    sums = (cum[m + H - 1] - cum[m - 1]) / H
    return float(np.mean(np.abs(sums)))
