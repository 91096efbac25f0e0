"""Shearing diagnostics: drift series, splitting times, case classification,
almost-linear reparametrization checks, and the two-expression grid lemma.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .contfrac import ContinuedFraction
from .errors import HypothesisFailed, InvalidTriple, ScaleOutOfRange, SingularOrbit
from .orbit import dist_to_int, engine_for
from .birkhoff import GUARD, LemmaReport, _report
from .roof import RoofSpec
from .summation import compensated_cumsum

__all__ = [
    "DriftSeries", "drift_sequence", "splitting_time", "SplittingResult",
    "classify_case", "CaseResult", "GoodTriple", "StepFunction",
    "almost_linear_check", "combinatorial_search", "CombinatorialResult",
]


# ---------------------------------------------------------------------------
# drift functional


@dataclass(frozen=True)
class DriftSeries:
    """a_w for w = 0..w_max between the p-rescaled and q-rescaled sums.

    a_w = p (f^(w)(x) - f^(w)(x')) - q (f^([zeta w])(y) - f^([zeta w])(y'))
    with zeta the ratio of the rescaled roof integrals (p/q for a
    normalized roof).  Pairwise differences of matched orbit points are
    accumulated before summation, so heavy cancellation is benign.
    """

    p: float
    q: float
    zeta: float
    x: float
    x_prime: float
    y: float
    y_prime: float
    values: np.ndarray
    step_bound: np.ndarray  # per-step continuity majorant

    @property
    def w_max(self) -> int:
        return len(self.values) - 1


def _paired_diff_cumsum(roof, cf, a, b, count):
    eng = engine_for(cf)
    out = []
    for start in range(0, count, 1 << 20):
        c = min(1 << 20, count - start)
        pa = eng.positions(a, start, c)
        pb = eng.positions(b, start, c)
        da = np.minimum(pa, 1.0 - pa)
        db = np.minimum(pb, 1.0 - pb)
        if c and min(float(da.min()), float(db.min())) < GUARD:
            raise SingularOrbit("orbit within guard distance of the singularity")
        out.append(roof.eval(pa, 0) - roof.eval(pb, 0))
    diffs = np.concatenate(out) if out else np.zeros(0)
    return np.concatenate([[0.0], compensated_cumsum(diffs)]), diffs


def drift_sequence(roof: RoofSpec, p: float, q: float, x, x_prime, y, y_prime,
                   w_max: int, cf: ContinuedFraction) -> DriftSeries:
    if p <= 0 or q <= 0:
        raise ValueError("need positive p, q")
    zeta = (p * roof.integral()) / (q * roof.integral())
    wy_max = int(math.floor(zeta * w_max))
    cum_x, dx = _paired_diff_cumsum(roof, cf, x, x_prime, w_max)
    cum_y, dy = _paired_diff_cumsum(roof, cf, y, y_prime, wy_max)
    w = np.arange(w_max + 1)
    wy = np.floor(zeta * w).astype(np.int64)
    values = p * cum_x[w] - q * cum_y[wy]
    # |a_(w+1) - a_w| <= p |f(x+w a) - f(x'+w a)| + q (y-term when [zeta w] steps)
    step = p * np.abs(np.concatenate([dx, [0.0]]))
    bumps = np.nonzero(np.diff(wy) > 0)[0]
    if bumps.size:
        step[bumps] += q * np.abs(dy[wy[bumps]])
    return DriftSeries(p, q, zeta, float(x) % 1.0, float(x_prime) % 1.0,
                       float(y) % 1.0, float(y_prime) % 1.0, values, step)


# ---------------------------------------------------------------------------
# splitting detection


@dataclass(frozen=True)
class SplittingResult:
    M: int
    L: int
    shift_sign: int
    shift_error: float      # | |a_M| - r_pq |
    plateau_ok: bool
    plateau_spread: float   # max |a_s - a_M| over [M, M + L]


def splitting_time(series: DriftSeries, r_pq: float, eps: float,
                   kappa: float) -> Optional[SplittingResult]:
    """First crossing |a_w| >= r_pq, with the plateau check after it.

    Returns None (NotFound) when the series never reaches the shift.  The
    crossing must realize the shift within eps; the plateau requires
    |a_s - a_M| < eps^(3/2) for s in [M, M + kappa M].
    """
    if not (0 < r_pq and 0 < eps < 1 and 0 < kappa < 1):
        raise ValueError("need r_pq > 0 and eps, kappa in (0,1)")
    a = series.values
    hits = np.nonzero(np.abs(a) >= r_pq)[0]
    hits = hits[hits > 0]
    if hits.size == 0:
        return None
    M = int(hits[0])
    L = int(math.floor(kappa * M))
    hi = min(M + L, len(a) - 1)
    window = a[M:hi + 1]
    spread = float(np.max(np.abs(window - a[M]))) if window.size else 0.0
    return SplittingResult(
        M, L, 1 if a[M] > 0 else -1,
        abs(abs(float(a[M])) - r_pq),
        spread < eps ** 1.5 and hi == M + L,
        spread)


# ---------------------------------------------------------------------------
# variation-scale classification


@dataclass(frozen=True)
class CaseResult:
    x_scale: int
    y_scale: int
    case: str           # "Asynchronous" | "SecondOrder"
    T: float


def _variation_scale(dist: float, cf: ContinuedFraction) -> int:
    """Unique v with 1/(q_(v+1) log q_(v+1)) < dist <= 1/(q_v log q_v)."""
    lo_ok = None
    for v in range(1, cf.depth):
        qv, qv1 = cf.q[v], cf.q[v + 1]
        if qv < 2 or qv1 < 2:
            continue
        top = 1.0 / (qv * math.log(qv))
        bot = 1.0 / (qv1 * math.log(qv1))
        # boundary values belong to the closed (upper) side
        if bot * (1.0 + 1e-12) < dist <= top * (1.0 + 1e-12):
            return v
        lo_ok = v
    raise ScaleOutOfRange(f"distance {dist} outside computable scales "
                          f"(deepest index {lo_ok})")


def classify_case(x, x_prime, y, y_prime, cf: ContinuedFraction,
                  p: float = 1.0, q: float = 2.0,
                  c_pq: float = 1e-3) -> CaseResult:
    """Variation scales of the two pairs, the matching case, and the time T."""
    dx = dist_to_int(float(x) - float(x_prime))
    dy = dist_to_int(float(y) - float(y_prime))
    if dx == 0 or dy == 0:
        raise ValueError("pairs must be distinct")
    q2 = cf.q[2]
    cap = 1.0 / (q2 * math.log(q2)) if q2 >= 2 else 0.5
    if dx >= cap or dy >= cap:
        raise ScaleOutOfRange("pair distance too large for scale classification")
    nx = _variation_scale(dx, cf)
    v = _variation_scale(dy, cf)
    zeta = min(p, q) / max(p, q)
    T = zeta * c_pq * min(1.0 / dx, 1.0 / dy, float(cf.q[v + 1]))
    case = "Asynchronous" if nx != v else "SecondOrder"
    return CaseResult(nx, v, case, T)


# ---------------------------------------------------------------------------
# almost-linear reparametrizations


@dataclass(frozen=True)
class StepFunction:
    """Right-open step function into (0, 1]: value levels[i] on
    [breaks[i], breaks[i+1])."""

    breaks: tuple
    levels: tuple

    def __post_init__(self):
        if len(self.levels) + 1 != len(self.breaks):
            raise ValueError("need one more breakpoint than level")
        if any(b2 <= b1 for b1, b2 in zip(self.breaks, self.breaks[1:])):
            raise ValueError("breakpoints must increase")
        if any(not 0.0 < lv <= 1.0 for lv in self.levels):
            raise ValueError("levels must lie in (0, 1]")

    def value(self, t: float) -> float:
        if t < self.breaks[0] or t >= self.breaks[-1]:
            return self.levels[0]  # treated as periodic-constant outside
        i = bisect_right(self.breaks, t) - 1
        return self.levels[min(i, len(self.levels) - 1)]

    def integral_on(self, a: float, b: float) -> float:
        """Exact integral over [a, b] (extends by the first level outside)."""
        if b < a:
            return -self.integral_on(b, a)
        total = 0.0
        if a < self.breaks[0]:
            total += (min(b, self.breaks[0]) - a) * self.levels[0]
            a = min(b, self.breaks[0])
        if b > self.breaks[-1]:
            total += (b - max(a, self.breaks[-1])) * self.levels[0]
            b = max(a, self.breaks[-1])
        if a >= b:
            return total
        for i, lv in enumerate(self.levels):
            lo, hi = self.breaks[i], self.breaks[i + 1]
            seg = min(hi, b) - max(lo, a)
            if seg > 0:
                total += seg * lv
        return total


@dataclass(frozen=True)
class GoodTriple:
    """Reparametrization a on [M, M+L] with its good-triple data.

    kind "PAL": pieces (c_i, d_i, R_i) with a(t) = t + R_i on (c_i, d_i);
    outside the pieces a freezes at the nearest piece value (the lemma
    integrates a measurable extension).  kind "SAL": smooth callable with
    derivative; U is the whole interval.
    """

    M: float
    L: float
    d: float
    xi: float
    kind: str
    pieces: tuple = ()                       # PAL: (c, d, R) triples
    a_fun: Optional[Callable] = None         # SAL
    a_deriv: Optional[Callable] = None       # SAL

    def validate(self) -> None:
        if not (0.0 < self.d < 1.0 and 0.0 < self.xi < 1.0):
            raise InvalidTriple("need 0 < d, xi < 1")
        I = self.L
        if self.kind == "PAL":
            v = len(self.pieces)
            if v == 0:
                raise InvalidTriple("PAL needs at least one piece")
            if v > I / self.d:
                raise InvalidTriple(f"piece count {v} exceeds |I|/d")
            lo = self.M
            total = 0.0
            for (c, dd, _) in self.pieces:
                if c < lo - 1e-12 or dd <= c or dd > self.M + self.L + 1e-12:
                    raise InvalidTriple("pieces must be disjoint and ordered")
                total += dd - c
                lo = dd
            if total <= (1.0 - self.xi) * I:
                raise InvalidTriple("|U| must exceed (1 - xi)|I|")
            if abs(self.pieces[0][2]) > self.xi * I:
                raise InvalidTriple("|R_1| exceeds xi |I|")
            for (_, _, r1), (_, _, r2) in zip(self.pieces, self.pieces[1:]):
                if abs(r2 - r1) >= self.xi:
                    raise InvalidTriple("|R_(i+1) - R_i| must be < xi")
        elif self.kind == "SAL":
            if self.a_fun is None or self.a_deriv is None:
                raise InvalidTriple("SAL needs the function and its derivative")
            for u in (self.M, self.M + self.L):
                if abs(self.a_fun(u) - u) > self.xi * I + 1e-12:
                    raise InvalidTriple("endpoint deviation exceeds xi |I|")
            ts = np.linspace(self.M, self.M + self.L, 4096)
            dv = np.asarray([self.a_deriv(t) for t in ts])
            if dv.min() <= 1.0 - self.xi or dv.max() > 1.0 + self.xi + 1e-12:
                raise InvalidTriple("derivative leaves (1 - xi, 1 + xi]")
        else:
            raise InvalidTriple(f"unknown kind {self.kind!r}")


def _integral_f_of_a(triple: GoodTriple, probe: StepFunction) -> float:
    """Exact integral of probe(a(t)) over [M, M+L]."""
    M, L = triple.M, triple.L
    if triple.kind == "PAL":
        total = 0.0
        t = M
        prev_val = triple.pieces[0][0] + triple.pieces[0][2]
        for (c, d, R) in triple.pieces:
            if c > t:
                total += (c - t) * probe.value(prev_val)  # frozen gap
            total += probe.integral_on(c + R, d + R)
            prev_val = d + R
            t = d
        if t < M + L:
            total += (M + L - t) * probe.value(prev_val)
        return total
    # SAL: a is strictly increasing (a' > 1 - xi > 0); change variables by
    # locating preimages of the probe breakpoints.
    from scipy.optimize import brentq

    a, lo, hi = triple.a_fun, M, M + L
    alo, ahi = a(lo), a(hi)
    cuts = [lo]
    for b in probe.breaks:
        if alo < b < ahi:
            cuts.append(brentq(lambda t: a(t) - b, lo, hi, xtol=1e-13))
    cuts.append(hi)
    cuts.sort()
    total = 0.0
    for t1, t2 in zip(cuts, cuts[1:]):
        if t2 > t1:
            total += (t2 - t1) * probe.value(a(0.5 * (t1 + t2)))
    return total


def almost_linear_check(triple: GoodTriple, probe: StepFunction) -> LemmaReport:
    """Orbital-integral comparison: mean of f(a(t)) vs mean of f plus 9 xi/d."""
    triple.validate()
    M, L = triple.M, triple.L
    lhs = _integral_f_of_a(triple, probe) / L
    rhs = probe.integral_on(M, M + L) / L
    slack = 9.0 * triple.xi / triple.d
    inputs = {"kind": triple.kind, "M": M, "L": L, "xi": triple.xi,
              "d": triple.d}
    measured = lhs - rhs
    return LemmaReport("3.1", inputs, measured, slack, slack - measured,
                       measured < slack, 9.0,
                       {"lhs_mean": lhs, "rhs_mean": rhs})


# ---------------------------------------------------------------------------
# the two-expression grid lemma


@dataclass(frozen=True)
class CombinatorialResult:
    min_over_grid: float
    passed: Optional[bool]
    excluded_ratio: bool
    counterexample: Optional[tuple]
    c_threshold: Optional[float]
    vanishing_family_max: Optional[float]


def _grid_min_of_max(U, V, p, q, c, grid: int) -> tuple:
    A = np.geomspace(1e-3 * c, 10.0 * c, grid)
    Babs = np.geomspace(1e-4, 1e4, grid // 2)
    B = np.concatenate([-Babs[::-1], Babs])
    best = math.inf
    arg = None
    for j1 in (U, V):
        for j2 in (U, V):
            e1 = np.abs(q * j1 / A[:, None] ** 2 - p * j2 / B[None, :] ** 2)
            e2 = np.abs(q * q * j1 / A[:, None] ** 3 - p * p * j2 / B[None, :] ** 3)
            m = np.maximum(e1, e2)
            k = np.unravel_index(np.argmin(m), m.shape)
            if m[k] < best:
                best = float(m[k])
                arg = (float(A[k[0]]), float(B[k[1]]), j1, j2)
    return best, arg


def combinatorial_search(U: float, V: float, p: float, q: float, K: float,
                         c: float, grid: int = 1000) -> CombinatorialResult:
    """Grid check of max(|q j1 A^-2 - p j2 B^-2|, |q^2 j1 A^-3 - p^2 j2 B^-3|).

    Admissible ratio (p/q not in {1, U/V, V/U}): report the grid minimum
    over A in (0, 10c], all B and j1, j2 in {U, V}, locate the largest c
    (dyadic refinement) at which the minimum stays >= K.  Excluded ratio:
    exhibit the exact vanishing family and confirm both expressions are
    identically zero on it.
    """
    if not (U and V and p and q) or p == q:
        raise ValueError("need nonzero U, V and distinct nonzero p, q")
    ratio = p / q
    excluded = any(math.isclose(ratio, t, rel_tol=1e-12)
                   for t in (1.0, U / V, V / U))
    if excluded:
        # family j1 = V, j2 = U, B = s A with s^2 = p j2 / (q j1); for the
        # excluded ratios the cube equation then matches automatically
        j1, j2 = (V, U) if math.isclose(ratio, U / V, rel_tol=1e-12) else (U, V)
        s = math.sqrt((p * j2) / (q * j1))
        worst = 0.0
        for A in np.geomspace(1e-3, 10.0 * c, 64):
            B = s * A
            e1 = abs(q * j1 / A ** 2 - p * j2 / B ** 2)
            e2 = abs(q ** 2 * j1 / A ** 3 - p ** 2 * j2 / B ** 3)
            worst = max(worst, e1, e2)
        return CombinatorialResult(0.0, worst <= 1e-12, True,
                                   None, None, worst)
    best, arg = _grid_min_of_max(U, V, p, q, c, grid)
    passed = best >= K
    # locate the threshold c* by dyadic refinement from the given c
    c_thr = c
    if passed:
        while c_thr < 1e6:
            nxt, _ = _grid_min_of_max(U, V, p, q, 2 * c_thr, grid // 2)
            if nxt < K:
                break
            c_thr *= 2
    else:
        while c_thr > 1e-9:
            c_thr /= 2
            nxt, _ = _grid_min_of_max(U, V, p, q, c_thr, grid // 2)
            if nxt >= K:
                break
    return CombinatorialResult(best, passed, False,
                               None if passed else arg, c_thr, None)
