"""Exact continued-fraction arithmetic.

Expansions from quotient lists, quadratic irrationals or decimal strings,
big-integer convergents, the Ostrowski numeration, and the Diophantine
growth conditions on the denominator sequence.

All denominator arithmetic is exact; a rotation number is never collapsed
to a single float.  Every ContinuedFraction carries a certified rational
enclosure of the value, and quadratic inputs additionally carry an exact
surd representation so that distance bounds can be certified in integer
arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt
from typing import Optional, Sequence, Union

import mpmath

from .errors import (
    DepthExceeded,
    InsufficientPrecision,
    InvalidDigits,
    NotRepresentable,
    RationalInput,
)

__all__ = [
    "QuadraticSurd",
    "ContinuedFraction",
    "DistBound",
    "OstrowskiDigits",
    "DiophantineReport",
    "cf_expand",
    "dist_qn_alpha",
    "ostrowski_encode",
    "ostrowski_decode",
    "check_diophantine",
    "construct_alpha_in_D",
]


# ---------------------------------------------------------------------------
# exact quadratic-surd arithmetic


class QuadraticSurd:
    """Exact value (a + b*sqrt(d)) / c with integer a, b, c and nonsquare d > 0.

    Supports the handful of exact operations the expansion and the
    certification paths need: comparisons against rationals, floor,
    reciprocal-minus-integer (the Gauss map step).
    """

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a: int, b: int, c: int, d: int):
        if c == 0:
            raise ZeroDivisionError("zero denominator")
        if d <= 0 or isqrt(d) ** 2 == d:
            raise ValueError("d must be a positive non-square integer")
        if c < 0:
            a, b, c = -a, -b, -c
        g = gcd(gcd(abs(a), abs(b)), c)
        if g > 1:
            a, b, c = a // g, b // g, c // g
        self.a, self.b, self.c, self.d = a, b, c, d

    def is_rational(self) -> bool:
        return self.b == 0

    @staticmethod
    def _sign_surd(u: int, v: int, d: int) -> int:
        # sign of u + v*sqrt(d)
        if v == 0:
            return (u > 0) - (u < 0)
        if u == 0:
            return 1 if v > 0 else -1
        if u > 0 and v > 0:
            return 1
        if u < 0 and v < 0:
            return -1
        if v > 0:  # u < 0
            return 1 if v * v * d > u * u else (-1 if v * v * d < u * u else 0)
        return 1 if u * u > v * v * d else (-1 if u * u < v * v * d else 0)

    def cmp_fraction(self, r: Fraction) -> int:
        """Sign of self - r, computed exactly."""
        # (a + b sqrt d)/c - p/q  ->  sign of (a q - p c) + b q sqrt d   (c,q > 0)
        p, q = r.numerator, r.denominator
        return self._sign_surd(self.a * q - p * self.c, self.b * q, self.d)

    def floor(self) -> int:
        approx = (self.a + self.b * math.sqrt(self.d)) / self.c
        k = math.floor(approx)
        while self.cmp_fraction(Fraction(k + 1)) >= 0:
            k += 1
        while self.cmp_fraction(Fraction(k)) < 0:
            k -= 1
        return k

    def minus_int(self, n: int) -> "QuadraticSurd":
        return QuadraticSurd(self.a - n * self.c, self.b, self.c, self.d)

    def inverse(self) -> "QuadraticSurd":
        # c / (a + b sqrt d) = c (a - b sqrt d) / (a^2 - b^2 d)
        norm = self.a * self.a - self.b * self.b * self.d
        if norm == 0:
            raise ZeroDivisionError("inverse of zero")
        return QuadraticSurd(self.c * self.a, -self.c * self.b, norm, self.d)

    def abs_cmp_fraction(self, r: Fraction) -> int:
        """Sign of |self| - r for r >= 0."""
        if self.cmp_fraction(Fraction(0)) >= 0:
            return self.cmp_fraction(r)
        neg = QuadraticSurd(-self.a, -self.b, self.c, self.d)
        return neg.cmp_fraction(r)

    def to_mp(self, dps: int = 50) -> mpmath.mpf:
        with mpmath.workdps(dps):
            return (self.a + self.b * mpmath.sqrt(self.d)) / self.c

    def __float__(self) -> float:
        return float(self.to_mp())

    def __repr__(self) -> str:
        return f"QuadraticSurd(({self.a} + {self.b}*sqrt({self.d}))/{self.c})"


# ---------------------------------------------------------------------------
# continued fractions


def _convergents(quotients: Sequence[int]):
    p = [0, 1]
    q = [1, quotients[0]]
    for a in quotients[1:]:
        p.append(a * p[-1] + p[-2])
        q.append(a * q[-1] + q[-2])
    return tuple(p[: len(quotients) + 1]), tuple(q[: len(quotients) + 1])


@dataclass(frozen=True)
class ContinuedFraction:
    """Truncated continued fraction [0; a1, ..., aK] with exact convergents.

    p[n]/q[n] is the n-th convergent (p[0]=0, q[0]=1, q[1]=a1).  The
    enclosure brackets every irrational whose expansion starts with the
    given quotients; for quadratic inputs `surd` pins the value exactly.
    """

    quotients: tuple
    p: tuple
    q: tuple
    source: str
    enclosure: tuple  # (Fraction lo, Fraction hi), lo < alpha < hi
    surd: Optional[QuadraticSurd] = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.quotients) < 2:
            raise ValueError("need depth >= 2")
        if any((not isinstance(a, int)) or a < 1 for a in self.quotients):
            raise ValueError("partial quotients must be positive integers")
        K = self.depth
        for n in range(1, K):
            if self.p[n + 1] != self.quotients[n] * self.p[n] + self.p[n - 1]:
                raise ValueError("p recurrence violated")
            if self.q[n + 1] != self.quotients[n] * self.q[n] + self.q[n - 1]:
                raise ValueError("q recurrence violated")
        for n in range(K + 1):
            if gcd(self.p[n], self.q[n]) != 1:
                raise ValueError("convergent not in lowest terms")
        for n in range(2, K + 1):
            if self.q[n] <= self.q[n - 1]:
                raise ValueError("q must increase strictly from index 1")

    @property
    def depth(self) -> int:
        return len(self.quotients)

    def a(self, j: int) -> int:
        """Partial quotient a_j, 1-based."""
        if not 1 <= j <= self.depth:
            raise DepthExceeded(f"a_{j} beyond depth {self.depth}")
        return self.quotients[j - 1]

    def require_index(self, n: int) -> None:
        if not 0 <= n <= self.depth:
            raise DepthExceeded(f"index {n} beyond depth {self.depth}")

    @property
    def alpha_mid(self) -> Fraction:
        lo, hi = self.enclosure
        return (lo + hi) / 2

    @property
    def alpha_float(self) -> float:
        return float(self.alpha_mid)

    def alpha_mp(self, dps: int = 50) -> mpmath.mpf:
        if self.surd is not None:
            return self.surd.to_mp(dps)
        lo, hi = self.enclosure
        with mpmath.workdps(dps):
            return (mpmath.mpf(lo.numerator) / lo.denominator
                    + mpmath.mpf(hi.numerator) / hi.denominator) / 2

    def enclosure_width(self) -> Fraction:
        lo, hi = self.enclosure
        return hi - lo

    def index_of_scale(self, r: int) -> int:
        """Largest n with q_n <= r (requires 1 <= r < q_K for a sharp answer)."""
        if r < 1:
            raise ValueError("scale must be >= 1")
        n = 0
        while n + 1 <= self.depth and self.q[n + 1] <= r:
            n += 1
        return n


def _prefix_enclosure(quotients, p, q):
    K = len(quotients)
    end1 = Fraction(p[K], q[K])
    end2 = Fraction(p[K] + p[K - 1], q[K] + q[K - 1])
    return (end1, end2) if end1 < end2 else (end2, end1)


def from_quotients(quotients: Sequence[int], source: str = "explicit-quotients",
                   surd: Optional[QuadraticSurd] = None) -> ContinuedFraction:
    quotients = tuple(int(a) for a in quotients)
    p, q = _convergents(quotients)
    enclosure = _prefix_enclosure(quotients, p, q)
    return ContinuedFraction(quotients, p, q, source, enclosure, surd)


def from_quadratic(a: int, b: int, d: int, c: int, depth: int) -> ContinuedFraction:
    """Expansion of the fractional part of (a + b*sqrt(d))/c."""
    if b == 0 or d <= 0 or isqrt(d) ** 2 == d:
        raise RationalInput("input is rational, expansion terminates")
    x = QuadraticSurd(a, b, c, d)
    x = x.minus_int(x.floor())
    quotients = []
    for _ in range(depth):
        y = x.inverse()
        aj = y.floor()
        quotients.append(aj)
        x = y.minus_int(aj)
    return from_quotients(quotients, source="quadratic-irrational",
                          surd=QuadraticSurd(a, b, c, d).minus_int(
                              QuadraticSurd(a, b, c, d).floor()))


def from_decimal(text: str, depth: int, exact: bool = False) -> ContinuedFraction:
    """Certified expansion of a decimal literal.

    The literal is read as the midpoint of an interval of half-ulp radius
    (radius 0 with exact=True).  Quotients are emitted only while both
    interval endpoints agree on them; running out of agreement raises
    InsufficientPrecision.  An exact rational input whose expansion
    terminates raises RationalInput.
    """
    value = Fraction(text)
    if exact:
        radius = Fraction(0)
    else:
        digits = len(text.split(".")[1]) if "." in text else 0
        radius = Fraction(1, 2 * 10 ** digits)
    lo, hi = value - radius, value + radius
    lo -= math.floor(lo)
    hi = lo + 2 * radius
    if lo <= 0:
        raise InsufficientPrecision("interval touches a rational endpoint")
    quotients = []
    for _ in range(depth):
        if hi >= 1:
            raise InsufficientPrecision("interval too wide to certify next quotient")
        if lo == hi and lo == 0:
            raise RationalInput("expansion terminated before requested depth")
        inv_lo, inv_hi = 1 / hi, 1 / lo
        a_lo, a_hi = math.floor(inv_lo), math.floor(inv_hi)
        if a_lo != a_hi:
            if radius == 0 and 1 / lo == a_hi and lo == hi:
                raise RationalInput("expansion terminated before requested depth")
            raise InsufficientPrecision(
                f"cannot certify quotient {len(quotients)+1}: "
                f"candidates {a_lo} and {a_hi}")
        quotients.append(a_lo)
        lo, hi = inv_lo - a_lo, inv_hi - a_lo
        if lo == 0 or hi == 0:
            if radius == 0:
                raise RationalInput("expansion terminated before requested depth")
            raise InsufficientPrecision("interval touches a rational endpoint")
    return from_quotients(quotients, source="decimal-literal")


AlphaSource = Union[Sequence[int], tuple, str]


def cf_expand(alpha_source, depth: int) -> ContinuedFraction:
    """Expand a rotation number to `depth` partial quotients.

    Accepts a quotient list, a ("quad", a, b, d, c) tuple, or a decimal
    string.
    """
    if depth < 2:
        raise ValueError("depth must be >= 2")
    if isinstance(alpha_source, str):
        return from_decimal(alpha_source, depth)
    alpha_source = tuple(alpha_source)
    if alpha_source and alpha_source[0] == "quad":
        _, a, b, d, c = alpha_source
        return from_quadratic(int(a), int(b), int(d), int(c), depth)
    if len(alpha_source) < depth:
        raise ValueError("quotient list shorter than requested depth")
    return from_quotients(alpha_source[:depth])


# ---------------------------------------------------------------------------
# certified distance ||q_n alpha||


@dataclass(frozen=True)
class DistBound:
    """Interval-certified value of ||q_n alpha|| with its theorem bounds."""

    n: int
    value: float
    lo: Fraction
    hi: Fraction
    lower_bound: Fraction  # 1 / (2 q_{n+1})
    upper_bound: Fraction  # 1 / q_{n+1}
    certified: bool


def dist_qn_alpha(cf: ContinuedFraction, n: int) -> DistBound:
    """Certified ||q_n alpha||, strictly inside (1/(2 q_{n+1}), 1/q_{n+1}).

    Quadratic inputs are certified with exact integer arithmetic; otherwise
    the prefix enclosure is used, which is sharp enough for n <= depth - 2.
    """
    if not 1 <= n <= cf.depth - 1:
        raise DepthExceeded(f"need q_(n+1); n={n} with depth {cf.depth}")
    qn, pn, qn1 = cf.q[n], cf.p[n], cf.q[n + 1]
    lower = Fraction(1, 2 * qn1)
    upper = Fraction(1, qn1)
    if cf.surd is not None:
        s = cf.surd
        diff = QuadraticSurd(qn * s.a - pn * s.c, qn * s.b, s.c, s.d)
        certified = (diff.abs_cmp_fraction(lower) > 0
                     and diff.abs_cmp_fraction(upper) < 0)
        with mpmath.workdps(50):
            val = abs(qn * s.to_mp() - pn)
        center = Fraction(float(val))
        pad = Fraction(float(val) * 1e-14)
        lo_f, hi_f = center - pad, center + pad
    else:
        alo, ahi = cf.enclosure
        e1, e2 = qn * alo - pn, qn * ahi - pn
        lo_f, hi_f = (abs(e1), abs(e2)) if abs(e1) <= abs(e2) else (abs(e2), abs(e1))
        if e1 < 0 < e2:
            lo_f = Fraction(0)
        certified = lo_f > lower and hi_f < upper
        val = (lo_f + hi_f) / 2
    return DistBound(n, float(val), lo_f, hi_f, lower, upper, certified)


# ---------------------------------------------------------------------------
# Ostrowski numeration

# Digit d_j multiplies q_j.  Constraints (the classical complete and unique
# system): 0 <= d_0 <= a_1 - 1, 0 <= d_j <= a_{j+1}, and d_j = a_{j+1}
# forces d_{j-1} = 0.  Every 1 <= N < q_m is reached with digits d_0..d_{m-1}.


@dataclass(frozen=True)
class OstrowskiDigits:
    digits: tuple  # d_0 .. d_m, highest nonzero
    cf: ContinuedFraction

    def __post_init__(self):
        d = self.digits
        cf = self.cf
        if not d or d[-1] == 0:
            raise InvalidDigits("highest digit must be nonzero")
        if len(d) > cf.depth:
            raise InvalidDigits("more digits than quotient depth")
        if any(x < 0 for x in d):
            raise InvalidDigits("digits must be non-negative")
        if d[0] > cf.a(1) - 1:
            raise InvalidDigits(f"d_0 = {d[0]} exceeds a_1 - 1 = {cf.a(1)-1}")
        for j in range(1, len(d)):
            cap = cf.a(j + 1)
            if d[j] > cap:
                raise InvalidDigits(f"d_{j} = {d[j]} exceeds a_{j+1} = {cap}")
            if d[j] == cap and d[j - 1] != 0:
                raise InvalidDigits(
                    f"d_{j} = a_{j+1} forces d_{j-1} = 0, got {d[j-1]}")

    def value(self) -> int:
        return sum(dj * self.cf.q[j] for j, dj in enumerate(self.digits))

    def level_digit(self, j: int) -> int:
        return self.digits[j] if j < len(self.digits) else 0


def ostrowski_encode(N: int, cf: ContinuedFraction) -> OstrowskiDigits:
    """Greedy digit expansion of N in the q_n numeration."""
    if N < 1:
        raise NotRepresentable("N must be a positive integer")
    K = cf.depth
    if N >= cf.q[K]:
        raise NotRepresentable(f"N = {N} >= q_{K} = {cf.q[K]}; increase depth")
    digits = [0] * K
    r = N
    for j in range(K - 1, -1, -1):
        digits[j] = r // cf.q[j]
        r -= digits[j] * cf.q[j]
    assert r == 0
    while digits and digits[-1] == 0:
        digits.pop()
    return OstrowskiDigits(tuple(digits), cf)


def ostrowski_decode(digits: OstrowskiDigits) -> int:
    """Inverse of ostrowski_encode (digit constraints re-validated)."""
    OstrowskiDigits(digits.digits, digits.cf)  # re-validate
    return digits.value()


def ostrowski_blocks(N: int, cf: ContinuedFraction):
    """Decompose [0, N) into Ostrowski blocks, highest level first.

    Yields (level j, start index, count b_j) with the block covering orbit
    indices [start, start + b_j * q_j); concatenated blocks tile [0, N).
    """
    digits = ostrowski_encode(N, cf).digits
    start = 0
    for j in range(len(digits) - 1, -1, -1):
        if digits[j]:
            yield j, start, digits[j]
            start += digits[j] * cf.q[j]
    assert start == N


# ---------------------------------------------------------------------------
# Diophantine condition


@dataclass(frozen=True)
class DiophantineReport:
    """Per-index growth flags of the denominator sequence (natural log)."""

    depth: int
    k_alpha: tuple           # n with q_{n+1} <= q_n log^{7/8} q_n
    d2_witnesses: tuple      # n with q_{n+1} >= q_n log q_n loglog q_n
    d3_violations: tuple     # n with q_{n+1} > q_n log^2 q_n
    d1_partial_sums: tuple   # partial sums of log^{-7/8} q_i over i not in K_alpha
    d1_increments_decreasing: bool
    d_alpha: float           # max q_{n+1}/(q_n log^2 q_n), clamped at >= 1


def check_diophantine(cf: ContinuedFraction) -> DiophantineReport:
    if cf.depth < 4:
        raise ValueError("need depth >= 4")
    k_alpha, d2, d3 = [], [], []
    partials, increments = [], []
    running = 0.0
    d_alpha = 1.0
    for n in range(1, cf.depth):
        qn, qn1 = cf.q[n], cf.q[n + 1]
        if qn < 2:
            continue
        lg = math.log(qn)
        if qn1 <= qn * lg ** 0.875:
            k_alpha.append(n)
        else:
            inc = lg ** -0.875
            running += inc
            increments.append(inc)
        if qn >= 3 and qn1 >= qn * lg * math.log(lg):
            d2.append(n)
        if qn1 > qn * lg * lg:
            d3.append(n)
        d_alpha = max(d_alpha, qn1 / (qn * lg * lg))
        partials.append(running)
    decreasing = all(b <= a * (1 + 1e-12) for a, b in zip(increments, increments[1:]))
    return DiophantineReport(cf.depth, tuple(k_alpha), tuple(d2), tuple(d3),
                             tuple(partials), decreasing, d_alpha)


_CONSTRUCT_PREFIX = 5


def construct_alpha_in_D(witness_gap: int, depth: int) -> ContinuedFraction:
    """Quotient sequence engineered to satisfy the growth condition.

    Every witness_gap-th index n past a short all-ones prefix gets
    a_{n+1} = ceil(log q_n * loglog q_n), which forces a resonant scale
    there; all other quotients are 1, so the log^2 cap holds everywhere
    past the prefix.
    """
    if witness_gap < 2:
        raise ValueError("witness_gap must be >= 2")
    if depth < 8:
        raise ValueError("depth must be >= 8")
    quotients = [1]
    q_prev, q_cur = 1, 1  # q_0, q_1
    first = max(_CONSTRUCT_PREFIX, witness_gap + 2)
    for n in range(1, depth):
        # choosing a_{n+1} given q_n
        if n >= first and (n - first) % witness_gap == 0 and q_cur >= 3:
            lg = math.log(q_cur)
            a_next = max(2, math.ceil(lg * math.log(lg)))
        else:
            a_next = 1
        quotients.append(a_next)
        q_prev, q_cur = q_cur, a_next * q_cur + q_prev
    return from_quotients(quotients, source="explicit-quotients")
