"""Circle-rotation orbit queries.

Positions x + j*alpha are never formed from a single floating alpha:
the engine reduces j*alpha modulo 1 with exact integer arithmetic against
a deep convergent p_m/q_m and adds the tiny certified tail j*theta,
theta = alpha - p_m/q_m, so every batch of positions carries an explicit
error bound.  Exact rational fallbacks certify decisions that land within
that bound of a window boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .contfrac import ContinuedFraction, ostrowski_blocks
from .errors import BudgetExceeded, DepthExceeded

__all__ = [
    "CirclePoint", "OrbitEngine", "engine_for", "ClosestReturn",
    "closest_return", "spacing_check", "SpacingVerdict",
    "sigma_membership", "SigmaResult", "good_set_membership", "GoodSetResult",
    "forward_backward_classify", "ClassifyResult", "dist_to_int",
]

_CHUNK = 1 << 20
_NAIVE_BUDGET = 10 ** 8


@dataclass(frozen=True)
class CirclePoint:
    """Point of [0,1) held as an exact rational (floats enter exactly)."""

    value: Fraction

    def __post_init__(self):
        v = self.value
        if not isinstance(v, Fraction):
            v = Fraction(v)
        v -= math.floor(v)
        object.__setattr__(self, "value", v)

    @staticmethod
    def of(x) -> "CirclePoint":
        if isinstance(x, CirclePoint):
            return x
        return CirclePoint(Fraction(x))

    def __float__(self) -> float:
        return float(self.value)


def _as_float(x) -> float:
    if isinstance(x, CirclePoint):
        return float(x)
    return float(x) % 1.0


def dist_to_int(x) -> float:
    """||x|| = min({x}, 1 - {x})."""
    v = _as_float(x)
    return min(v, 1.0 - v)


def _norm(arr: np.ndarray) -> np.ndarray:
    return np.minimum(arr, 1.0 - arr)


class OrbitEngine:
    """Certified batch evaluation of {x + j*alpha} for one rotation number."""

    def __init__(self, cf: ContinuedFraction, j_budget: int = 10 ** 8):
        self.cf = cf
        self.j_budget = int(j_budget)
        m = cf.depth
        while m > 1 and cf.q[m] * (self.j_budget + 1) >= 2 ** 62:
            m -= 1
        self.anchor = m
        self.P = cf.p[m]
        self.Q = cf.q[m]
        dps = 40 + len(str(cf.q[cf.depth]))
        alpha = cf.alpha_mp(dps)
        with __import__("mpmath").workdps(dps):
            self.theta = float(alpha - Fraction(self.P, self.Q))
            self.deltas = np.array(
                [float(cf.q[k] * alpha - cf.p[k]) for k in range(cf.depth)],
                dtype=np.float64)
        # truth uncertainty of alpha itself plus representation error
        self.theta_err = float(cf.enclosure_width()) + 1e-24

    # -- float positions with error bound -----------------------------------

    def err_bound(self, j_abs_max: int) -> float:
        return 5e-16 + j_abs_max * self.theta_err

    def positions(self, x, j0: int, count: int, direction: int = 1) -> np.ndarray:
        """{x + direction*(j0 + k)*alpha} for k = 0..count-1, as float64."""
        j = direction * (j0 + np.arange(count, dtype=np.int64))
        return self.positions_at(x, j)

    def positions_at(self, x, j: np.ndarray) -> np.ndarray:
        j = np.asarray(j, dtype=np.int64)
        if j.size and max(abs(int(j.max())), abs(int(j.min()))) > self.j_budget:
            raise BudgetExceeded("orbit index beyond engine budget")
        xf = _as_float(x)
        main = ((j * self.P) % self.Q) / self.Q
        pos = (xf + main + j * self.theta) % 1.0
        return pos

    def position(self, x, j: int) -> float:
        return float(self.positions_at(x, np.array([j]))[0])

    # -- exact interval fallback --------------------------------------------

    def dist_interval(self, x, j: int):
        """Exact enclosure of ||x + j alpha|| as a Fraction interval."""
        xv = CirclePoint.of(x).value
        lo_a, hi_a = self.cf.enclosure
        vals = sorted((xv + j * lo_a, xv + j * hi_a))
        lo, hi = vals
        flo = lo - math.floor(lo)
        fhi = flo + (hi - lo)
        if fhi >= 1:
            return Fraction(0), max(Fraction(1, 2) - 0, fhi - 1)  # wrapped: touch 0
        dlo = min(flo, 1 - fhi)
        dhi = min(max(flo, 1 - flo), max(fhi, 1 - fhi))
        if flo <= Fraction(1, 2) <= fhi:
            dhi = Fraction(1, 2)
        return min(dlo, dhi), max(dlo, dhi)

    # -- minima over index ranges -------------------------------------------

    def naive_min(self, x, count: int, direction: int = 1):
        """(min ||x + dir*j*alpha||, argmin j) over 0 <= j < count, first wins."""
        if count > _NAIVE_BUDGET:
            raise BudgetExceeded(f"naive scan of {count} points refused")
        best, best_j = math.inf, -1
        for start in range(0, count, _CHUNK):
            c = min(_CHUNK, count - start)
            d = _norm(self.positions(x, start, c, direction))
            k = int(np.argmin(d))
            if d[k] < best:
                best, best_j = float(d[k]), start + k
        return best, best_j

    def accel_min_scale(self, x, n: int, direction: int = 1):
        """(min ||x + dir*j*alpha||, argmin) over 0 <= j < q_n, beam search.

        Digits of j are chosen bottom-up in the Ostrowski numeration
        (d_0 <= a_1 - 1, d_k <= a_{k+1}, a maximal digit forces the digit
        below to vanish), greedily reducing the signed remainder of
        x + j*alpha, with a pruned beam around the greedy digit.  The
        surviving candidates are re-evaluated through the certified
        position path, so the returned value is an exact minimum over the
        candidate set.
        """
        cf = self.cf
        cf.require_index(n)
        qn = cf.q[n]
        if qn <= 2048:
            return self.naive_min(x, qn, direction)
        xf = _as_float(x) if direction == 1 else (-_as_float(x)) % 1.0
        rem0 = xf if xf <= 0.5 else xf - 1.0
        # tail[k] = max total adjustment available from levels >= k
        tail = np.zeros(n + 1)
        for k in range(n - 1, -1, -1):
            cap = cf.a(k + 1) - (1 if k == 0 else 0)
            tail[k] = tail[k + 1] + cap * abs(self.deltas[k])
        # state: (j, rem, prev_digit_zero)
        states = [(0, rem0, True)]
        for k in range(n):
            dk = float(self.deltas[k])
            cap = cf.a(k + 1) - (1 if k == 0 else 0)
            nxt = {}
            for j, rem, prev_zero in states:
                if cap <= 6 or dk == 0.0:
                    cands = range((cap + 1) if dk else 1)
                else:
                    cands = set()
                    for target in (0.0, 1.0, -1.0):  # hit 0 directly or by wrap
                        c = int(round((target - rem) / dk))
                        cands.update((max(0, min(c - 1, cap)),
                                      max(0, min(c, cap)),
                                      max(0, min(c + 1, cap))))
                    cands.update((0, cap))
                for c in cands:
                    if c == cap and cap == cf.a(k + 1) and not prev_zero:
                        continue  # maximal digit needs a zero below it
                    jj = j + c * cf.q[k]
                    rr = rem + c * dk
                    rr -= round(rr)  # wrap to (-1/2, 1/2]
                    old = nxt.get(jj)
                    if old is None or abs(rr) < abs(old[0]):
                        nxt[jj] = (rr, c == 0)
            ranked = sorted(nxt.items(), key=lambda kv: (abs(kv[1][0]), kv[0]))
            best_abs = abs(ranked[0][1][0])
            limit = best_abs + tail[k + 1]
            states = []
            for j, (rem, pz) in ranked:
                if len(states) >= 8 and abs(rem) > limit:
                    continue
                if len(states) >= 32:
                    break
                states.append((j, rem, pz))
        js = np.array(sorted(j for j, _, _ in states), dtype=np.int64)
        d = _norm(self.positions_at(x, direction * js))
        k = int(np.argmin(d))
        return float(d[k]), int(js[k])

    def min_dist_range(self, x, n_points: int, direction: int = 1,
                       method: str = "accelerated"):
        """(min ||x + dir*j*alpha||, argmin) over 0 <= j < n_points."""
        if n_points < 1:
            raise ValueError("empty index range")
        if method == "naive":
            return self.naive_min(x, n_points, direction)
        if n_points >= self.cf.q[self.cf.depth]:
            raise BudgetExceeded(
                f"range {n_points} not covered at depth {self.cf.depth}")
        best, best_j = math.inf, -1
        for level, start, b in ostrowski_blocks(n_points, self.cf):
            for s in range(b):
                base = start + s * self.cf.q[level]
                shifted = self.position(x, direction * base)
                if direction == -1:
                    shifted = (-shifted) % 1.0
                d, j = self.accel_min_scale(shifted, level)
                if d < best - 1e-18 or (abs(d - best) <= 1e-18 and base + j < best_j):
                    best, best_j = d, base + j
        return best, best_j


_ENGINES: dict = {}


def engine_for(cf: ContinuedFraction, j_budget: int = 10 ** 8) -> OrbitEngine:
    key = (cf, j_budget)
    eng = _ENGINES.get(key)
    if eng is None:
        eng = OrbitEngine(cf, j_budget)
        _ENGINES[key] = eng
    return eng


# ---------------------------------------------------------------------------
# closest returns


@dataclass(frozen=True)
class ClosestReturn:
    n: int
    i: int            # smallest index attaining the minimum
    B: float          # q_n * ||x + i alpha||
    dist: float
    method: str


def closest_return(x, n: int, cf: ContinuedFraction,
                   method: str = "accelerated") -> ClosestReturn:
    """B_{n,x} and its index over the orbit segment of length q_n."""
    cf.require_index(n)
    eng = engine_for(cf)
    if method == "naive":
        d, i = eng.naive_min(x, cf.q[n])
    elif method == "accelerated":
        d, i = eng.accel_min_scale(x, n)
    else:
        raise ValueError(f"unknown method {method!r}")
    B = cf.q[n] * d
    if not 0.0 < B < 1.0 + 1e-9:
        raise AssertionError(f"B_(n,x) = {B} outside (0,1): x={x}, n={n}")
    return ClosestReturn(n, i, min(B, math.nextafter(1.0, 0.0)), d, method)


# ---------------------------------------------------------------------------
# spacing (orbit gaps up to return times)


@dataclass(frozen=True)
class SpacingVerdict:
    n: int
    min_gap: float
    max_gap: float
    lower_bound: float       # 1 / (2 q_n)
    cover_length: float      # 2 / q_n
    min_gap_ok: bool
    gap_cover_ok: bool
    theoretical_min: float   # ||q_{n-1} alpha||


def spacing_check(x, n: int, cf: ContinuedFraction,
                  sweep_steps: int = 0) -> SpacingVerdict:
    """Exhaustive pairwise spacing and gap-cover check for the q_n-orbit."""
    cf.require_index(n)
    qn = cf.q[n]
    if qn > 10 ** 6:
        raise BudgetExceeded("exhaustive spacing limited to q_n <= 1e6")
    eng = engine_for(cf)
    if qn == 1:
        theo = abs(float(eng.deltas[max(n - 1, 0)]))
        return SpacingVerdict(n, math.inf, 1.0, 1.0 / (2 * qn), 2.0 / qn,
                              True, True, theo)
    pos = np.sort(eng.positions(x, 0, qn))
    gaps = np.diff(pos)
    wrap = 1.0 - pos[-1] + pos[0]
    min_gap = float(min(gaps.min(), wrap))
    max_gap = float(max(gaps.max(), wrap))
    theo = abs(float(eng.deltas[n - 1]))
    lower = 1.0 / (2.0 * qn)
    cover = 2.0 / qn
    ok_min = min_gap >= lower
    ok_cover = max_gap <= cover
    if sweep_steps:
        step = 1.0 / (sweep_steps * qn)
        t = 0.0
        while t < 1.0:
            lo = np.searchsorted(pos, t)
            hit = (lo < qn and pos[lo] <= t + cover) or \
                  (lo == qn and pos[0] + 1.0 <= t + cover)
            if not hit:
                ok_cover = False
                break
            t += step
    return SpacingVerdict(n, min_gap, max_gap, lower, cover,
                          ok_min, ok_cover, theo)


# ---------------------------------------------------------------------------
# singular-window hitting sets


@dataclass(frozen=True)
class SigmaResult:
    member: bool
    n: int
    M: float
    window: float
    min_dist: float
    hit_index: Optional[int]
    boundary_flagged: bool

    def __bool__(self) -> bool:
        return self.member


def sigma_membership(x, n: int, M: float, cf: ContinuedFraction,
                     method: str = "accelerated") -> SigmaResult:
    """Does the forward orbit of x enter the resonant window within M q_{n+1} steps?

    Window halfwidth 1/(q_n log^{7/8} q_n); indices 0 <= i <= M q_{n+1}.
    Points within the position error bound of the boundary are classified
    inside (conservative) and flagged.
    """
    cf.require_index(n + 1)
    qn = cf.q[n]
    if qn < 2:
        raise ValueError("window undefined for q_n < 2")
    count = int(math.floor(M * cf.q[n + 1])) + 1
    if method == "naive" and count > _NAIVE_BUDGET:
        raise BudgetExceeded("naive sigma scan beyond budget")
    eng = engine_for(cf)
    w = 1.0 / (qn * math.log(qn) ** 0.875)
    d, j = eng.min_dist_range(x, count, method=method)
    margin = eng.err_bound(count)
    flagged = abs(d - w) <= margin
    member = d <= w + margin
    return SigmaResult(member, n, M, w, d, j if member else None, flagged)


@dataclass(frozen=True)
class GoodSetResult:
    member: bool
    kind: str
    s_lo: int
    s_hi: int            # truncation actually evaluated
    min_margin: float    # min over s of (min orbit dist - window)
    flagged: bool

    def __bool__(self) -> bool:
        return self.member


def _two_sided_min(eng: OrbitEngine, x, count: int) -> float:
    xf = _as_float(x)
    d_fwd, _ = eng.min_dist_range(xf, count)
    d_bwd, _ = eng.min_dist_range((-xf) % 1.0, count)
    return min(d_fwd, d_bwd)


def _window(kind: str, q: int) -> float:
    lg = math.log(q)
    return 1.0 / (q * lg * lg) if kind == "log2" else 1.0 / (q * lg ** 0.875)


def good_set_membership(x, kind: str, params: dict,
                        cf: ContinuedFraction) -> GoodSetResult:
    """Membership in the singularity-avoiding sets of the shearing analysis.

    kind: "Eprime" (log^2 window at one scale s), "W" (log^{7/8} window at
    scale s), "Esup" (intersection of Eprime over s >= s0 up to the cf
    depth), "Z" (intersection of W over non-resonant s >= s0, meeting Esup).
    """
    eng = engine_for(cf)

    def single(kind_w: str, s: int) -> float:
        cf.require_index(s)
        if cf.q[s] < 2:
            raise ValueError("scale too small for the window definition")
        count = cf.q[s] + 1
        return _two_sided_min(eng, x, count) - _window(kind_w, cf.q[s])

    if kind in ("Eprime", "W"):
        s = params["s"]
        margin = single("log2" if kind == "Eprime" else "log78", s)
        err = eng.err_bound(cf.q[s])
        return GoodSetResult(margin > err, kind, s, s, margin,
                             abs(margin) <= err)
    if kind == "Esup":
        s0 = params["s0"]
        default_hi = max(s for s in range(1, cf.depth) if cf.q[s] <= 10 ** 6)
        s_hi = min(params.get("s_max", default_hi), cf.depth - 1)
        margins = [single("log2", s) for s in range(s0, s_hi + 1)]
        worst = min(margins)
        err = eng.err_bound(cf.q[s_hi])
        return GoodSetResult(worst > err, kind, s0, s_hi, worst,
                             abs(worst) <= err)
    if kind == "Z":
        s0 = params["s0"]
        default_hi = max(s for s in range(1, cf.depth) if cf.q[s] <= 10 ** 6)
        s_hi = min(params.get("s_max", default_hi), cf.depth - 1)
        from .contfrac import check_diophantine
        k_alpha = set(check_diophantine(cf).k_alpha)
        margins = [single("log2", s) for s in range(s0, s_hi + 1)]
        margins += [single("log78", s) for s in range(s0, s_hi + 1)
                    if s not in k_alpha]
        worst = min(margins)
        err = eng.err_bound(cf.q[s_hi])
        return GoodSetResult(worst > err, kind, s0, s_hi, worst,
                             abs(worst) <= err)
    raise ValueError(f"unknown set kind {kind!r}")


# ---------------------------------------------------------------------------
# forward / backward continuity classification


@dataclass(frozen=True)
class ClassifyResult:
    forward_ok: bool
    backward_ok: bool
    hypothesis_holds: bool
    lemma_violated: bool
    s: int
    window: float
    scan_length: int


def forward_backward_classify(y, y_prime, s: int,
                              cf: ContinuedFraction) -> ClassifyResult:
    """Does the arc [y, y'] avoid the resonant window forward or backward?

    forward_ok: the arc misses every backward image R^{-i} of the window
    for 0 <= i <= floor(q_{s+1}/4); backward_ok is the mirrored statement.

    hypothesis_holds encodes the admissibility under which at least one
    flag must come out true: the pair has to sit at the variation scale of
    s (||y - y'|| <= 1/(q_s log q_s)), and either s is a non-resonant
    scale with spacing margin (4 q_(s+1) <= q_s log^(7/8) q_s, so forward
    and backward hits cannot coexist with the orbit spacing), or the arc
    clears the two-sided q_s-range of window images.  Without the
    closeness coupling the disjunction is genuinely false (uncoupled
    random triples produce two-sided hits), so such inputs are reported
    as inadmissible rather than as lemma violations.
    """
    cf.require_index(s + 1)
    yf, ypf = _as_float(y), _as_float(y_prime)
    dd = ((ypf - yf + 0.5) % 1.0) - 0.5
    if dd == 0.0:
        raise ValueError("need distinct points")
    c = (yf + dd / 2.0) % 1.0
    h = abs(dd) / 2.0
    scan = cf.q[s + 1] // 4
    if scan > _NAIVE_BUDGET:
        raise BudgetExceeded("scan budget exceeded")
    qs = cf.q[s]
    if qs < 2:
        raise ValueError("scale too small")
    w = _window("log78", qs)
    eng = engine_for(cf)
    thr = w + h
    d_fwd, _ = eng.min_dist_range(c, scan + 1)
    d_bwd, _ = eng.min_dist_range((-c) % 1.0, scan + 1)
    forward_ok = d_fwd > thr
    backward_ok = d_bwd > thr
    lg = math.log(qs)
    coupled = 2.0 * h <= 1.0 / (qs * lg)
    margin_ok = 4 * cf.q[s + 1] <= qs * lg ** 0.875
    if not coupled:
        hyp = False
    elif margin_ok:
        hyp = True
    else:
        d2 = min(eng.min_dist_range(c, qs + 1)[0],
                 eng.min_dist_range((-c) % 1.0, qs + 1)[0])
        hyp = d2 > thr
    violated = hyp and not (forward_ok or backward_ok)
    return ClassifyResult(forward_ok, backward_ok, hyp, violated,
                          s, w, scan)
