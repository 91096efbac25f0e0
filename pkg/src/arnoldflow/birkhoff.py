"""Birkhoff sums of the roof and its derivatives, with quantitative verifiers.

Each verifier measures a quantity the theory bounds by an unnamed constant
times a base expression.  Constants are handled by a two-phase protocol:
calibrate on small scales (max observed ratio times a fixed headroom
factor), freeze, then test on a disjoint larger range.  A verifier called
with constant=None runs in calibration mode and only reports the ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .contfrac import ContinuedFraction, ostrowski_blocks
from .errors import BudgetExceeded, HypothesisFailed, SingularOrbit
from .orbit import closest_return, engine_for, sigma_membership
from .roof import RoofSpec, shear_coefficient
from .summation import compensated_sum

__all__ = [
    "LemmaReport", "birkhoff_sum", "birkhoff_partials",
    "denjoy_koksma_check", "verify_special_times", "verify_f_bound",
    "verify_fprime_far", "verify_fprime_goodscale", "resonant_decomposition",
    "verify_higher_derivatives", "CALIBRATION_HEADROOM",
]

GUARD = 1e-15
_MAX_N = 10 ** 8
_CHUNK = 1 << 20

# headroom applied to the max training ratio when freezing a constant
CALIBRATION_HEADROOM = 2.0


@dataclass(frozen=True)
class LemmaReport:
    """Structured verdict: measured quantity vs constant * base bound.

    margin = bound - measured (>= 0 iff the estimate holds); when run in
    calibration mode (no constant) bound and margin are NaN and `ratio`
    in details carries measured/base.
    """

    lemma_id: str
    inputs: dict
    measured: float
    bound: float
    margin: float
    passed: Optional[bool]
    constant: Optional[float] = None
    details: dict = field(default_factory=dict)
    sub_reports: tuple = ()


def _report(lemma_id, inputs, measured, base, constant, details=None):
    details = dict(details or {})
    details["base"] = base
    details["ratio"] = measured / base if base > 0 else math.inf
    if constant is None:
        return LemmaReport(lemma_id, inputs, measured, math.nan, math.nan,
                           None, None, details)
    bound = constant * base
    return LemmaReport(lemma_id, inputs, measured, bound, bound - measured,
                       bound - measured >= 0.0, constant, details)


def _combine(lemma_id, inputs, subs):
    worst = min((s.margin for s in subs), default=math.nan)
    passed = all(s.passed for s in subs) if all(
        s.passed is not None for s in subs) else None
    meas = max(s.measured for s in subs)
    bnd = min(s.bound for s in subs)
    return LemmaReport(lemma_id, inputs, meas, bnd, worst, passed,
                       None, {}, tuple(subs))


# ---------------------------------------------------------------------------
# the sums themselves


def _chunk_values(roof, eng, x, j0: int, count: int, order: int):
    for start in range(0, count, _CHUNK):
        c = min(_CHUNK, count - start)
        pos = eng.positions(x, j0 + start, c)
        d = np.minimum(pos, 1.0 - pos)
        if d.size and float(d.min()) < GUARD:
            k = int(np.argmin(d))
            raise SingularOrbit(
                f"orbit point {j0 + start + k} within guard of the singularity")
        yield roof.eval(pos, order)


def birkhoff_sum(roof, cf: ContinuedFraction, x, n: int, order: int = 0,
                 method: str = "naive") -> float:
    """f^(order) summed along the orbit: sum_{j<n} f^(order)(x + j alpha).

    Negative n uses the cocycle convention f^(-n)(x) = -f^(n)(x - n alpha).
    method "ostrowski-blocked" groups the sum by the Ostrowski blocks of n
    (per-block partial sums at the shifted points); "naive" accumulates in
    index order.  Both use compensated reductions.
    """
    if abs(n) > _MAX_N:
        raise BudgetExceeded(f"|n| = {abs(n)} beyond budget {_MAX_N}")
    if n == 0:
        return 0.0
    eng = engine_for(cf)
    if n < 0:
        shifted = eng.position(x, n)
        return -birkhoff_sum(roof, cf, shifted, -n, order, method)
    if method == "naive":
        partials = [compensated_sum(v)
                    for v in _chunk_values(roof, eng, x, 0, n, order)]
        return math.fsum(partials)
    if method == "ostrowski-blocked":
        partials = []
        for level, start, b in ostrowski_blocks(n, cf):
            qj = cf.q[level]
            for s in range(b):
                block = [compensated_sum(v) for v in
                         _chunk_values(roof, eng, x, start + s * qj, qj, order)]
                partials.append(math.fsum(block))
        return math.fsum(partials)
    raise ValueError(f"unknown method {method!r}")


def birkhoff_partials(roof, cf: ContinuedFraction, x, ns, order: int = 0):
    """Values of f^(order)-sums at each n in `ns` in one orbit sweep."""
    ns = sorted(set(int(n) for n in ns))
    if not ns or ns[0] < 0:
        raise ValueError("sample indices must be non-negative")
    if ns[-1] > _MAX_N:
        raise BudgetExceeded("largest sample beyond budget")
    eng = engine_for(cf)
    out = {}
    partials = []
    done = 0
    for n in ns:
        if n > done:
            partials.extend(compensated_sum(v) for v in
                            _chunk_values(roof, eng, x, done, n - done, order))
            done = n
        out[n] = math.fsum(partials)
    return out


# ---------------------------------------------------------------------------
# Denjoy-Koksma


def denjoy_koksma_check(f_bv, x, n: int, cf: ContinuedFraction) -> LemmaReport:
    """|sum of f_bv over the q_n-orbit - q_n * integral| <= 2 Var(f_bv), exactly.

    f_bv must provide eval (order 0), integral() and variation().
    """
    cf.require_index(n)
    qn = cf.q[n]
    if qn > 10 ** 7:
        raise BudgetExceeded("q_n beyond Denjoy-Koksma budget")
    eng = engine_for(cf)
    total = math.fsum(compensated_sum(v)
                      for v in _chunk_values(f_bv, eng, x, 0, qn, 0))
    measured = abs(total - qn * f_bv.integral())
    base = 2.0 * f_bv.variation(0)
    return LemmaReport("denjoy-koksma", {"x": float(x) % 1.0, "n": n, "q_n": qn},
                       measured, base, base - measured, measured <= base,
                       1.0, {"sum": total, "variation": f_bv.variation(0)})


# ---------------------------------------------------------------------------
# return-time estimates (five sub-estimates)


def verify_special_times(roof: RoofSpec, x, n: int, cf: ContinuedFraction,
                         constants: Optional[dict] = None) -> LemmaReport:
    """Return-time Birkhoff estimates for f and derivatives 1..4.

    Requires the normalized roof (integral 1).  constants maps "e0".."e4"
    to frozen calibration constants; None runs calibration mode.
    """
    if abs(roof.integral() - 1.0) > 1e-9:
        raise ValueError("normalize the roof first (integral must be 1)")
    cf.require_index(n + 1)
    qn = cf.q[n]
    if qn > 10 ** 7:
        raise BudgetExceeded("q_n beyond budget")
    cr = closest_return(x, n, cf)
    B = cr.B
    eng = engine_for(cf)
    hit = eng.position(x, cr.i)
    S = shear_coefficient(roof)
    consts = constants or {}
    lg = math.log(qn)
    subs = []
    inputs = {"x": float(x) % 1.0, "n": n, "q_n": qn, "B": B, "i": cr.i}

    s0 = birkhoff_sum(roof, cf, x, qn, 0)
    subs.append(_report("6.2-e0", inputs, abs(s0 - qn),
                        lg + abs(math.log(B)), consts.get("e0"),
                        {"sum": s0}))
    s1 = birkhoff_sum(roof, cf, x, qn, 1)
    subs.append(_report("6.2-e1", inputs, abs(s1 - S * qn * lg),
                        qn * (1.0 + 1.0 / B), consts.get("e1"),
                        {"sum": s1, "shear": S}))
    for order, key in ((2, "e2"), (3, "e3"), (4, "e4")):
        sj = birkhoff_sum(roof, cf, x, qn, order)
        fj = float(roof.eval(hit, order))
        subs.append(_report(f"6.2-{key}", inputs, abs(sj - fj),
                            float(qn) ** order, consts.get(key),
                            {"sum": sj, "f_at_hit": fj}))
    return _combine("6.2", inputs, subs)


# ---------------------------------------------------------------------------
# order-0 deviation bound


def verify_f_bound(roof: RoofSpec, x, T: int, cf: ContinuedFraction,
                   constant: Optional[float] = None, samples: int = 200,
                   exhaustive: bool = False) -> LemmaReport:
    """max_n |f^(n)(x) - n| over [0, T] against C * T^(1/5).

    Applicable only when the orbit up to T avoids the window of halfwidth
    1/(2 T log^4 T); otherwise HypothesisFailed.  n is sampled
    geometrically (plus all q_j <= T) unless exhaustive.
    """
    if abs(roof.integral() - 1.0) > 1e-9:
        raise ValueError("normalize the roof first")
    if T > 10 ** 7:
        raise BudgetExceeded("T beyond budget")
    eng = engine_for(cf)
    w = 1.0 / (2.0 * T * math.log(T) ** 4)
    dmin, jmin = eng.min_dist_range(x, T + 1)
    if dmin <= w:
        raise HypothesisFailed(
            f"orbit point {jmin} at distance {dmin:.3e} <= window {w:.3e}")
    if exhaustive:
        ns = list(range(1, T + 1))
    else:
        ns = sorted({int(round(T ** (k / (samples - 1.0)))) for k in range(samples)}
                    | {q for q in cf.q if 1 <= q <= T})
    sums = birkhoff_partials(roof, cf, x, ns, 0)
    devs = {n: abs(sums[n] - n) for n in ns}
    n_worst = max(devs, key=devs.get)
    inputs = {"x": float(x) % 1.0, "T": T, "n_samples": len(ns)}
    return _report("6.3", inputs, devs[n_worst], T ** 0.2, constant,
                   {"worst_n": n_worst, "min_orbit_dist": dmin, "window": w})


# ---------------------------------------------------------------------------
# f' far from singularities (epsilon-form sandwich, no calibrated constant)


def verify_fprime_far(roof: RoofSpec, x, r: int, n: int, M: float, eps: float,
                      cf: ContinuedFraction) -> LemmaReport:
    """Sandwich (shear +- eps^2) r log r for f'^(r), or the short-range bound.

    Requires x outside the resonant-window hitting set at scale n; the
    branch is chosen by r against eps^4 q_n.
    """
    sig = sigma_membership(x, n, M, cf)
    if sig.member:
        raise HypothesisFailed(
            f"x hits the resonant window at step {sig.hit_index}")
    S = shear_coefficient(roof)
    qn = cf.q[n]
    inputs = {"x": float(x) % 1.0, "r": r, "n": n, "q_n": qn, "M": M,
              "eps": eps, "shear": S}
    if r <= eps ** 4 * qn:
        s1 = birkhoff_sum(roof, cf, x, r, 1)
        base = eps ** 2 * qn * math.log(qn)
        return _report("6.4-small", inputs, abs(s1), base, 1.0,
                       {"sum": s1, "branch": "small"})
    cf.require_index(n + 1)
    if r > M * cf.q[n + 1]:
        raise HypothesisFailed("r beyond M q_(n+1)")
    s1 = birkhoff_sum(roof, cf, x, r, 1)
    measured = abs(s1 - S * r * math.log(r))
    base = eps ** 2 * r * math.log(r)
    return _report("6.4-main", inputs, measured, base, 1.0,
                   {"sum": s1, "branch": "main",
                    "growth_ratio": s1 / (r * math.log(r))})


# ---------------------------------------------------------------------------
# f' on good time scales


def delta_alpha(cf: ContinuedFraction) -> float:
    """Uniform Ostrowski-tail constant of the rotation number.

    1 + sup over m of sum_(j<m) 2 q_(j+1) log(a_(j+1)+1) / (q_m log q_m),
    the quantity that makes the resonant decomposition valid at every r.
    """
    best = 0.0
    for m in range(2, cf.depth):
        if cf.q[m] < 3:
            continue
        tail = sum(2.0 * cf.q[j + 1] * math.log(cf.a(j + 1) + 1)
                   for j in range(1, m))
        best = max(best, tail / (cf.q[m] * math.log(cf.q[m])))
    return 1.0 + best


def verify_fprime_goodscale(roof: RoofSpec, x, T: int, r: int, n: int,
                            eps: float, cf: ContinuedFraction,
                            s: Optional[int] = None, M: float = 0.6,
                            constant: Optional[float] = None,
                            constant_short: Optional[float] = None) -> LemmaReport:
    """|f'^(r) - shear * r log q_n| <= C' T, plus the short-difference bound.

    The hitting-set parameter follows the usage, not the statement: with
    M > 1 the avoidance set is empty at every scale (the M q_(n+1)-orbit
    covers the circle more finely than the window), so fractional M with
    M q_(n+1) >= T/2 is required for a non-vacuous check.
    """
    cf.require_index(n + 1)
    if M * cf.q[n + 1] < T / 2.0:
        raise HypothesisFailed("hitting-set range must cover r < T/2")
    qn, qn1 = cf.q[n], cf.q[n + 1]
    if not qn * math.log(qn) <= T < qn1:
        raise HypothesisFailed("T outside [q_n log q_n, q_(n+1))")
    sig = sigma_membership(x, n, M, cf)
    if sig.member:
        raise HypothesisFailed("x hits the resonant window")
    B = closest_return(x, n, cf).B
    if not 0 <= r < B * T / 2.0:
        raise HypothesisFailed(f"r = {r} outside [0, B T / 2) with B = {B:.3f}")
    S = shear_coefficient(roof)
    lg = math.log(qn)
    inputs = {"x": float(x) % 1.0, "T": T, "r": r, "n": n, "B": B, "eps": eps}
    s1r = birkhoff_sum(roof, cf, x, r, 1)
    subs = [_report("6.5-canc", inputs, abs(s1r - S * r * lg), float(T),
                    constant, {"sum_r": s1r})]
    if s is not None:
        if not (0 <= s < T and abs(r - s) <= eps ** 3 * B * T):
            raise HypothesisFailed("|r - s| outside eps^3 B T")
        s1s = birkhoff_sum(roof, cf, x, s, 1)
        measured = abs(s1r - s1s - S * (r - s) * lg)
        eps_eff = math.sqrt(measured / T)
        subs.append(_report("6.5-cancshort", inputs, measured,
                            float(T), constant_short,
                            {"sum_s": s1s, "eps_eff": eps_eff,
                             "eps_input": eps}))
    return _combine("6.5", inputs, subs)


# ---------------------------------------------------------------------------
# resonant decomposition


def resonant_decomposition(roof: RoofSpec, x, r: int, cf: ContinuedFraction,
                           delta: float = 1.0,
                           constant: Optional[float] = None) -> LemmaReport:
    """Residual of f'^(r) against shear * r log q_(j_r) within the resonant budget.

    The budget is C (r + delta q_(j_r) log q_(j_r) + Res(x, r)) where
    Res is the smaller of the two closest-approach expressions; the report
    records both and which one is active.
    """
    if r > 10 ** 7:
        raise BudgetExceeded("r beyond budget")
    if r < cf.q[3]:
        raise HypothesisFailed("r below the stated q_J threshold (J = 3)")
    jr = cf.index_of_scale(r)
    qj, qj1 = cf.q[jr], cf.q[jr + 1] if jr + 1 <= cf.depth else None
    if qj1 is None:
        raise BudgetExceeded("r beyond depth")
    eng = engine_for(cf)
    dmin, _ = eng.min_dist_range(x, r)
    maxinv = 1.0 / dmin
    res1 = (r / qj) * maxinv
    res2 = maxinv + 2.0 * qj1 * math.log(r / qj) if r > qj else maxinv
    res = min(res1, res2)
    S = shear_coefficient(roof)
    s1 = birkhoff_sum(roof, cf, x, r, 1)
    main = S * r * math.log(qj)
    measured = abs(s1 - main)
    base = r + delta * qj * math.log(qj) + res
    inputs = {"x": float(x) % 1.0, "r": r, "j_r": jr, "q_jr": qj,
              "delta": delta}
    return _report("6.6", inputs, measured, base, constant,
                   {"main_term": main, "sum": s1, "res_bound_1": res1,
                    "res_bound_2": res2, "res_active": "1" if res1 <= res2 else "2",
                    "max_inv_dist": maxinv})


# ---------------------------------------------------------------------------
# higher derivatives (three related estimates)


def verify_higher_derivatives(roof: RoofSpec, x, n: int,
                              cf: ContinuedFraction,
                              k: Optional[int] = None,
                              w: Optional[int] = None,
                              eps: float = 0.3,
                              c_hyp: float = 0.3,
                              n0_index: Optional[int] = None,
                              constants: Optional[dict] = None) -> LemmaReport:
    """Block estimates for f'', f''', f'''' along k q_n orbits.

    Sub-reports: "6.7" (B large: additive bound C' k q_n^j), "6.8"
    (B < c_hyp: two-sided multiplicative bound), "6.9" (|f''^(w)| against
    D (w/q_n) f''(x + i alpha)).  Hypotheses that do not apply are skipped,
    not failed; at least one must apply.
    """
    cf.require_index(n + 1)
    qn, qn1 = cf.q[n], cf.q[n + 1]
    cr = closest_return(x, n, cf)
    B = cr.B
    eng = engine_for(cf)
    hit = eng.position(x, cr.i)
    consts = constants or {}
    subs = []
    inputs = {"x": float(x) % 1.0, "n": n, "q_n": qn, "B": B,
              "k": k, "w": w, "eps": eps, "c_hyp": c_hyp}

    if k is not None and B >= eps ** 0.2:
        kmax = B ** 5 * qn1 / (6.0 * qn)
        if 1 <= k <= kmax:
            for order in (2, 3, 4):
                sj = birkhoff_sum(roof, cf, x, k * qn, order)
                fj = float(roof.eval(hit, order))
                subs.append(_report(f"6.7-f{order}", inputs,
                                    abs(sj - k * fj), k * float(qn) ** order,
                                    consts.get("c67"),
                                    {"sum": sj, "f_at_hit": fj}))
    if k is not None and B < c_hyp:
        kmax = B * qn1 / (6.0 * qn)
        if 1 <= k <= kmax:
            for order in (2, 3, 4):
                sj = birkhoff_sum(roof, cf, x, k * qn, order)
                fj = abs(float(roof.eval(hit, order)))
                ratio = abs(sj) / (k * fj)
                lo, hi = consts.get("c68_lo"), consts.get("c68_hi")
                if lo is None or hi is None:
                    subs.append(LemmaReport(
                        f"6.8-f{order}", inputs, ratio, math.nan, math.nan,
                        None, None, {"ratio": ratio, "base": 1.0}))
                else:
                    ok = lo <= ratio <= hi
                    margin = min(ratio - lo, hi - ratio)
                    subs.append(LemmaReport(
                        f"6.8-f{order}", inputs, ratio, hi, margin, ok, hi,
                        {"lower": lo, "ratio": ratio, "base": 1.0}))
    if w is not None:
        n0 = n0_index if n0_index is not None else next(
            i for i in range(cf.depth + 1) if cf.q[i] >= 32)
        wmax = max(B * qn1 / 4.0 - qn, 0.0)
        if cf.q[n0] <= w <= wmax:
            s2 = birkhoff_sum(roof, cf, x, w, 2)
            f2 = float(roof.eval(hit, 2))
            subs.append(_report("6.9", inputs, abs(s2),
                                (w / qn) * f2, consts.get("c69"),
                                {"sum": s2, "f2_at_hit": f2, "n0": n0}))
    if not subs:
        raise HypothesisFailed("no sub-estimate applicable to this instance")
    return _combine("6.7-9", inputs, subs)
