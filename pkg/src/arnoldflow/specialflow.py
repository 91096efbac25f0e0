"""Special-flow dynamics over the rotation: state evolution and flow laws.

The flow moves vertically under the roof at unit speed; on reaching the
roof it jumps to the rotated base point at height zero.  hit_count solves
f^(n)(x) <= s + t < f^(n+1)(x) for the unique n; evolve applies it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .contfrac import ContinuedFraction
from .errors import BudgetExceeded, HypothesisFailed, SingularOrbit
from .orbit import engine_for
from .birkhoff import GUARD, LemmaReport, _report, birkhoff_sum
from .roof import RoofSpec
from .summation import Neumaier, compensated_cumsum

__all__ = ["FlowPoint", "hit_count", "hit_count_detailed", "evolve",
           "verify_rescaling", "verify_hit_linearity", "flow_samples"]

_TIE_TOL = 1e-9
_STEP_BUDGET = 10 ** 8


@dataclass(frozen=True)
class FlowPoint:
    """State (z, r) with 0 <= r < f(z)."""

    z: float
    r: float

    def validate(self, roof) -> "FlowPoint":
        if not 0.0 <= self.r < float(roof.eval(self.z)):
            raise ValueError(f"height {self.r} outside [0, f(z))")
        return self


def _roof_at(roof, eng, x, j: int) -> float:
    pos = eng.position(x, j)
    if min(pos, 1.0 - pos) < GUARD:
        raise SingularOrbit(f"orbit point {j} within guard distance")
    return float(roof.eval(pos))


def hit_count_detailed(roof, cf: ContinuedFraction, x, s: float, t: float,
                       estimate: bool = True):
    """(n, ambiguous) with f^(n)(x) <= s + t < f^(n+1)(x).

    estimate=True seeds the search at (s+t)/integral and corrects locally
    (monotonicity of the partial sums); estimate=False steps incrementally
    from 0 and is the oracle path.  Boundary ties within tolerance pick
    the smaller n and set the flag.
    """
    eng = engine_for(cf)
    target = s + t
    tol = _TIE_TOL * (1.0 + abs(target))
    if estimate:
        n = int(target / roof.integral())
        sum_n = birkhoff_sum(roof, cf, x, n)
        steps = 0
        while sum_n > target + tol:
            n -= 1
            sum_n -= _roof_at(roof, eng, x, n)
            steps += 1
            if steps > _STEP_BUDGET:
                raise BudgetExceeded("hit_count correction runaway")
        while True:
            nxt = sum_n + _roof_at(roof, eng, x, n)
            if nxt > target + tol:
                break
            if nxt > target - tol:
                return n, True  # boundary tie: keep the smaller n
            sum_n = nxt
            n += 1
            steps += 1
            if steps > _STEP_BUDGET:
                raise BudgetExceeded("hit_count correction runaway")
        return n, abs(sum_n - target) <= tol
    # incremental oracle
    acc = Neumaier()
    n = 0
    if target >= 0:
        while True:
            nxt = acc.value + _roof_at(roof, eng, x, n)
            if nxt > target + tol:
                return n, abs(acc.value - target) <= tol
            if nxt > target - tol:
                return n, True
            acc.add(_roof_at(roof, eng, x, n))
            n += 1
            if n > _STEP_BUDGET:
                raise BudgetExceeded("hit_count stepping runaway")
    while acc.value > target + tol:
        n -= 1
        acc.add(-_roof_at(roof, eng, x, n))
        if -n > _STEP_BUDGET:
            raise BudgetExceeded("hit_count stepping runaway")
    return n, abs(acc.value - target) <= tol


def hit_count(roof, cf: ContinuedFraction, x, s: float, t: float,
              estimate: bool = True) -> int:
    return hit_count_detailed(roof, cf, x, s, t, estimate)[0]


def evolve(roof, cf: ContinuedFraction, p: FlowPoint, t: float,
           estimate: bool = True) -> FlowPoint:
    """Flow the point for time t (either sign)."""
    n, _ = hit_count_detailed(roof, cf, p.z, p.r, t, estimate)
    eng = engine_for(cf)
    z_new = eng.position(p.z, n)
    r_new = p.r + t - birkhoff_sum(roof, cf, p.z, n)
    f_new = float(roof.eval(z_new))
    r_new = min(max(r_new, 0.0), math.nextafter(f_new, 0.0))
    return FlowPoint(z_new, r_new)


def verify_rescaling(roof: RoofSpec, cf: ContinuedFraction, r_scale: float,
                     p: FlowPoint, t: float) -> LemmaReport:
    """Conjugacy between time rescaling and roof rescaling.

    (x, s) -> (x, r_scale * s) intertwines the roof-f flow at time
    t / r_scale with the roof-(r_scale f) flow at time t.
    """
    if r_scale <= 0:
        raise ValueError("scale must be positive")
    scaled = roof.scaled(r_scale)
    a = evolve(roof, cf, p, t / r_scale)
    mapped = FlowPoint(a.z, a.r * r_scale)
    b = evolve(scaled, cf, FlowPoint(p.z, p.r * r_scale), t)
    resid = abs(mapped.z - b.z) + abs(mapped.r - b.r)
    inputs = {"r_scale": r_scale, "z": p.z, "r": p.r, "t": t}
    return _report("rescaling", inputs, resid, 1.0, 1e-8,
                   {"left": (mapped.z, mapped.r), "right": (b.z, b.r)})


def verify_hit_linearity(roof: RoofSpec, cf: ContinuedFraction, p: FlowPoint,
                         t: float, constant: Optional[float] = None) -> LemmaReport:
    """|n(x, s, t) * integral(f) - t| < C t^(1/3) (the linear hit-rate law)."""
    if abs(t) < 8.0:
        raise HypothesisFailed("t below the report threshold (need |t| >= 8)")
    n, _ = hit_count_detailed(roof, cf, p.z, p.r, t)
    measured = abs(n * roof.integral() - t)
    inputs = {"z": p.z, "s": p.r, "t": t, "n": n}
    return _report("hit-linearity", inputs, measured, abs(t) ** (1.0 / 3.0),
                   constant)


def flow_samples(roof, cf: ContinuedFraction, p: FlowPoint, t0: float,
                 N: int):
    """(z_k, r_k) for T_{k t0}(p), k = 1..N, via one cumulative roof sweep."""
    if t0 <= 0:
        raise ValueError("t0 must be positive")
    total = N * t0 + p.r
    m_max = int(total / roof.integral() * 1.3) + 64
    if m_max > _STEP_BUDGET:
        raise BudgetExceeded("flow sampling sweep too long")
    eng = engine_for(cf)
    pos = np.concatenate([
        eng.positions(p.z, start, min(1 << 20, m_max - start))
        for start in range(0, m_max, 1 << 20)])
    d = np.minimum(pos, 1.0 - pos)
    if float(d.min()) < GUARD:
        raise SingularOrbit("orbit hits the singularity guard during sweep")
    vals = roof.eval(pos, 0)
    cum = np.concatenate([[0.0], compensated_cumsum(vals)])  # cum[m] = f^(m)
    targets = p.r + t0 * np.arange(1, N + 1)
    if targets[-1] >= cum[-1]:
        raise BudgetExceeded("sweep shorter than requested sampling horizon")
    ns = np.searchsorted(cum, targets, side="right") - 1
    z = pos[ns]
    r = targets - cum[ns]
    return z, r, ns
