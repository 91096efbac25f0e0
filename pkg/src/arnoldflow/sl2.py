"""Exact 2x2 identities: flow generators, the renormalization equation,
the local-coordinate decomposition and the quadratic drift polynomial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DecompositionFailed

__all__ = ["Mat2", "h_mat", "g_mat", "v_mat", "U_GEN", "V_GEN", "X_GEN",
           "renorm_residual", "local_coords", "chi_eval",
           "product_identity_residual", "drift_quadratic_check"]


@dataclass(frozen=True)
class Mat2:
    a: float
    b: float
    c: float
    d: float

    def __matmul__(self, o: "Mat2") -> "Mat2":
        return Mat2(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                    self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d)

    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def inv(self) -> "Mat2":
        dt = self.det()
        return Mat2(self.d / dt, -self.b / dt, -self.c / dt, self.a / dt)

    def sub(self, o: "Mat2") -> "Mat2":
        return Mat2(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)

    def max_norm(self) -> float:
        return max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])


def h_mat(t: float) -> Mat2:
    """Horocycle element [[1, t], [0, 1]]."""
    return Mat2(1.0, t, 0.0, 1.0)


def g_mat(s: float) -> Mat2:
    """Geodesic element diag(e^s, e^-s)."""
    return Mat2(math.exp(s), 0.0, 0.0, math.exp(-s))


def v_mat(r: float) -> Mat2:
    """Opposite horocycle element [[1, 0], [r, 1]]."""
    return Mat2(1.0, 0.0, r, 1.0)


U_GEN = Mat2(0.0, 1.0, 0.0, 0.0)
V_GEN = Mat2(0.0, 0.0, 1.0, 0.0)
X_GEN = Mat2(1.0, 0.0, 0.0, -1.0)


def renorm_residual(t: float, s: float) -> float:
    """Max-norm residual of h_t g_s = g_s h_(e^(-2s) t)."""
    lhs = h_mat(t) @ g_mat(s)
    rhs = g_mat(s) @ h_mat(math.exp(-2.0 * s) * t)
    return lhs.sub(rhs).max_norm()


def local_coords(X: Mat2, Y: Mat2):
    """(v_bar, s, r) with X Y^-1 = h_(v_bar) [[e^s, 0], [r, e^-s]].

    Solvable exactly from the entries whenever the lower-right entry of
    X Y^-1 is positive; returns the residual of the reconstitution too.
    """
    m = X @ Y.inv()
    if m.d <= 0.0:
        raise DecompositionFailed("lower-right entry must be positive")
    s = -math.log(m.d)
    r = m.c
    v_bar = m.b / m.d
    recon = h_mat(v_bar) @ Mat2(math.exp(s), 0.0, r, math.exp(-s))
    resid = m.sub(recon).max_norm()
    return v_bar, s, r, resid


def chi_eval(s: float, r: float, t: float) -> float:
    """Quadratic drift polynomial e^(-2s) t - e^(-3s) r t^2."""
    return math.exp(-2.0 * s) * t - math.exp(-3.0 * s) * r * t * t


def product_identity_residual(X: Mat2, Y: Mat2, T: float) -> float:
    """Relative residual of the exact splitting identity at time T.

    h_T (X Y^-1) h_(-chi(T)) = h_(v_bar) [[e^s + rT, v], [r, e^-s - r chi(T)]]
    with v = e^(-3s) r^2 T^3.
    """
    v_bar, s, r, _ = local_coords(X, Y)
    chi = chi_eval(s, r, T)
    lhs = h_mat(T) @ (X @ Y.inv()) @ h_mat(-chi)
    es = math.exp(s)
    v_small = math.exp(-3.0 * s) * r * r * T ** 3
    rhs = h_mat(v_bar) @ Mat2(es + r * T, v_small, r, 1.0 / es - r * chi)
    scale = max(lhs.max_norm(), 1.0)
    return lhs.sub(rhs).max_norm() / scale


def drift_quadratic_check(s: float, r: float, T_grid) -> dict:
    """Tabulate chi(T) - T, locate the first |chi(T) - T| >= shift = 1,
    and confirm the closed-form quadratic coefficient."""
    T_grid = np.asarray(T_grid, dtype=np.float64)
    chi = np.exp(-2.0 * s) * T_grid - np.exp(-3.0 * s) * r * T_grid ** 2
    drift = chi - T_grid
    first = None
    hits = np.nonzero(np.abs(drift) >= 1.0)[0]
    if hits.size:
        first = float(T_grid[hits[0]])
    if r != 0.0:
        coeff = (chi - np.exp(-2.0 * s) * T_grid) / np.where(
            T_grid != 0.0, T_grid ** 2, 1.0)
        coeff_err = float(np.max(np.abs(coeff + math.exp(-3.0 * s) * r)))
    else:
        coeff_err = float(np.max(np.abs(chi - np.exp(-2.0 * s) * T_grid)))
    closed_form_first = math.sqrt(1.0 / abs(r)) * math.exp(1.5 * s) if r else None
    return {"drift": drift, "first_unit_shift_T": first,
            "closed_form_first_T": closed_form_first,
            "quadratic_coeff_error": coeff_err}
