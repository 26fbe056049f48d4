"""Spectral statistics of Wigner matrices and their row-truncations.

The singular values of a Wigner matrix are the moduli of its eigenvalues, so
after dividing by sqrt(N) they follow the semicircle law folded onto [0, 2]:

    rho(x) = (1/pi) sqrt(4 - x^2),   0 <= x <= 2,

which integrates to one.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .linalg import as_matrix, singular_values, trace_inverse_gram

__all__ = [
    "BULK_EDGE",
    "IntervalCount",
    "InterlacingResult",
    "quarter_circle_density",
    "quarter_circle_mass",
    "count_singular_values",
    "interlacing_check",
    "trace_inverse_ratio",
    "interval_counts_csv",
]

# interval checks stay inside [0, 2 - 0.2]
BULK_EDGE = 2.0 - 0.2


@dataclass
class IntervalCount:
    lo: float
    hi: float
    observed: int
    predicted: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def relative_deviation(self):
        return abs(self.observed - self.predicted) / self.predicted if self.predicted > 0 else np.inf

    def csv_row(self):
        return f"{self.lo!r},{self.hi!r},{self.observed},{self.predicted!r}"


@dataclass
class InterlacingResult:
    ok: bool
    max_violation: float
    tolerance: float


def quarter_circle_density(x):
    x = np.asarray(x, dtype=float)
    inside = (x >= 0.0) & (x <= 2.0)
    return np.where(inside, np.sqrt(np.clip(4.0 - x * x, 0.0, None)) / np.pi, 0.0)


def quarter_circle_mass(lo, hi):
    """Integral of the folded semicircle density over [lo, hi] (adaptive quadrature)."""
    a, b = max(float(lo), 0.0), min(float(hi), 2.0)
    if a >= b:
        return 0.0
    val, _ = integrate.quad(lambda t: np.sqrt(4.0 - t * t) / np.pi, a, b, epsabs=1e-10, epsrel=1e-12)
    return float(val)


def count_singular_values(sample, lo, hi, normalization="by-sqrt-N", values=None):
    """Number of singular values in [lo, hi] and the quarter-circle prediction.

    ``normalization="by-sqrt-N"`` divides the singular values by sqrt(N),
    N the number of rows; ``"raw"`` counts them as they are and converts the
    interval for the prediction. ``values`` may pass precomputed singular values.
    """
    if normalization not in ("raw", "by-sqrt-N"):
        raise ValueError(f"unknown normalization {normalization!r}")
    a = as_matrix(sample)
    if a.size == 0:
        raise ValueError("empty matrix")
    s = singular_values(a) if values is None else np.asarray(values, dtype=float)
    N = a.shape[0]
    scale = np.sqrt(N)
    if normalization == "by-sqrt-N":
        s = s / scale
        lo_n, hi_n = lo, hi
    else:
        lo_n, hi_n = lo / scale, hi / scale
    observed = int(np.count_nonzero((s >= lo) & (s <= hi)))
    predicted = s.size * quarter_circle_mass(lo_n, hi_n)
    return IntervalCount(float(lo), float(hi), observed, predicted)


def interlacing_check(sample, removed_row_index, rtol=1e-8):
    """Check sigma_i(A) >= sigma_i(A') >= sigma_{i+1}(A) when A' drops one row of A."""
    a = as_matrix(sample)
    if a.shape[0] < 2:
        raise ValueError("need at least two rows")
    if not 0 <= removed_row_index < a.shape[0]:
        raise IndexError(f"row {removed_row_index} outside [0, {a.shape[0]})")
    s = singular_values(a)
    s2 = singular_values(np.delete(a, removed_row_index, axis=0))
    k = s2.size
    upper = s[:k]
    lower = np.concatenate([s, [0.0]])[1:k + 1]
    violation = float(max(np.max(s2 - upper, initial=0.0), np.max(lower - s2, initial=0.0)))
    tol = float(rtol * (s[0] if s.size else 0.0))
    return InterlacingResult(bool(violation <= tol), violation, tol)


def trace_inverse_ratio(P):
    """m * tr((P P^T)^{-1}) / N for an n x N matrix P with m = N - n >= 1."""
    P = as_matrix(P, "P")
    n, N = P.shape
    m = N - n
    if m < 1:
        raise ValueError(f"need more columns than rows (m = N - n >= 1), got {n}x{N}")
    return m * trace_inverse_gram(P, verify=False) / N


def interval_counts_csv(counts):
    lines = ["lo,hi,observed,predicted"] + [c.csv_row() for c in counts]
    return "\n".join(lines) + "\n"
