"""Dense linear-algebra kernels used throughout the package.

All routines work in float64. A matrix is declared rank deficient when
``sigma_min / sigma_max < RANK_TOL``. Gram matrices ``B B^T`` are never
inverted explicitly here: the distance path goes through a Cholesky solve.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

__all__ = [
    "RANK_TOL",
    "RankDeficiencyError",
    "DegeneracyError",
    "SvdResult",
    "ProjectionReport",
    "as_matrix",
    "svd",
    "singular_values",
    "rank_ratio",
    "distance_to_rowspace",
    "least_singular_value",
    "trace_inverse_gram",
    "hs_norm",
    "op_norm",
    "projector_onto_complement",
    "rel_err",
]

RANK_TOL = 1e-10


class RankDeficiencyError(np.linalg.LinAlgError):
    """Raised when a matrix that must have full row rank does not (within RANK_TOL)."""

    def __init__(self, message, ratio=None):
        super().__init__(message)
        self.ratio = ratio


class DegeneracyError(ArithmeticError):
    """A denominator in an exact formula fell below its degeneracy threshold."""

    def __init__(self, quantity, value, threshold):
        super().__init__(f"degenerate {quantity}: {value!r} below threshold {threshold!r}")
        self.quantity = quantity
        self.value = value
        self.threshold = threshold


@dataclass
class SvdResult:
    singular_values: np.ndarray
    left: np.ndarray
    right: np.ndarray  # rows are right singular vectors (numpy's Vt)

    def reconstruct(self):
        return (self.left * self.singular_values) @ self.right


@dataclass
class ProjectionReport:
    projector: np.ndarray
    codimension: int
    rank_tolerance: float
    idempotence_error: float
    trace: float


def rel_err(value, reference):
    """|value - reference| / max(1, |reference|), elementwise max for arrays."""
    value = np.asarray(value, dtype=float)
    reference = np.asarray(reference, dtype=float)
    scale = max(1.0, float(np.max(np.abs(reference))) if reference.size else 1.0)
    return float(np.max(np.abs(value - reference))) / scale if reference.size else 0.0


def as_matrix(a, name="matrix"):
    a = np.asarray(getattr(a, "entries", a), dtype=float)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def svd(matrix):
    a = as_matrix(matrix)
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    return SvdResult(s, u, vt)


def singular_values(matrix):
    """Descending singular values (no vectors)."""
    return np.linalg.svd(as_matrix(matrix), compute_uv=False)


def rank_ratio(matrix):
    """sigma_min / sigma_max over the min(rows, cols) singular values; 0 for the zero matrix."""
    s = singular_values(matrix)
    if s.size == 0 or s[0] == 0.0:
        return 0.0
    return float(s[-1] / s[0])


def _require_full_row_rank(B, what="B"):
    if B.shape[0] > B.shape[1]:
        raise RankDeficiencyError(f"{what} has more rows ({B.shape[0]}) than columns ({B.shape[1]})", 0.0)
    ratio = rank_ratio(B)
    if ratio < RANK_TOL:
        raise RankDeficiencyError(f"{what} is rank deficient: sigma_min/sigma_max = {ratio:.3e}", ratio)
    return ratio


def _gram_factor(B):
    try:
        return sla.cho_factor(B @ B.T, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise RankDeficiencyError("Gram matrix B B^T is not positive definite") from exc


def _distance_gram(x, B):
    cf = _gram_factor(B)
    coef = sla.cho_solve(cf, B @ x, check_finite=False)
    return float(np.linalg.norm(x - B.T @ coef))


def _rowspace_basis(B):
    """Orthonormal basis (columns) of the row space of B via pivoted QR, rank-truncated."""
    q, r, _ = sla.qr(B.T, mode="economic", pivoting=True)
    d = np.abs(np.diag(r))
    if d.size == 0 or d[0] == 0.0:
        return q[:, :0]
    rank = int(np.sum(d > RANK_TOL * d[0]))
    return q[:, :rank]


def _distance_qr(x, B):
    q = _rowspace_basis(B)
    return float(np.linalg.norm(x - q @ (q.T @ x)))


def distance_to_rowspace(x, B, method="gram", check_rank=True, rtol=1e-8):
    """Euclidean distance from ``x`` to the span of the rows of ``B``.

    ``method="gram"`` evaluates ``sqrt(x (I - B^T (B B^T)^{-1} B) x^T)`` with a
    Cholesky solve and requires full row rank. ``method="qr"`` projects onto a
    rank-revealing orthonormal basis and tolerates rank deficiency.
    ``method="both"`` computes the two, raises ``ArithmeticError`` if they
    differ by more than ``rtol * max(1, d_qr)``, and returns the Gram value.
    """
    x = np.asarray(x, dtype=float).ravel()
    B = as_matrix(B, "B")
    if B.shape[1] != x.size:
        raise ValueError(f"x has length {x.size} but B has {B.shape[1]} columns")
    if method == "qr":
        return _distance_qr(x, B)
    if method not in ("gram", "both"):
        raise ValueError(f"unknown method {method!r}")
    if check_rank:
        _require_full_row_rank(B)
    d_gram = _distance_gram(x, B)
    if method == "both":
        d_qr = _distance_qr(x, B)
        if abs(d_gram - d_qr) > rtol * max(1.0, d_qr):
            raise ArithmeticError(f"Gram ({d_gram!r}) and QR ({d_qr!r}) distances disagree")
    return d_gram


def least_singular_value(matrix):
    return float(singular_values(matrix)[-1])


def trace_inverse_gram(P, verify=True, rtol=1e-8):
    """tr((P P^T)^{-1}) = sum_i sigma_i(P)^{-2}.

    With ``verify`` the result is cross-checked against
    ``||(P P^T)^{-1} P||_HS^2`` computed by a Cholesky solve.
    """
    P = as_matrix(P, "P")
    s = singular_values(P)
    if P.shape[0] > P.shape[1] or s[0] == 0.0 or s[-1] / s[0] < RANK_TOL:
        raise RankDeficiencyError("P P^T is singular")
    tr = float(np.sum(s ** -2.0))
    if verify:
        X = sla.cho_solve(_gram_factor(P), P, check_finite=False)
        hs2 = float(np.sum(X * X))
        if abs(hs2 - tr) > rtol * max(1.0, abs(tr)):
            raise ArithmeticError(f"||(PP^T)^-1 P||_HS^2 = {hs2!r} differs from tr((PP^T)^-1) = {tr!r}")
    return tr


def hs_norm(matrix):
    return float(np.linalg.norm(as_matrix(matrix), "fro"))


def op_norm(matrix):
    a = as_matrix(matrix)
    if a.size == 0:
        return 0.0
    return float(singular_values(a)[0])


def projector_onto_complement(B):
    """I - B^T (B B^T)^{-1} B together with its idempotence error and trace."""
    B = as_matrix(B, "B")
    _require_full_row_rank(B)
    cf = _gram_factor(B)
    proj = np.eye(B.shape[1]) - B.T @ sla.cho_solve(cf, B, check_finite=False)
    proj = 0.5 * (proj + proj.T)
    idem = float(np.linalg.norm(proj @ proj - proj, "fro"))
    return ProjectionReport(proj, B.shape[1] - B.shape[0], RANK_TOL, idem, float(np.trace(proj)))
