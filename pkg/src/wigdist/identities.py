"""Exact algebraic identities behind the distance decomposition.

Each function evaluates a closed-form expression the way it is written
(rank-one inverse updates, Schur block inverses, the truncated-row distance
split, the diagonal-entry formula for ``(P P^T)^{-1} P`` and the trace
comparison between ``P`` and its minor ``R``). :func:`verify_instance` checks
every one of them against a direct computation on a single symmetric matrix.

Index conventions are 0-based. ``P`` is an ``n x L`` matrix with ``n <= L``;
row ``k`` and column ``k`` are removed together, as in the text.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg as sla

from .linalg import (
    RANK_TOL,
    DegeneracyError,
    RankDeficiencyError,
    as_matrix,
    distance_to_rowspace,
    rel_err,
    singular_values,
)

__all__ = [
    "DEGENERACY_TOL",
    "DistanceDecomposition",
    "DiagonalEntryBreakdown",
    "TraceComparison",
    "ErrorTerms",
    "gram_inverse",
    "rank_one_inverse_update",
    "schur_block_inverse",
    "qq_inverse_via_schur",
    "decompose_distance",
    "diagonal_entry_formula",
    "trace_comparison",
    "error_term_magnitudes",
    "move_to_front",
    "verify_instance",
]

DEGENERACY_TOL = 1e-8


@dataclass
class DistanceDecomposition:
    truncated_term: float
    error_numerator: float
    error_denominator: float
    total: float

    @property
    def error_term(self):
        return self.error_numerator ** 2 / self.error_denominator

    def to_dict(self):
        return asdict(self)


@dataclass
class DiagonalEntryBreakdown:
    d_squared: float
    a_coef: float
    numerator: float
    denominator: float
    value: float
    # 1 + c^T (R R^T)^{-1} c, with c the truncated first column
    column_quadratic: float

    def to_dict(self):
        return asdict(self)


@dataclass
class TraceComparison:
    T: float
    T_R: float
    correction: float
    first_entry: float
    E1: float
    E2: float
    E3: float
    E4: float
    identity_residual: float
    # max |D (M1' + M2) - (R R^T)^{-1} (Sigma_1 + Sigma_2)| / max(1, |.|)
    aggregate_residual: float

    @property
    def e_sum(self):
        return self.E1 + self.E2 + self.E3 + self.E4

    def to_dict(self):
        return asdict(self)


@dataclass
class ErrorTerms:
    E1: float
    E2: float
    E3: float
    E4: float
    T: float
    T_R: float
    N: int
    m: int

    @property
    def scaled_gap(self):
        """|T - T_R| * m / sqrt(N)."""
        return abs(self.T - self.T_R) * self.m / np.sqrt(self.N)


def _check_scale(quantity, value, scale):
    threshold = DEGENERACY_TOL * max(1.0, scale)
    if not value > threshold:
        raise DegeneracyError(quantity, float(value), threshold)


def gram_inverse(M):
    """Explicit (M M^T)^{-1} through a Cholesky factorization."""
    M = np.asarray(M, dtype=float)
    if M.shape[0] == 0:
        return np.zeros((0, 0))
    s = singular_values(M)
    if M.shape[0] > M.shape[1] or s[0] == 0.0 or s[-1] / s[0] < RANK_TOL:
        raise RankDeficiencyError(f"Gram matrix of a {M.shape[0]}x{M.shape[1]} block is singular")
    G = sla.cho_solve(sla.cho_factor(M @ M.T, lower=True), np.eye(M.shape[0]))
    return 0.5 * (G + G.T)


def _inverse(X, what):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    s = singular_values(X)
    if s[0] == 0.0 or s[-1] / s[0] < RANK_TOL:
        raise DegeneracyError(f"block {what}", float(s[-1]), RANK_TOL * float(s[0]))
    return np.linalg.inv(X)


def rank_one_inverse_update(G_inv, z):
    """(G + z z^T)^{-1} from G^{-1}: G^{-1} - G^{-1} z z^T G^{-1} / (1 + z^T G^{-1} z)."""
    G_inv = np.atleast_2d(np.asarray(G_inv, dtype=float))
    z = np.asarray(z, dtype=float).ravel()
    if G_inv.shape != (z.size, z.size):
        raise ValueError(f"shape mismatch: G_inv {G_inv.shape}, z {z.shape}")
    if rel_err(G_inv, G_inv.T) > 1e-10:
        raise ValueError("G_inv must be symmetric")
    u = G_inv @ z
    denom = 1.0 + z @ u
    if not abs(denom) > 1e-12:
        raise DegeneracyError("1 + z^T G^{-1} z", float(denom), 1e-12)
    return G_inv - np.outer(u, u) / denom


def schur_block_inverse(X, Y, Z):
    """Inverse of [[X, Y], [Y^T, Z]] assembled block by block from Schur complements."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    Y = np.asarray(Y, dtype=float).reshape(X.shape[0], Z.shape[0])
    Xi = _inverse(X, "X")
    Zi = _inverse(Z, "Z")
    top_left = _inverse(X - Y @ Zi @ Y.T, "X - Y Z^-1 Y^T")
    bottom_right = _inverse(Z - Y.T @ Xi @ Y, "Z - Y^T X^-1 Y")
    top_right = -Xi @ Y @ bottom_right
    return np.block([[top_left, top_right], [top_right.T, bottom_right]])


def _d_squared(y, R, G):
    g = G @ (R @ y)
    x2 = float(y @ y)
    # |y - R^T g|^2 equals y.y - (Ry).g but avoids the cancellation when y is close to the row space
    r = y - R.T @ g
    d2 = float(r @ r)
    _check_scale("d^2 (distance of y to the row space of R)", d2, x2)
    return d2, g


def qq_inverse_via_schur(y, R):
    """(Q Q^T)^{-1} for Q = [y; R] from the four-block formula in d^2 = dist^2(y, rows of R)."""
    y = np.asarray(y, dtype=float).ravel()
    R = np.asarray(R, dtype=float).reshape(-1, y.size)
    G = gram_inverse(R)
    d2, g = _d_squared(y, R, G)
    top = np.concatenate([[1.0 / d2], -g / d2])
    bottom = np.hstack([-g[:, None] / d2, G + np.outer(g, g) / d2])
    return np.vstack([top, bottom])


def decompose_distance(A, n):
    """Split dist^2(row_0, span(rows 1..n)) into the truncated term plus the error ratio.

    ``A`` is an N x N matrix (or MatrixSample). With x the first row, B rows
    1..n, z = B[:, 0], P = B[:, 1:] and x1 = x[1:]::

        dist^2 = x1 (I - P^T (P P^T)^{-1} P) x1^T
                 + (a_00 - z^T (P P^T)^{-1} P x1^T)^2 / (1 + z^T (P P^T)^{-1} z)
    """
    A = as_matrix(A, "A")
    N = A.shape[1]
    if not 1 <= n <= N - 1 or A.shape[0] < n + 1:
        raise ValueError(f"need 1 <= n <= N - 1 and at least n + 1 rows; got n={n}, shape={A.shape}")
    x = A[0]
    B = A[1:n + 1]
    z = B[:, 0]
    P = B[:, 1:]
    x1 = x[1:]
    K = gram_inverse(P)
    v = P @ x1
    truncated = float(x1 @ x1 - v @ K @ v)
    numerator = float(x[0] - z @ K @ v)
    denominator = float(1.0 + z @ K @ z)
    total = truncated + numerator ** 2 / denominator
    return DistanceDecomposition(truncated, numerator, denominator, total)


def move_to_front(P, k):
    """Permute row k and column k of P to position 0, keeping the others in order."""
    P = np.asarray(P, dtype=float)
    n, L = P.shape
    if not 0 <= k < n:
        raise IndexError(f"index {k} outside [0, {n})")
    perm = [k] + [i for i in range(n) if i != k]
    cols = perm + list(range(n, L))
    return P[np.ix_(perm, cols)]


def _split(P):
    return P[0, 0], P[0, 1:], P[1:, 0], P[1:, 1:]


def diagonal_entry_formula(P, i=0):
    """((P P^T)^{-1} P)_{ii} through the ratio numerator / D_i.

    After moving row/column i to the front, write P = [[x0, y], [c, R]].
    Then numerator = x0 - y R^T (R R^T)^{-1} c, d^2 = dist^2(y, rows of R),
    D_i = d^2 (1 + c^T (R R^T)^{-1} c) + numerator^2.
    """
    P = as_matrix(P, "P")
    if P.shape[0] > P.shape[1]:
        raise RankDeficiencyError("P has more rows than columns")
    x0, y, c, R = _split(move_to_front(P, i))
    G = gram_inverse(R)
    d2, g = _d_squared(y, R, G)
    numerator = float(x0 - g @ c)
    col_quad = float(1.0 + c @ G @ c)
    denominator = d2 * col_quad + numerator ** 2
    _check_scale("D_i", denominator, d2)
    return DiagonalEntryBreakdown(d2, numerator / d2, numerator, denominator, numerator / denominator, col_quad)


def _diag_sum(M):
    return float(np.trace(M)) if M.size else 0.0


def trace_comparison(P, k=0):
    """Compare T = sum_i ((P P^T)^{-1} P)_ii with the same sum for the minor R.

    Row/column k is moved to the front and P = [[x0, y], [z, R]]. The
    correction sum_i (M1' + M2)_ii is built from the explicit matrices

        M1' = d^-2 (RR^T)^-1 R y^T y (I - R^T (RR^T)^-1 R)
        M2  = (1/D) [a^2 (RR^T)^-1 R y^T y (R^T (RR^T)^-1 R - I) + a (RR^T)^-1 z y
                     + (RR^T)^-1 z z^T (RR^T)^-1 R - a (RR^T)^-1 (R y^T z^T + z y R^T)(RR^T)^-1 R]

    with a = d^-2 (x0 - y R^T (RR^T)^-1 z) and D = 1 + z^T (RR^T)^-1 z + d^2 a^2.
    """
    P = as_matrix(P, "P")
    n, L = P.shape
    if n < 2:
        raise ValueError("trace comparison needs at least two rows")
    if n > L:
        raise RankDeficiencyError("P has more rows than columns")
    Pk = move_to_front(P, k)
    x0, y, z, R = _split(Pk)

    K = gram_inverse(Pk)
    X = K @ Pk
    T = _diag_sum(X)
    first = float(X[0, 0])

    G = gram_inverse(R)
    T_R = _diag_sum(G @ R)
    d2, g = _d_squared(y, R, G)
    s = float(g @ z)
    a = (x0 - s) / d2
    Gz = G @ z
    zGz = float(z @ Gz)
    D = 1.0 + zGz + d2 * a * a

    proj = np.eye(L - 1) - R.T @ G @ R
    y_perp = y @ proj
    GzR = Gz @ R
    gR = g @ R

    M1p = np.outer(g, y_perp) / d2
    M2 = (-a * a * np.outer(g, y_perp) + a * np.outer(Gz, y) + np.outer(Gz, GzR)
          - a * np.outer(g, GzR) - a * np.outer(Gz, gR)) / D
    correction = _diag_sum(M1p + M2)

    sigma1 = np.outer((x0 - s) * z + (1.0 + zGz) * (R @ y), y_perp) / d2
    sigma2 = np.outer(float(y_perp @ y) * z - (x0 - s) * (R @ y), z @ G @ R) / d2
    aggregate = rel_err(D * (M1p + M2), G @ (sigma1 + sigma2))

    common = 1.0 / (d2 * D)
    E1 = common * abs(x0 - s) * abs(_diag_sum(np.outer(Gz, y_perp)))
    E2 = common * (1.0 + zGz) * abs(_diag_sum(np.outer(g, y_perp)))
    E3 = common * float(y_perp @ y) * abs(_diag_sum(np.outer(Gz, GzR)))
    E4 = common * abs(x0 - s) * abs(_diag_sum(np.outer(g, GzR)))

    residual = abs((T - first) - (T_R - correction))
    return TraceComparison(T, T_R, correction, first, E1, E2, E3, E4, residual, aggregate)


def error_term_magnitudes(P, k=0):
    """E1..E4 and the normalized gap |T - T_R| * m / sqrt(N), for P of shape n x N, m = N - n."""
    P = as_matrix(P, "P")
    tc = trace_comparison(P, k)
    n, N = P.shape
    return ErrorTerms(tc.E1, tc.E2, tc.E3, tc.E4, tc.T, tc.T_R, N, N - n)


def verify_instance(A, n, perturb=None):
    """Relative errors of every identity against a direct computation on one matrix.

    ``A`` is N x N and ``n`` the number of subspace rows. ``perturb`` maps a
    check name to an additive offset applied to the formula side; it exists
    to prove that the harness notices a broken formula.

    Returns a dict ``name -> error`` plus ``"correction_excess"``, the amount
    by which ``|correction|`` exceeds ``E1 + ... + E4`` (<= 0 when the split holds).
    """
    perturb = perturb or {}
    A = as_matrix(A, "A")
    x = A[0]
    B = A[1:n + 1]
    z = B[:, 0]
    P = B[:, 1:]
    errs = {}

    dec = decompose_distance(A, n)
    direct = float(x @ (np.eye(A.shape[1]) - B.T @ np.linalg.inv(B @ B.T) @ B) @ x)
    errs["distance_decomposition"] = rel_err(dec.total + perturb.get("distance_decomposition", 0.0), direct)
    trunc_direct = distance_to_rowspace(x[1:], P, method="qr") ** 2
    errs["truncated_term"] = rel_err(dec.truncated_term, trunc_direct)

    PPt = P @ P.T
    G_inv = np.linalg.inv(PPt)
    upd = rank_one_inverse_update(0.5 * (G_inv + G_inv.T), z)
    errs["rank_one_update"] = rel_err(upd + perturb.get("rank_one_update", 0.0), np.linalg.inv(PPt + np.outer(z, z)))

    M = B @ B.T
    p = max(1, n // 2)
    if p < n:
        blk = schur_block_inverse(M[:p, :p], M[:p, p:], M[p:, p:])
        errs["schur_block_inverse"] = rel_err(blk + perturb.get("schur_block_inverse", 0.0), np.linalg.inv(M))

    Q = P[:, 1:]
    qq = qq_inverse_via_schur(Q[0], Q[1:])
    # U diag(s^-2) U^T from the SVD of Q; inverting Q Q^T itself squares the condition number,
    # which reaches 1e9 when m = 2 makes Q square
    U, sv, _ = np.linalg.svd(Q, full_matrices=False)
    errs["qq_inverse"] = rel_err(qq + perturb.get("qq_inverse", 0.0), (U / sv ** 2) @ U.T)

    direct_X = G_inv @ P
    diag = max(rel_err(diagonal_entry_formula(P, i).value + perturb.get("diagonal_entry", 0.0), direct_X[i, i])
               for i in range(n))
    errs["diagonal_entry"] = diag

    if n >= 2:
        tc = trace_comparison(P, 0)
        errs["trace_identity"] = tc.identity_residual / max(1.0, abs(tc.T_R)) + abs(perturb.get("trace_identity", 0.0))
        errs["trace_aggregate"] = tc.aggregate_residual
        errs["correction_excess"] = float(abs(tc.correction) - tc.e_sum)
    return errs
