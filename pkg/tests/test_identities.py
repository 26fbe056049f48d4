import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wigdist.ensembles import EnsembleSpec, sample_wigner
from wigdist.identities import (
    decompose_distance,
    diagonal_entry_formula,
    error_term_magnitudes,
    move_to_front,
    qq_inverse_via_schur,
    rank_one_inverse_update,
    schur_block_inverse,
    trace_comparison,
    verify_instance,
)
from wigdist.linalg import DegeneracyError, RankDeficiencyError, distance_to_rowspace, rel_err


def rng(seed):
    return np.random.default_rng(seed)


# rank-one update

def test_rank_one_update_trivial_cases():
    assert np.array_equal(rank_one_inverse_update(np.eye(2), np.zeros(2)), np.eye(2))
    assert rank_one_inverse_update(np.eye(1), [1.0])[0, 0] == pytest.approx(0.5)


def test_rank_one_update_matches_direct_inverse():
    r = rng(0)
    g = r.standard_normal((5, 5))
    G = g @ g.T + 5 * np.eye(5)
    z = r.standard_normal(5)
    Gi = np.linalg.inv(G)
    upd = rank_one_inverse_update(0.5 * (Gi + Gi.T), z)
    assert rel_err(upd, np.linalg.inv(G + np.outer(z, z))) <= 1e-10


def test_rank_one_update_rejects_singular_denominator():
    with pytest.raises(DegeneracyError):
        rank_one_inverse_update(-np.eye(1), [1.0])
    with pytest.raises(ValueError):
        rank_one_inverse_update(np.array([[1.0, 2.0], [0.0, 1.0]]), [1.0, 0.0])


# Schur block inverse

def test_schur_block_trivial_cases():
    assert np.allclose(schur_block_inverse(np.eye(1), np.zeros((1, 2)), np.eye(2)), np.eye(3))
    assert np.allclose(schur_block_inverse([[2.0]], [[0.0]], [[4.0]]), np.diag([0.5, 0.25]))


def test_schur_block_matches_direct_inverse():
    a = rng(1).standard_normal((6, 6))
    M = a @ a.T + np.eye(6)
    inv = schur_block_inverse(M[:2, :2], M[:2, 2:], M[2:, 2:])
    assert rel_err(inv, np.linalg.inv(M)) <= 1e-10


def test_schur_block_rejects_singular_block():
    with pytest.raises(DegeneracyError):
        schur_block_inverse(np.zeros((1, 1)), np.zeros((1, 1)), np.eye(1))


# (Q Q^T)^{-1}

def test_qq_inverse_trivial_cases():
    assert np.allclose(qq_inverse_via_schur([1.0, 0.0], [[0.0, 1.0]]), np.eye(2))
    y = np.array([0.0, 0.0, 1.0])
    R = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    assert qq_inverse_via_schur(y, R)[0, 0] == pytest.approx(1.0)


def test_qq_inverse_matches_direct_inverse():
    Q = rng(2).standard_normal((10, 20))
    assert rel_err(qq_inverse_via_schur(Q[0], Q[1:]), np.linalg.inv(Q @ Q.T)) <= 1e-8


def test_qq_inverse_rejects_y_in_rowspace():
    R = rng(3).standard_normal((3, 6))
    with pytest.raises(DegeneracyError):
        qq_inverse_via_schur(np.array([1.0, -2.0, 0.5]) @ R, R)


# distance decomposition

def test_decomposition_with_zero_column():
    A = sample_wigner(EnsembleSpec("standard-gaussian", 12), 0, 0).entries.copy()
    n = 8
    A[1:n + 1, 0] = 0.0
    dec = decompose_distance(A, n)
    assert dec.error_denominator == 1.0
    assert dec.error_term == pytest.approx(A[0, 0] ** 2, rel=1e-12)


def test_decomposition_matches_direct_projection_formula():
    A = sample_wigner(EnsembleSpec("standard-gaussian", 30), 4, 0).entries
    n = 20
    x, B = A[0], A[1:n + 1]
    direct = x @ (np.eye(30) - B.T @ np.linalg.inv(B @ B.T) @ B) @ x
    dec = decompose_distance(A, n)
    assert rel_err(dec.total, direct) <= 1e-8
    assert dec.error_denominator >= 1.0
    assert dec.total >= dec.truncated_term
    trunc = distance_to_rowspace(x[1:], B[:, 1:], method="qr") ** 2
    assert rel_err(dec.truncated_term, trunc) <= 1e-8
    assert rel_err(dec.total, dec.truncated_term + dec.error_numerator ** 2 / dec.error_denominator) <= 1e-12


def test_decomposition_rejects_bad_n():
    with pytest.raises(ValueError):
        decompose_distance(np.eye(4), 4)


# diagonal entries

def test_diagonal_entry_matches_direct_product_for_every_row():
    P = rng(5).standard_normal((10, 25))
    X = np.linalg.inv(P @ P.T) @ P
    for i in range(10):
        br = diagonal_entry_formula(P, i)
        assert rel_err(br.value, X[i, i]) <= 1e-8
        Pi = move_to_front(P, i)
        assert rel_err(br.d_squared, distance_to_rowspace(Pi[0, 1:], Pi[1:, 1:]) ** 2) <= 1e-8
        assert rel_err(br.value, br.numerator / br.denominator) <= 1e-12
        assert br.d_squared >= -1e-8


def test_diagonal_entry_with_zero_truncated_column():
    P = rng(6).standard_normal((6, 14))
    P[1:, 0] = 0.0
    br = diagonal_entry_formula(P, 0)
    x0 = P[0, 0]
    assert br.numerator == x0
    assert br.value == pytest.approx(x0 / (br.d_squared + x0 ** 2), rel=1e-12)
    assert br.value == pytest.approx((np.linalg.inv(P @ P.T) @ P)[0, 0], rel=1e-8)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 12), extra=st.integers(1, 15), seed=st.integers(0, 10**6), data=st.data())
def test_diagonal_entry_obeys_am_gm_bound(n, extra, seed, data):
    P = rng(seed).standard_normal((n, n + extra))
    i = data.draw(st.integers(0, n - 1))
    br = diagonal_entry_formula(P, i)
    assert abs(br.value) <= 1.0 / (2.0 * np.sqrt(br.d_squared * br.column_quadratic)) + 1e-10


# trace comparison

def test_trace_identity_and_split_on_gaussian_instance():
    P = rng(7).standard_normal((12, 30))
    for k in range(12):
        tc = trace_comparison(P, k)
        assert tc.identity_residual <= 1e-8 * max(1.0, abs(tc.T_R))
        assert abs(tc.correction) <= tc.e_sum + 1e-8
        assert min(tc.E1, tc.E2, tc.E3, tc.E4) >= 0.0
        assert tc.aggregate_residual <= 1e-8
    X = np.linalg.inv(P @ P.T) @ P
    assert trace_comparison(P, 0).T == pytest.approx(np.trace(X), rel=1e-10)


def test_trace_identity_with_zero_column():
    P = rng(8).standard_normal((8, 20))
    P[1:, 0] = 0.0
    tc = trace_comparison(P, 0)
    assert tc.identity_residual <= 1e-8 * max(1.0, abs(tc.T_R))
    assert abs(tc.correction) <= tc.e_sum + 1e-8
    # z = 0 kills E1, E3 and E4
    assert tc.E1 == 0.0 and tc.E3 == 0.0 and tc.E4 == 0.0


def test_error_terms_scale_like_sqrt_n_over_m():
    N, m = 200, 50
    gaps = []
    for seed in range(100):
        P = rng(1000 + seed).standard_normal((N - m, N))
        et = error_term_magnitudes(P, 0)
        assert min(et.E1, et.E2, et.E3, et.E4) >= 0.0
        gaps.append(et.scaled_gap)
    assert np.median(gaps) <= 20.0


def test_zero_matrix_is_rank_deficient():
    with pytest.raises(RankDeficiencyError):
        trace_comparison(np.zeros((3, 6)))


@settings(max_examples=30, deadline=None)
@given(N=st.integers(10, 40), which=st.integers(0, 2), seed=st.integers(0, 2**32 - 1))
def test_verify_instance_meets_tolerances(N, which, seed):
    m = (2, int(np.ceil(N / 4)), int(np.ceil(N / 2)))[which]
    A = sample_wigner(EnsembleSpec("standard-gaussian", N), seed, 0).entries
    try:
        errs = verify_instance(A, N - m)
    except DegeneracyError:
        return
    limits = {"rank_one_update": 1e-10, "schur_block_inverse": 1e-10, "correction_excess": 1e-8}
    for key, val in errs.items():
        assert val <= limits.get(key, 1e-8), key


def test_perturbation_is_detected():
    A = sample_wigner(EnsembleSpec("standard-gaussian", 20), 1, 0).entries
    errs = verify_instance(A, 15, perturb={"diagonal_entry": 1e-4})
    assert errs["diagonal_entry"] > 1e-8
