"""Diophantine structure of vectors and small-ball probabilities.

The essential least common denominator of x in R^N is

    LCD_{alpha,gamma}(x) = inf{theta > 0 : dist(theta x, Z^N) < min(gamma ||theta x||, alpha)}.

There is no closed form, so :func:`lcd` scans theta on a uniform grid over
(0, search_bound] and bisects the first feasible grid cell down to ``tol``.
Feasibility at a given theta is exact up to float rounding (coordinate-wise
round-to-nearest). A vector with no feasible theta below the search bound gets
``found=False``; that is a result, not an error.

Lévy concentration L(S, r) = sup_u P(|S - u| <= r) of a Rademacher sum
S = sum_i a_i x_i is computed exactly for N <= 20 by enumerating all 2^N
sign patterns.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.spatial import cKDTree
from scipy.stats import norm, qmc

from .ensembles import trial_rng

__all__ = [
    "LcdParams",
    "LcdResult",
    "CompressibilityReport",
    "SmallBallEstimate",
    "NotApplicableError",
    "lattice_distance",
    "is_lcd_feasible",
    "lcd",
    "lcd_multi",
    "lcd_subspace",
    "regularized_lcd",
    "classify_compressibility",
    "spread_constant",
    "spread_j_bounds",
    "in_spread_j",
    "rademacher_sums",
    "levy_concentration",
    "small_ball_bound",
    "small_ball_bound_multi",
    "fit_small_ball_constant",
    "fit_multi_constant",
]

GRID_FRACTION = 1e-5
REFINE_TOL = 1e-9
MAX_EXACT_N = 20


class NotApplicableError(ValueError):
    """A small-ball bound was evaluated below its applicability threshold."""


@dataclass(frozen=True)
class LcdParams:
    alpha: float
    gamma: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not 0 < self.gamma < 1:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")


@dataclass
class LcdResult:
    value: float  # math.inf when nothing feasible was found below search_bound
    witness: object  # theta (float) or Theta (array) or None
    search_bound: float
    resolution: float
    found: bool = True
    # "grid" (exhaustive within resolution), "upper" / "lower" (sampled bound), "approximate"
    estimate: str = "grid"
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        w = self.witness
        if isinstance(w, np.ndarray):
            w = w.tolist()
        return {
            "value": self.value if self.found else None,
            "found": self.found,
            "witness": w,
            "search_bound": self.search_bound,
            "resolution": self.resolution,
            "estimate": self.estimate,
            **{k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in self.extra.items()},
        }


@dataclass
class CompressibilityReport:
    c0: float
    c1: float
    sparsity: int
    sparse_distance: float
    kept_norm: float
    cls: str
    spread_set: tuple

    @property
    def compressible(self):
        return self.cls == "compressible"


@dataclass
class SmallBallEstimate:
    radius: float
    estimate: float
    method: str
    stderr: float
    theory_bound: float | None = None
    center: object = None

    def to_dict(self):
        c = self.center
        if isinstance(c, np.ndarray):
            c = c.tolist()
        return {"radius": self.radius, "estimate": self.estimate, "method": self.method,
                "stderr": self.stderr, "theory_bound": self.theory_bound, "center": c}


def lattice_distance(v):
    """Distance to the integer lattice along the last axis."""
    v = np.asarray(v, dtype=float)
    return np.sqrt(np.sum((v - np.rint(v)) ** 2, axis=-1))


def _feasible_rows(V, params):
    """Row-wise test dist(v, Z^N) < min(gamma ||v||, alpha) for a stack of vectors V."""
    return lattice_distance(V) < np.minimum(params.gamma * np.linalg.norm(V, axis=-1), params.alpha)


def is_lcd_feasible(theta, x, params):
    v = theta * np.asarray(x, dtype=float)
    return bool(_feasible_rows(v[None, :], params)[0])


def _nonzero(x):
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0 or not np.any(x):
        raise ValueError("LCD is undefined for the zero vector")
    return x


def _bisect(feasible, lo, hi, tol):
    # invariant: feasible(hi) and not feasible(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _scan(x, params, limit, step, chunk=8192):
    """Index (1-based) of the first feasible grid point theta = k * step <= limit, or None."""
    kmax = int(math.floor(limit / step + 1e-9))
    k0 = 1
    while k0 <= kmax:
        k1 = min(kmax, k0 + chunk - 1)
        thetas = np.arange(k0, k1 + 1) * step
        ok = _feasible_rows(thetas[:, None] * x[None, :], params)
        hit = np.flatnonzero(ok)
        if hit.size:
            return k0 + int(hit[0])
        k0 = k1 + 1
    return None


def lcd(x, params, search_bound=None, step=None, tol=REFINE_TOL, limit=None):
    """Smallest feasible theta on the grid, refined by bisection.

    ``step`` defaults to ``1e-5 * search_bound`` and ``search_bound`` to
    ``10 sqrt(N)``. ``limit`` (<= search_bound) stops the scan early; it is
    used when only values below a known bound matter.
    """
    x = _nonzero(x)
    bound = 10.0 * math.sqrt(x.size) if search_bound is None else float(search_bound)
    if not (bound > 0 and math.isfinite(bound)):
        raise ValueError("search_bound must be positive and finite")
    step = GRID_FRACTION * bound if step is None else float(step)
    top = bound if limit is None else min(bound, float(limit))
    k = _scan(x, params, top, step)
    if k is None:
        return LcdResult(math.inf, None, bound, step, found=False)
    theta = _bisect(lambda t: is_lcd_feasible(t, x, params), (k - 1) * step, k * step, tol)
    return LcdResult(theta, theta, bound, step)


def _half_circle(r, h):
    count = max(8, int(math.ceil(math.pi * r / h)))
    phi = np.arange(count) * (math.pi / count)
    return np.column_stack([np.cos(phi), np.sin(phi)])


def _hemisphere(r, h):
    # Fibonacci points on the sphere, folded to the upper half (Theta and -Theta are equivalent)
    count = max(16, int(math.ceil(4 * math.pi * r * r / (h * h))))
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    rho = np.sqrt(1.0 - z * z)
    phi = math.pi * (1.0 + math.sqrt(5.0)) * i
    pts = np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
    return pts[pts[:, 2] >= 0.0]


def _random_dirs(m, count, rng):
    g = rng.standard_normal((count, m))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def lcd_multi(vectors, params, search_bound=None, step=None, tol=REFINE_TOL, mode=None,
              directions_per_radius=4096, seed=0):
    """LCD of x_1..x_m: the least ||Theta|| with Theta^T X feasible, X the m x N matrix of rows x_j.

    m = 1 is delegated to :func:`lcd`. For m <= 3 the search is exhaustive on
    a polar grid: radii step ``h`` (default ``1e-3 * search_bound`` for m=2,
    ``1e-2 * search_bound`` for m=3) and, on each sphere, directions with
    arc spacing at most ``h``. The first radius with a feasible direction is
    refined by bisection along the feasible rays. ``mode="random"`` (forced for
    m > 3) samples directions and reports ``estimate="approximate"``.
    """
    X = np.atleast_2d(np.asarray(vectors, dtype=float))
    m, N = X.shape
    if np.any(~np.any(X, axis=1)):
        raise ValueError("all vectors must be nonzero")
    bound = 10.0 * math.sqrt(N) if search_bound is None else float(search_bound)
    if m == 1:
        res = lcd(X[0], params, bound, step, tol)
        if res.found:
            res.witness = np.array([res.witness])
        return res
    if mode is None:
        mode = "exhaustive" if m <= 3 else "random"
    if mode == "exhaustive" and m > 3:
        raise ValueError("exhaustive LCD search is limited to m <= 3 vectors")
    if mode not in ("exhaustive", "random"):
        raise ValueError(f"unknown mode {mode!r}")
    if step is None:
        step = (1e-3 if m == 2 else 1e-2) * bound
    rng = trial_rng(seed, 0, stream=17)

    def feasible_theta(theta):
        return bool(_feasible_rows((theta @ X)[None, :], params)[0])

    kmax = int(math.floor(bound / step + 1e-9))
    for k in range(1, kmax + 1):
        r = k * step
        if mode == "random":
            dirs = _random_dirs(m, directions_per_radius, rng)
        elif m == 2:
            dirs = _half_circle(r, step)
        else:
            dirs = _hemisphere(r, step)
        ok = _feasible_rows(r * (dirs @ X), params)
        if not ok.any():
            continue
        best_r, best_dir = r, dirs[np.flatnonzero(ok)[0]]
        for u in dirs[ok]:
            rr = _bisect(lambda t: feasible_theta(t * u), r - step, r, tol)
            if rr < best_r:
                best_r, best_dir = rr, u
        return LcdResult(best_r, best_r * best_dir, bound, step,
                         estimate="grid" if mode == "exhaustive" else "approximate")
    return LcdResult(math.inf, None, bound, step, found=False,
                     estimate="grid" if mode == "exhaustive" else "approximate")


def _check_orthonormal(H):
    H = np.atleast_2d(np.asarray(H, dtype=float))
    if H.shape[0] == 0:
        raise ValueError("empty basis")
    if np.max(np.abs(H @ H.T - np.eye(H.shape[0]))) > 1e-10:
        raise ValueError("basis rows must be orthonormal within 1e-10")
    return H


def _subspace_directions(k, count):
    if k == 1:
        return np.ones((1, 1))
    if k == 2:
        phi = np.arange(count) * (math.pi / count)
        return np.column_stack([np.cos(phi), np.sin(phi)])
    pts = qmc.Sobol(d=k, scramble=True, seed=0).random(count)
    g = norm.ppf(np.clip(pts, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def lcd_subspace(H, params, search_bound=None, sample_count=2048, step=None, tol=REFINE_TOL):
    """Upper estimate of inf{LCD(y) : y in span(H), ||y|| = 1}.

    Unit vectors of the subspace are taken from a deterministic set (evenly
    spaced angles in dimension 2, scrambled Sobol points otherwise); the best
    one is then refined on a finer local set of directions. Each candidate's
    scan stops at the best value found so far.
    """
    H = _check_orthonormal(H)
    k, N = H.shape
    bound = 10.0 * math.sqrt(N) if search_bound is None else float(search_bound)
    step = GRID_FRACTION * bound if step is None else float(step)
    coeffs = _subspace_directions(k, int(sample_count))

    best, best_c = math.inf, None

    def visit(c):
        nonlocal best, best_c
        res = lcd(c @ H, params, bound, step, tol, limit=min(bound, best))
        if res.found and res.value < best:
            best, best_c = res.value, c

    for c in coeffs:
        visit(c)
    if best_c is not None and k >= 2:
        spread = math.pi / len(coeffs) if k == 2 else 1.0 / math.sqrt(len(coeffs))
        if k == 2:
            phi0 = math.atan2(best_c[1], best_c[0])
            for phi in phi0 + np.linspace(-spread, spread, 65):
                visit(np.array([math.cos(phi), math.sin(phi)]))
        else:
            local = np.random.default_rng(0).standard_normal((256, k)) * spread
            for d in best_c + local:
                visit(d / np.linalg.norm(d))
    if best_c is None:
        return LcdResult(math.inf, None, bound, step, found=False, estimate="upper")
    return LcdResult(best, best * (best_c @ H), bound, step, estimate="upper",
                     extra={"direction": best_c @ H})


def spread_constant(c0, c1):
    """Upper limit c_* = c0 c1^2 / 2 for the regularization parameter lambda."""
    return c0 * c1 * c1 / 2.0


def classify_compressibility(x, c0, c1):
    """Distance to the sparse vectors, the compressible/incompressible label and the spread set.

    The sparse approximation keeps the ceil(c0 n) largest-magnitude coordinates.

    The spread set holds the coordinates with c1/sqrt(2n) <= |x_k| <= 1/sqrt(c0 n).
    """
    if not (0 < c0 < 1 and 0 < c1 < 1):
        raise ValueError("c0 and c1 must lie in (0, 1)")
    x = _nonzero(x)
    x = x / np.linalg.norm(x)
    n = x.size
    k = int(math.ceil(c0 * n - 1e-12))
    mags = np.sort(np.abs(x))[::-1]
    sparse_distance = float(np.linalg.norm(mags[k:]))
    kept = float(np.linalg.norm(mags[:k]))
    lo, hi = c1 / math.sqrt(2 * n), 1.0 / math.sqrt(c0 * n)
    ax = np.abs(x)
    spread = tuple(int(i) for i in np.flatnonzero((ax >= lo) & (ax <= hi)))
    cls = "compressible" if sparse_distance <= c1 else "incompressible"
    return CompressibilityReport(c0, c1, k, sparse_distance, kept, cls, spread)


def spread_j_bounds(d, c0, c1):
    """(K1/sqrt(d), K2/sqrt(d)) with K1 = c1 sqrt(c0/2), K2 = 1/K1."""
    K1 = c1 * math.sqrt(c0 / 2.0)
    return K1 / math.sqrt(d), (1.0 / K1) / math.sqrt(d)

def in_spread_j(y, c0, c1, atol=1e-12):
    y = np.asarray(y, dtype=float).ravel()
    if abs(np.linalg.norm(y) - 1.0) > 1e-10:
        return False
    lo, hi = spread_j_bounds(y.size, c0, c1)
    a = np.abs(y)
    return bool(np.all((a >= lo - atol) & (a <= hi + atol)))


def regularized_lcd(x, lam, params, c0, c1, search_bound=None, exhaustive_limit=20,
                    max_subsets=2000, seed=0, step=None):
    """max LCD(x_I / ||x_I||) over I in the spread set with |I| = ceil(lam N).

    Exhaustive when the spread set has at most ``exhaustive_limit`` indices;
    otherwise ``max_subsets`` subsets are drawn deterministically and the
    result is flagged ``estimate="lower"``. Returns ``(LcdResult, I)``.
    """
    x = _nonzero(x)
    x = x / np.linalg.norm(x)
    N = x.size
    cstar = spread_constant(c0, c1)
    if not 0 < lam < cstar:
        raise ValueError(f"lambda must lie in (0, c*) = (0, {cstar:.6g})")
    rep = classify_compressibility(x, c0, c1)
    if rep.compressible:
        raise ValueError("regularized LCD is defined for incompressible vectors only")
    size = int(math.ceil(lam * N - 1e-12))
    spread = rep.spread_set
    if size > len(spread):
        raise ValueError(f"need ceil(lambda N) = {size} <= |spread(x)| = {len(spread)}")
    if len(spread) <= exhaustive_limit:
        subsets = itertools.combinations(spread, size)
        estimate = "grid"
    else:
        rng = trial_rng(seed, 0, stream=23)
        subsets = (tuple(sorted(rng.choice(spread, size, replace=False))) for _ in range(max_subsets))
        estimate = "lower"
    best, best_I, best_res = -1.0, None, None
    for I in subsets:
        v = x[list(I)]
        res = lcd(v / np.linalg.norm(v), params, search_bound, step)
        if res.value > best:
            best, best_I, best_res = res.value, I, res
    out = LcdResult(best_res.value, best_res.witness, best_res.search_bound, best_res.resolution,
                    found=best_res.found, estimate=estimate, extra={"subset": list(best_I)})
    return out, best_I


def rademacher_sums(weights):
    """All 2^N values of sum_i s_i w_i over sign vectors s (rows of ``weights`` may be vectors)."""
    W = np.asarray(weights, dtype=float)
    if W.ndim == 1:
        W = W[:, None]
    N = W.shape[0]
    if N > MAX_EXACT_N:
        raise ValueError(f"exact enumeration supports N <= {MAX_EXACT_N}, got {N}")

    def half(block):
        k = block.shape[0]
        signs = 1.0 - 2.0 * ((np.arange(2 ** k)[:, None] >> np.arange(k)[None, :]) & 1)
        return signs @ block

    lo, hi = half(W[: N // 2]), half(W[N // 2:])
    return (lo[:, None, :] + hi[None, :, :]).reshape(-1, W.shape[1])


def _window_max_1d(values, radius):
    s = np.sort(values)
    eps = 1e-12 * max(1.0, float(np.max(np.abs(s))))
    right = np.searchsorted(s, s + 2.0 * radius + eps, side="right")
    counts = right - np.arange(s.size)
    i = int(np.argmax(counts))
    return int(counts[i]), float(0.5 * (s[i] + s[right[i] - 1]))


def _disc_max_2d(points, radius):
    """Largest multiset count in a closed disc; an optimal disc can be slid until a point is on its rim."""
    uniq, mult = np.unique(np.round(points, 12), axis=0, return_counts=True)
    tree = cKDTree(uniq)
    eps = 1e-12 * max(1.0, float(np.max(np.abs(uniq))))
    best, best_c = int(mult.max()), uniq[int(np.argmax(mult))]
    if radius <= 0:
        return best, best_c
    hoods = tree.query_ball_point(uniq, 2.0 * radius + eps)
    reach = np.array([mult[h].sum() for h in hoods])
    # densest neighborhoods first, so the bound prunes most anchors
    for i in np.argsort(-reach, kind="stable"):
        if reach[i] <= best:
            break
        nbrs = np.asarray(hoods[i], dtype=int)
        nbrs = nbrs[nbrs != i]
        v = uniq[nbrs] - uniq[i]
        phi = np.arctan2(v[:, 1], v[:, 0])
        half = np.arccos(np.clip(np.hypot(v[:, 0], v[:, 1]) / (2.0 * radius), 0.0, 1.0)) + 1e-12
        start = np.mod(phi - half, 2.0 * math.pi)
        w = mult[nbrs]
        # arcs of admissible centers on the circle of radius r around the anchor, unrolled twice
        ang = np.concatenate([start, start + 2 * half, start + 2 * math.pi, start + 2 * half + 2 * math.pi])
        delta = np.concatenate([w, -w, w, -w])
        order = np.lexsort((-delta, ang))
        depth = np.cumsum(delta[order])
        k = int(np.argmax(depth))
        total = int(depth[k]) + int(mult[i])
        if total > best:
            t = ang[order][k]
            best, best_c = total, uniq[i] + radius * np.array([math.cos(t), math.sin(t)])
    return best, best_c


def levy_concentration(weights, radius, distribution="rademacher", mode="exact", samples=100_000, seed=0):
    """sup_u P(|S - u| <= radius) for S = sum_i a_i w_i.

    ``weights`` is a vector (scalar sum) or an N x m array whose rows are the
    vectors w_i (sum in R^m, m <= 2 for exact mode). Exact mode enumerates all
    Rademacher sign patterns; the best center comes from a sliding window in
    one dimension and from two-point circle candidates in two dimensions.
    Monte-Carlo mode applies the same search to sampled sums and reports the
    binomial standard error.
    """
    radius = float(radius)
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    W = np.asarray(weights, dtype=float)
    if W.ndim == 1:
        W = W[:, None]
    N, m = W.shape
    if mode == "exact":
        if distribution != "rademacher":
            raise ValueError("exact mode supports the rademacher distribution only")
        if N > MAX_EXACT_N:
            raise ValueError(f"exact mode supports N <= {MAX_EXACT_N}, got {N}")
        pts = rademacher_sums(W)
    elif mode == "monte-carlo":
        rng = trial_rng(seed, 0, stream=29)
        if distribution == "rademacher":
            a = 2.0 * rng.integers(0, 2, size=(int(samples), N)) - 1.0
        elif distribution in ("gaussian", "standard-gaussian"):
            a = rng.standard_normal((int(samples), N))
        else:
            raise ValueError(f"unsupported distribution {distribution!r}")
        pts = a @ W
    else:
        raise ValueError(f"unknown mode {mode!r}")
    total = pts.shape[0]
    if m == 1:
        count, center = _window_max_1d(pts[:, 0], radius)
    elif m == 2:
        count, center = _disc_max_2d(pts, radius)
    else:
        raise ValueError("Lévy concentration search supports sums in dimension 1 or 2")
    p = count / total
    stderr = 0.0 if mode == "exact" else math.sqrt(p * (1.0 - p) / total)
    return SmallBallEstimate(radius, p, "exact-enumeration" if mode == "exact" else "monte-carlo", stderr,
                             center=center)


def small_ball_bound(lcd_value, eps, params, C0=1.0):
    """C0 (eps / gamma + exp(-2 alpha^2)), valid for eps >= 1 / LCD."""
    if not eps >= 1.0 / lcd_value:
        raise NotApplicableError(f"eps = {eps} is below 1/LCD = {1.0 / lcd_value}")
    return C0 * (eps / params.gamma + math.exp(-2.0 * params.alpha ** 2))


def small_ball_bound_multi(lcd_value, m, eps, params, b, C=1.0):
    """(C eps / (gamma sqrt b))^m + C^m exp(-2 b alpha^2), the bound on L(S, eps sqrt(m)).

    Valid for eps >= sqrt(m) / LCD(x_1..x_m); C is supplied by the caller.
    """
    if not 0 < b <= 1:
        raise ValueError("b must lie in (0, 1]")
    if not eps >= math.sqrt(m) / lcd_value:
        raise NotApplicableError(f"eps = {eps} is below sqrt(m)/LCD = {math.sqrt(m) / lcd_value}")
    return (C * eps / (params.gamma * math.sqrt(b))) ** m + C ** m * math.exp(-2.0 * b * params.alpha ** 2)


def fit_small_ball_constant(estimates, eps_values, params):
    """Smallest C0 with every estimate <= C0 (eps / gamma + exp(-2 alpha^2))."""
    e = np.asarray(estimates, dtype=float)
    eps = np.asarray(eps_values, dtype=float)
    return float(np.max(e / (eps / params.gamma + math.exp(-2.0 * params.alpha ** 2))))


def fit_multi_constant(estimate, m, eps, params, b):
    """Smallest C >= 0 with estimate <= (C eps/(gamma sqrt b))^m + C^m exp(-2 b alpha^2)."""
    unit = (eps / (params.gamma * math.sqrt(b))) ** m + math.exp(-2.0 * b * params.alpha ** 2)
    # the right side is C^m * unit
    return float(estimate / unit) ** (1.0 / m) if estimate > 0 else 0.0
