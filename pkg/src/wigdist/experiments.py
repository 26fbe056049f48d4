"""Monte-Carlo experiments on distances, singular values and eigenvectors.

Every experiment is a map over trial indices. Trial ``i`` draws its matrix
from ``trial_rng(master_seed, i)`` and nothing else, so results do not depend
on how trials are distributed over worker processes. Each worker pins its
BLAS to one thread; the serial path does the same, which keeps the floating
point reductions identical between ``workers=1`` and ``workers=8``.

Degenerate trials (rank deficiency within ``RANK_TOL``) are flagged and
counted, never dropped silently.
"""
from __future__ import annotations

import json
import math
from importlib import resources
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import partial

import numpy as np
from scipy import stats
from threadpoolctl import threadpool_limits

from .ensembles import EnsembleSpec, sample_iid, sample_wigner, take_rows, trial_rng
from .identities import decompose_distance, verify_instance
from .spectral import count_singular_values, interlacing_check
from .linalg import RANK_TOL, DegeneracyError, RankDeficiencyError, distance_to_rowspace, singular_values

__all__ = [
    "ExperimentConfig",
    "TrialRecord",
    "TailCurve",
    "HistogramSummary",
    "HansonWrightResult",
    "IDENTITY_THRESHOLDS",
    "map_trials",
    "wilson_interval",
    "tail_curve",
    "fit_gaussian_tail",
    "fit_exponential_tail",
    "fit_power_tail",
    "histogram",
    "is_unimodal",
    "run_distance_experiment",
    "lower_tail",
    "run_independent_distance_experiment",
    "run_sv_tail_experiment",
    "sv_scaling_study",
    "chi_square_exceedance",
    "run_hanson_wright_check",
    "run_delocalization_experiment",
    "run_inverse_entry_experiment",
    "run_spectral_count_experiment",
    "run_interlacing_experiment",
    "run_identity_suite",
    "records_csv",
    "histogram_svg",
    "summary_json",
    "load_acceptance",
]


@dataclass(frozen=True)
class ExperimentConfig:
    ensemble: EnsembleSpec
    N: int
    n: int
    trials: int
    master_seed: int = 0
    t_grid: tuple = ()
    workers: int = 1

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"N must be at least 2, got {self.N}")
        if not 1 <= self.n <= self.N - 1:
            raise ValueError(f"need 1 <= n <= N - 1, got n={self.n}, N={self.N}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        object.__setattr__(self, "t_grid", tuple(float(t) for t in self.t_grid))
        if self.ensemble.N != self.N:
            object.__setattr__(self, "ensemble", replace(self.ensemble, N=int(self.N)))

    @property
    def m(self):
        return self.N - self.n

    def to_dict(self):
        return {"ensemble": self.ensemble.to_dict(), "N": self.N, "n": self.n, "m": self.m,
                "trials": self.trials, "master_seed": self.master_seed, "t_grid": list(self.t_grid),
                "workers": self.workers}


@dataclass
class TrialRecord:
    trial_index: int
    dist: float
    normalized: float
    sigma_min: float
    degenerate: bool = False
    decomposition: object = None

    CSV_HEADER = "trial_index,dist,normalized,sigma_min,degenerate"

    def csv_row(self):
        return f"{self.trial_index},{self.dist!r},{self.normalized!r},{self.sigma_min!r},{int(self.degenerate)}"


@dataclass
class TailCurve:
    """Empirical P(stat >= t) (``side="upper"``) or P(stat <= t) (``side="lower"``) on a grid."""

    t: np.ndarray
    probability: np.ndarray
    counts: np.ndarray
    trials: int
    wilson_low: np.ndarray
    wilson_high: np.ndarray
    side: str = "upper"
    label: str = ""
    fit: dict = field(default_factory=dict)
    samples: np.ndarray = field(default=None, repr=False)

    @property
    def half_width(self):
        return 0.5 * (self.wilson_high - self.wilson_low)

    def is_monotone(self):
        d = np.diff(self.probability)
        return bool(np.all(d <= 0) if self.side == "upper" else np.all(d >= 0))

    def to_dict(self):
        return {"label": self.label, "side": self.side, "trials": self.trials, "t": self.t.tolist(),
                "probability": self.probability.tolist(), "counts": self.counts.tolist(),
                "wilson_low": self.wilson_low.tolist(), "wilson_high": self.wilson_high.tolist(),
                "fit": self.fit}


@dataclass
class HistogramSummary:
    edges: np.ndarray
    counts: np.ndarray
    mean: float
    variance: float
    unimodal: bool
    model: str
    samples: int

    def to_dict(self):
        return {"edges": self.edges.tolist(), "counts": self.counts.tolist(), "mean": self.mean,
                "variance": self.variance, "unimodal": self.unimodal, "model": self.model,
                "samples": self.samples}


@dataclass
class HansonWrightResult:
    matrix_kind: str
    quadratic: TailCurve
    norm: TailCurve
    C_quadratic: float
    C_norm: float


# ---------------------------------------------------------------- plumbing

def _pin_blas():
    # the handle must outlive the initializer, so keep it on the module
    global _LIMITS
    _LIMITS = threadpool_limits(limits=1)


def map_trials(fn, count, workers=1, start=0):
    """[fn(i) for i in range(start, start + count)], optionally over a process pool."""
    indices = range(start, start + count)
    if workers <= 1 or count <= 1:
        with threadpool_limits(limits=1):
            return [fn(i) for i in indices]
    chunk = max(1, count // (8 * workers))
    with ProcessPoolExecutor(max_workers=workers, initializer=_pin_blas) as pool:
        return list(pool.map(fn, indices, chunksize=chunk))


def wilson_interval(k, n, level=0.95):
    """Wilson score interval for k successes out of n."""
    k = np.asarray(k, dtype=float)
    z = stats.norm.ppf(0.5 + level / 2.0)
    p = k / n
    den = 1.0 + z * z / n
    mid = (p + z * z / (2 * n)) / den
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    lo = np.where(k == 0, 0.0, np.clip(mid - half, 0.0, 1.0))
    hi = np.where(k == n, 1.0, np.clip(mid + half, 0.0, 1.0))
    return lo, hi


def tail_curve(values, t_grid, side="upper", label=""):
    """Exceedance (``upper``: values >= t) or CDF (``lower``: values <= t) at sorted t."""
    v = np.asarray(values, dtype=float)
    t = np.sort(np.asarray(t_grid, dtype=float))
    if side == "upper":
        counts = np.array([int(np.count_nonzero(v >= s)) for s in t])
    elif side == "lower":
        counts = np.array([int(np.count_nonzero(v <= s)) for s in t])
    else:
        raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")
    lo, hi = wilson_interval(counts, v.size)
    return TailCurve(t, counts / v.size, counts, int(v.size), lo, hi, side, label, samples=v)


def _positive(curve, power):
    keep = (curve.counts > 0) & (curve.t > 0)
    return curve.t[keep] ** power, np.log(curve.probability[keep])


def fit_gaussian_tail(curve):
    """Fit log p = -t^2 / K (through the origin) and log p = a + b t^2.

    Only grid points with positive counts enter the regressions.
    """
    x, y = _positive(curve, 2)
    out = {"points": int(x.size)}
    if x.size >= 1:
        slope0 = float(np.dot(x, y) / np.dot(x, x))
        out["slope_origin"] = slope0
        out["K"] = -1.0 / slope0 if slope0 < 0 else math.inf
    if x.size >= 2:
        b, a = np.polyfit(x, y, 1)
        out["slope"], out["intercept"] = float(b), float(a)
    return out


def fit_exponential_tail(curve, power=1):
    """C in p ~ exp(-C t^power), least squares through the origin on log p."""
    x, y = _positive(curve, power)
    if x.size == 0:
        return math.nan
    return float(-np.dot(x, y) / np.dot(x, x))


def fit_power_tail(curve):
    """Exponent b in p ~ eps^b from a log-log fit over positive points."""
    keep = (curve.counts > 0) & (curve.t > 0)
    if np.count_nonzero(keep) < 2:
        return math.nan
    b, _ = np.polyfit(np.log(curve.t[keep]), np.log(curve.probability[keep]), 1)
    return float(b)


def is_unimodal(counts, slack=3.0):
    """Unimodality up to Poisson noise.

    Left of the tallest bin each count may fall below the running maximum by
    at most ``slack * sqrt(running max)``; the same holds right of it, read
    from the far end.
    """
    c = np.asarray(counts, dtype=float)
    if c.size <= 2:
        return True
    mode = int(np.argmax(c))

    def rises(seq):
        top = 0.0
        for v in seq:
            if v < top - slack * math.sqrt(top):
                return False
            top = max(top, v)
        return True

    return rises(c[: mode + 1]) and rises(c[mode:][::-1])


def histogram(values, bins=30, model=""):
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if v.size == 0:
        raise ValueError("no finite values to histogram")
    if v.size == 1:
        edges = np.array([v[0] - 0.5, v[0] + 0.5])
        counts = np.array([1])
    else:
        counts, edges = np.histogram(v, bins=bins)
    var = float(np.var(v, ddof=1)) if v.size > 1 else 0.0
    return HistogramSummary(edges, counts, float(np.mean(v)), var, is_unimodal(counts), model, int(v.size))


# ---------------------------------------------------------------- distances

def _distance_trial(config, decompose, i):
    A = sample_wigner(config.ensemble, config.master_seed, i).entries
    n, m = config.n, config.m
    x, B = A[0], A[1:n + 1]
    s = singular_values(B)
    if s[0] == 0.0 or s[-1] / s[0] < RANK_TOL:
        return TrialRecord(i, math.nan, math.nan, float(s[-1]), True)
    d = distance_to_rowspace(x, B, check_rank=False)
    dec = decompose_distance(A, n) if decompose else None
    return TrialRecord(i, d, (d * d - m) / math.sqrt(m), float(s[-1]), False, dec)


def run_distance_experiment(config, bins=30, decompose=False):
    """dist(row 1, span(rows 2..n+1)) of a symmetric matrix, per trial, plus a histogram.

    Returns ``(records, HistogramSummary)``; the histogram covers the
    non-degenerate values of (dist^2 - m) / sqrt(m).
    """
    records = map_trials(partial(_distance_trial, config, decompose), config.trials, config.workers)
    good = [r.normalized for r in records if not r.degenerate]
    hist = histogram(good, bins, model=config.ensemble.kind) if good else None
    return records, hist


def lower_tail(records, m, lam):
    """Empirical P(dist <= sqrt(m) - lam) over non-degenerate records, with its Wilson interval."""
    d = np.array([r.dist for r in records if not r.degenerate])
    k = int(np.count_nonzero(d <= math.sqrt(m) - lam))
    lo, hi = wilson_interval(k, d.size)
    return k / d.size, float(lo), float(hi)


def _independent_trial(config, i):
    spec = replace(config.ensemble, symmetric=False)
    A = sample_iid(config.n + 1, config.N, spec, config.master_seed, i).entries
    try:
        return distance_to_rowspace(A[0], A[1:])
    except np.linalg.LinAlgError:
        return math.nan


def run_independent_distance_experiment(config):
    """Tail of |dist(x, H) - sqrt(m)| when x is independent of the iid rows spanning H.

    The fitted K of p ~ exp(-t^2 / K) and the free-intercept slope are
    stored in ``curve.fit``; ``curve.fit["degenerate"]`` counts dropped trials.
    """
    if config.ensemble.kind == "goe":
        raise ValueError("the independent model needs an iid ensemble kind")
    d = np.array(map_trials(partial(_independent_trial, config), config.trials, config.workers))
    bad = int(np.count_nonzero(~np.isfinite(d)))
    dev = np.abs(d[np.isfinite(d)] - math.sqrt(config.m))
    grid = config.t_grid or (0.0, 1.0, 2.0, 3.0)
    curve = tail_curve(dev, grid, "upper", "|dist - sqrt(m)|")
    curve.fit = fit_gaussian_tail(curve)
    curve.fit["degenerate"] = bad
    return curve


# ---------------------------------------------------------------- singular values

def _sv_trial(config, mode, i):
    A = sample_wigner(config.ensemble, config.master_seed, i)
    M = A.entries if mode == "square" else take_rows(A, (1, config.n + 1)).entries
    return float(singular_values(M)[-1])


def run_sv_tail_experiment(config, mode="square", eps_grid=(0.01, 0.03, 0.1, 0.3, 1.0, 3.0)):
    """P(sigma_min <= eps * scale) on a grid of eps.

    ``mode="square"`` uses the full N x N symmetric matrix and scale N^{-1/2};
    ``mode="rect"`` uses rows 2..n+1 and scale m N^{-1/2}. ``curve.fit`` holds
    the log-log tail exponent, the scale and the median of sigma_min / scale.
    """
    if mode not in ("square", "rect"):
        raise ValueError(f"mode must be 'square' or 'rect', got {mode!r}")
    sig = np.array(map_trials(partial(_sv_trial, config, mode), config.trials, config.workers))
    N = config.N
    scale = 1.0 / math.sqrt(N) if mode == "square" else config.m / math.sqrt(N)
    curve = tail_curve(sig / scale, eps_grid, "lower", f"sigma_min / scale ({mode})")
    curve.fit = {"exponent": fit_power_tail(curve), "scale": scale,
                 "median_ratio": float(np.median(sig / scale)), "mode": mode}
    return curve


def sv_scaling_study(sizes, trials, seed=0, kind="standard-gaussian", eps_grid=(0.1, 0.3, 1.0), workers=1):
    """Rectangular least-singular-value curves for m = N/4 across sizes, keyed by N."""
    out = {}
    for N in sizes:
        m = N // 4
        cfg = ExperimentConfig(EnsembleSpec(kind, N), N, N - m, trials, seed, (), workers)
        out[N] = run_sv_tail_experiment(cfg, "rect", eps_grid)
    return out


# ---------------------------------------------------------------- Hanson-Wright

def _test_matrix(kind, M, seed):
    rng = trial_rng(seed, 0, stream=99)
    if kind == "identity":
        return np.eye(M)
    if kind == "zero":
        return np.zeros((M, M))
    if kind == "projection":
        q, _ = np.linalg.qr(rng.standard_normal((M, max(1, M // 2))))
        return q @ q.T
    if kind == "spd":
        g = rng.standard_normal((M, M))
        return g @ g.T / M + np.eye(M)
    raise ValueError(f"unknown matrix kind {kind!r}")


def chi_square_exceedance(M, t):
    """Exact P(|chi2_M - M| > t sqrt(M))."""
    r = t * math.sqrt(M)
    return float(stats.chi2.sf(M + r, M) + stats.chi2.cdf(M - r, M))


def _hw_trial(config, A, i):
    spec = replace(config.ensemble, symmetric=False)
    x = sample_iid(1, A.shape[0], spec, config.master_seed, i).entries[0]
    hs = float(np.linalg.norm(A))
    if hs == 0.0:
        return 0.0, 0.0
    op = float(np.linalg.norm(A, 2))
    return abs(x @ A @ x - np.trace(A)) / hs, abs(np.linalg.norm(A @ x) - hs) / op


def run_hanson_wright_check(config, matrix_kind="identity"):
    """Tails of |x^T A x - tr A| / ||A||_HS and | ||Ax|| - ||A||_HS | / ||A||_2.

    The test matrix has size ``config.N``; x has iid entries from the config's
    scalar law. Fitted rates: C in exp(-C t) for the quadratic form and in
    exp(-C t^2) for the norm.
    """
    A = _test_matrix(matrix_kind, config.N, config.master_seed)
    if config.ensemble.kind == "goe":
        raise ValueError("use an iid ensemble kind for the random vector")
    pairs = np.array(map_trials(partial(_hw_trial, config, A), config.trials, config.workers))
    grid = config.t_grid or (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)
    # strict exceedance (> t) for the quadratic form, matching the chi-square oracle
    q = tail_curve(pairs[:, 0], grid, "upper", "quadratic form")
    q.counts = np.array([int(np.count_nonzero(pairs[:, 0] > s)) for s in q.t])
    q.probability = q.counts / q.trials
    q.wilson_low, q.wilson_high = wilson_interval(q.counts, q.trials)
    nrm = tail_curve(pairs[:, 1], grid, "upper", "norm")
    cq, cn = fit_exponential_tail(q, 1), fit_exponential_tail(nrm, 2)
    q.fit, nrm.fit = {"C": cq}, {"C": cn}
    return HansonWrightResult(matrix_kind, q, nrm, cq, cn)


# ---------------------------------------------------------------- eigenvector / inverse statistics

def _deloc_trial(config, i):
    A = sample_wigner(config.ensemble, config.master_seed, i).entries
    N = A.shape[0]
    _, s, vt = np.linalg.svd(A[1:], full_matrices=True)
    x = vt[-1]
    degenerate = bool(s[0] == 0.0 or s[-1] / s[0] < RANK_TOL)
    stat = float(np.max(np.abs(x)) * math.sqrt(N) / math.log(N) ** 1.5)
    return stat, float(np.linalg.norm(x)), degenerate


def _quantiles(v):
    if v.size == 0:
        return {"max": math.nan, "median": math.nan, "q90": math.nan}
    return {"max": float(np.max(v)), "median": float(np.median(v)), "q90": float(np.quantile(v, 0.9))}


def run_delocalization_experiment(config):
    """||x||_inf sqrt(N) / log(N)^{3/2} for the unit normal x of span(rows 2..N).

    x is the last right singular vector of the (N-1) x N matrix of rows 2..N;
    a trial is degenerate when that matrix is rank deficient (kernel of
    dimension above one).
    """
    out = np.array(map_trials(partial(_deloc_trial, config), config.trials, config.workers))
    stat, norms, bad = out[:, 0], out[:, 1], out[:, 2].astype(bool)
    good = stat[~bad]
    return {"N": config.N, "trials": config.trials, "degenerate_count": int(bad.sum()),
            "max_unit_error": float(np.max(np.abs(norms - 1.0))), **_quantiles(good),
            "statistic": stat.tolist()}


def inverse_entry_ratio(A):
    """max_ij |(A^-1)_ij| / ||A^-1||_HS."""
    inv = np.linalg.inv(A)
    return float(np.max(np.abs(inv)) / np.linalg.norm(inv))


def _inverse_trial(config, i):
    A = sample_wigner(config.ensemble, config.master_seed, i).entries
    s = singular_values(A)
    if s[0] == 0.0 or s[-1] / s[0] < RANK_TOL:
        return math.nan, True
    return inverse_entry_ratio(A), False


def run_inverse_entry_experiment(config):
    """Ratio sup |(A^-1)_ij| / ||A^-1||_HS per trial and its normalization by log(N)^3 / N."""
    out = map_trials(partial(_inverse_trial, config), config.trials, config.workers)
    ratio = np.array([r for r, _ in out])
    bad = np.array([b for _, b in out])
    N = config.N
    norm_ = ratio[~bad] * N / math.log(N) ** 3
    return {"N": N, "trials": config.trials, "degenerate_count": int(bad.sum()),
            "ratio_max": float(np.max(ratio[~bad])) if norm_.size else math.nan,
            **{f"normalized_{k}": v for k, v in _quantiles(norm_).items()},
            "ratio": ratio.tolist()}


# ---------------------------------------------------------------- spectrum

def _count_trial(config, edges, i):
    A = sample_wigner(config.ensemble, config.master_seed, i).entries
    s = singular_values(A)
    return [count_singular_values(A, lo, hi, "by-sqrt-N", values=s) for lo, hi in zip(edges[:-1], edges[1:])]


def run_spectral_count_experiment(config, edges):
    """Per trial, singular values of A / sqrt(N) counted in [edges[k], edges[k+1]] against the quarter-circle mass."""
    edges = [float(e) for e in edges]
    if len(edges) < 2 or any(b <= a for a, b in zip(edges[:-1], edges[1:])):
        raise ValueError("edges must be increasing with at least two entries")
    return map_trials(partial(_count_trial, config, tuple(edges)), config.trials, config.workers)


def _interlacing_trial(config, i):
    A = sample_wigner(config.ensemble, config.master_seed, i).entries
    res = [interlacing_check(A, r) for r in range(A.shape[0])]
    return all(r.ok for r in res), max(r.max_violation for r in res), res[0].tolerance


def run_interlacing_experiment(config):
    """Remove each row in turn and check that the singular values interlace.

    Returns a list of ``(ok, max_violation, tolerance)`` per trial.
    """
    return map_trials(partial(_interlacing_trial, config), config.trials, config.workers)


# ---------------------------------------------------------------- identity suite

IDENTITY_THRESHOLDS = {
    "distance_decomposition": 1e-8,
    "truncated_term": 1e-8,
    "rank_one_update": 1e-10,
    "schur_block_inverse": 1e-10,
    "qq_inverse": 1e-8,
    "diagonal_entry": 1e-8,
    "trace_identity": 1e-8,
    "trace_aggregate": 1e-8,
    "correction_excess": 1e-8,
}


def identity_instance(seed, i, n_range=(10, 60)):
    """(N, n) of instance i: N uniform in n_range, m cycling through 2, ceil(N/4), ceil(N/2)."""
    rng = trial_rng(seed, i, stream=5)
    N = int(rng.integers(n_range[0], n_range[1] + 1))
    m = (2, math.ceil(N / 4), math.ceil(N / 2))[i % 3]
    return N, N - m


def _identity_trial(seed, n_range, perturb, i):
    N, n = identity_instance(seed, i, n_range)
    A = sample_wigner(EnsembleSpec("standard-gaussian", N), seed, i).entries
    try:
        return N, n, verify_instance(A, n, perturb)
    except (DegeneracyError, RankDeficiencyError) as exc:
        return N, n, str(exc)


def run_identity_suite(instances=200, seed=0, n_range=(10, 60), perturb=None, workers=1,
                       thresholds=None):
    """Every exact identity against its direct oracle over a grid of symmetric Gaussian instances.

    Any error above its threshold is a violation recorded with the seed and
    instance index that reproduce it. Instances where a formula's denominator
    is degenerate are listed under ``degenerate``; they are not violations,
    but ``checked`` counts only the rest. An empty grid passes vacuously and
    says so.
    """
    thr = dict(IDENTITY_THRESHOLDS if thresholds is None else thresholds)
    results = map_trials(partial(_identity_trial, seed, tuple(n_range), perturb), instances, workers)
    worst = {k: 0.0 for k in thr}
    violations, degenerate = [], []
    for i, (N, n, errs) in enumerate(results):
        if isinstance(errs, str):
            degenerate.append({"seed": seed, "instance": i, "N": N, "n": n, "reason": errs})
            continue
        for key, val in errs.items():
            worst[key] = max(worst.get(key, -math.inf), val)
            if not val <= thr[key]:
                violations.append({"seed": seed, "instance": i, "N": N, "n": n, "check": key,
                                   "error": val, "threshold": thr[key]})
    return {"instances": instances, "seed": seed, "vacuous": instances == 0,
            "checked": instances - len(degenerate), "passed": not violations, "violations": violations,
            "degenerate": degenerate, "max_error": worst,
            "thresholds": thr}


# ---------------------------------------------------------------- output

def records_csv(records):
    lines = [TrialRecord.CSV_HEADER] + [r.csv_row() for r in sorted(records, key=lambda r: r.trial_index)]
    return "\n".join(lines) + "\n"


def histogram_svg(hist, width=640, height=400, title=None, xlabel="(dist^2 - m) / sqrt(m)", ylabel="count"):
    """Static SVG bar chart of a histogram with labelled axes."""
    pad_l, pad_r, pad_t, pad_b = 60, 20, 40, 50
    w, h = width - pad_l - pad_r, height - pad_t - pad_b
    edges, counts = np.asarray(hist.edges), np.asarray(hist.counts)
    lo, hi = float(edges[0]), float(edges[-1])
    top = max(1, int(counts.max()))

    def sx(v):
        return pad_l + (v - lo) / (hi - lo) * w

    def sy(c):
        return pad_t + h - c / top * h

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">',
             '<rect width="100%" height="100%" fill="white"/>']
    for a, b, c in zip(edges[:-1], edges[1:], counts):
        parts.append(f'<rect class="bar" x="{sx(a):.2f}" y="{sy(c):.2f}" width="{max(sx(b) - sx(a) - 1, 0.5):.2f}" '
                     f'height="{pad_t + h - sy(c):.2f}" fill="#4878a8"/>')
    parts.append(f'<line x1="{pad_l}" y1="{pad_t + h}" x2="{pad_l + w}" y2="{pad_t + h}" stroke="black"/>')
    parts.append(f'<line x1="{pad_l}" y1="{pad_t}" x2="{pad_l}" y2="{pad_t + h}" stroke="black"/>')
    for v in np.linspace(lo, hi, 5):
        parts.append(f'<text x="{sx(v):.2f}" y="{pad_t + h + 16}" font-size="11" text-anchor="middle">{v:.2f}</text>')
    for c in np.linspace(0, top, 5):
        parts.append(f'<text x="{pad_l - 6}" y="{sy(c) + 4:.2f}" font-size="11" text-anchor="end">{int(round(c))}</text>')
    parts.append(f'<text x="{pad_l + w / 2}" y="{height - 10}" font-size="13" text-anchor="middle">{xlabel}</text>')
    parts.append(f'<text x="16" y="{pad_t + h / 2}" font-size="13" text-anchor="middle" '
                 f'transform="rotate(-90 16 {pad_t + h / 2})">{ylabel}</text>')
    title = title or f"{hist.model}: {hist.samples} samples"
    parts.append(f'<text x="{width / 2}" y="24" font-size="14" text-anchor="middle">{title}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if hasattr(obj, "to_dict"):
        return _jsonable(obj.to_dict())
    if hasattr(obj, "__dataclass_fields__"):
        return _jsonable(asdict(obj))
    return obj


def summary_json(config, statistics, fitted=None, degenerate_count=0, extra=None):
    """JSON summary {config, statistics, fitted constants, degenerate_count} (+ extra keys)."""
    doc = {"config": config.to_dict() if hasattr(config, "to_dict") else config,
           "statistics": statistics, "fitted": fitted or {}, "degenerate_count": int(degenerate_count)}
    doc.update(extra or {})
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"


def load_acceptance():
    """Acceptance configurations and tolerances shipped with the package."""
    return json.loads(resources.files("wigdist").joinpath("data/acceptance.json").read_text())
