"""Seedable sampling of Wigner-type and iid random matrices.

Every sample is a pure function of ``(spec, seed, trial_index)``: the
generator for a trial is keyed by a :class:`numpy.random.SeedSequence` built
from the master seed and the trial index, so trials can be produced in any
order, by any number of workers, and still come out bit-identical.

Supported scalar laws (``EnsembleSpec.kind``):

================== ==========================================================
standard-gaussian  N(0, 1) for every upper-triangle entry, diagonal included
rademacher         +1 / -1 with probability 1/2 ("symmetric Bernoulli")
goe                N(0, 1) off the diagonal, N(0, 2) on the diagonal
custom-subgaussian N(0, 1) truncated to [-k0, k0], rescaled to variance 1
================== ==========================================================
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

__all__ = [
    "KINDS",
    "EnsembleSpec",
    "MatrixSample",
    "trial_rng",
    "draw_entries",
    "sample_wigner",
    "sample_iid",
    "take_rows",
    "take_cols",
    "spec_from_json",
]

KINDS = ("standard-gaussian", "rademacher", "goe", "custom-subgaussian")

_SEED_MAX = 2**64


@dataclass(frozen=True)
class EnsembleSpec:
    """Recipe for a random matrix ensemble.

    ``k0`` is the subgaussian parameter. It only changes the law for
    ``custom-subgaussian`` (where it is the truncation level); for the other
    kinds it is carried along as metadata.
    """

    kind: str = "standard-gaussian"
    N: int = 1
    symmetric: bool = True
    k0: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown ensemble kind {self.kind!r}; expected one of {KINDS}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"dimension N must be a positive integer, got {self.N!r}")
        if not self.k0 > 0:
            raise ValueError(f"subgaussian parameter k0 must be positive, got {self.k0!r}")

    def to_dict(self, seed=None):
        d = {"kind": self.kind, "N": int(self.N), "symmetric": bool(self.symmetric), "k0": float(self.k0)}
        if seed is not None:
            d["seed"] = int(seed)
        return d

    def to_json(self, seed=None):
        return json.dumps(self.to_dict(seed), sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        return cls(kind=d["kind"], N=int(d["N"]), symmetric=bool(d.get("symmetric", True)),
                   k0=float(d.get("k0", 1.0)))


def spec_from_json(text):
    """Parse ``{kind, N, symmetric, k0, seed}``; returns ``(spec, seed)``, seed may be None."""
    d = json.loads(text)
    seed = d.get("seed")
    return EnsembleSpec.from_dict(d), (None if seed is None else int(seed))


@dataclass
class MatrixSample:
    entries: np.ndarray
    seed: int
    trial_index: int
    spec: EnsembleSpec
    # (row_start, row_stop, col_start, col_stop) relative to the originally sampled matrix
    window: tuple = field(default=None)

    @property
    def shape(self):
        return self.entries.shape


def _check_seed(seed, trial_index):
    seed = int(seed)
    trial_index = int(trial_index)
    if not 0 <= seed < _SEED_MAX:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if trial_index < 0:
        raise ValueError(f"trial_index must be nonnegative, got {trial_index}")
    return seed, trial_index


def trial_rng(seed, trial_index, stream=0):
    """Generator for one trial; ``stream`` separates independent draws within a trial."""
    seed, trial_index = _check_seed(seed, trial_index)
    return np.random.default_rng(np.random.SeedSequence([seed, trial_index, int(stream)]))


def _truncation_scale(k0):
    return float(np.sqrt(stats.truncnorm.var(-k0, k0)))


def draw_entries(kind, size, rng, k0=1.0):
    """iid draws of the standardized scalar law of ``kind`` (``goe`` draws N(0, 1))."""
    if kind in ("standard-gaussian", "goe"):
        return rng.standard_normal(size)
    if kind == "rademacher":
        return 2.0 * rng.integers(0, 2, size=size) - 1.0
    if kind == "custom-subgaussian":
        raw = stats.truncnorm.rvs(-k0, k0, size=size, random_state=rng)
        return raw / _truncation_scale(k0)
    raise ValueError(f"unknown ensemble kind {kind!r}")


def sample_wigner(spec, seed, trial_index):
    """Real symmetric N x N matrix with iid upper-triangle entries.

    Upper-triangle entries (diagonal included) are drawn in row-major order
    from one trial generator and mirrored below the diagonal. For
    ``kind="goe"`` the diagonal is scaled by sqrt(2).
    """
    if not spec.symmetric:
        raise ValueError("sample_wigner needs a symmetric spec; use sample_iid for iid matrices")
    seed, trial_index = _check_seed(seed, trial_index)
    N = int(spec.N)
    rng = trial_rng(seed, trial_index)
    iu = np.triu_indices(N)
    vals = draw_entries(spec.kind, iu[0].size, rng, spec.k0)
    A = np.empty((N, N))
    A[iu] = vals
    A.T[iu] = vals
    if spec.kind == "goe":
        A[np.diag_indices(N)] *= np.sqrt(2.0)
    return MatrixSample(A, seed, trial_index, spec, (0, N, 0, N))


def sample_iid(rows, cols, spec, seed, trial_index):
    """rows x cols matrix of iid entries from the spec's scalar law."""
    rows, cols = int(rows), int(cols)
    if rows < 1 or cols < 1:
        raise ValueError(f"matrix dimensions must be positive, got {rows}x{cols}")
    if spec.kind == "goe":
        raise ValueError("goe is a symmetric ensemble; use standard-gaussian for iid entries")
    seed, trial_index = _check_seed(seed, trial_index)
    rng = trial_rng(seed, trial_index)
    A = draw_entries(spec.kind, (rows, cols), rng, spec.k0)
    return MatrixSample(A, seed, trial_index, spec, (0, rows, 0, cols))


def _resolve(rng_like, length, what):
    if isinstance(rng_like, range):
        if rng_like.step != 1:
            raise ValueError(f"{what} range must be contiguous")
        start, stop = rng_like.start, rng_like.stop
    elif isinstance(rng_like, slice):
        if rng_like.step not in (None, 1):
            raise ValueError(f"{what} slice must be contiguous")
        start = 0 if rng_like.start is None else rng_like.start
        stop = length if rng_like.stop is None else rng_like.stop
    else:
        start, stop = rng_like
    if not 0 <= start < stop <= length:
        raise IndexError(f"{what} range [{start}, {stop}) is empty or outside [0, {length})")
    return start, stop


def _as_sample(sample):
    if isinstance(sample, MatrixSample):
        return sample
    a = np.asarray(sample, dtype=float)
    return MatrixSample(a, 0, 0, None, (0, a.shape[0], 0, a.shape[1]))


def take_rows(sample, row_range):
    """Copy of rows ``[start, stop)`` (0-based, half-open); accepts range, slice or pair."""
    s = _as_sample(sample)
    r0, r1 = _resolve(row_range, s.entries.shape[0], "row")
    w = s.window or (0, s.entries.shape[0], 0, s.entries.shape[1])
    return replace(s, entries=s.entries[r0:r1].copy(), window=(w[0] + r0, w[0] + r1, w[2], w[3]))


def take_cols(sample, col_range):
    """Copy of columns ``[start, stop)`` (0-based, half-open)."""
    s = _as_sample(sample)
    c0, c1 = _resolve(col_range, s.entries.shape[1], "column")
    w = s.window or (0, s.entries.shape[0], 0, s.entries.shape[1])
    return replace(s, entries=s.entries[:, c0:c1].copy(), window=(w[0], w[1], w[2] + c0, w[2] + c1))
