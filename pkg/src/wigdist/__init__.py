"""Distance concentration for Wigner matrices.

Sampling (:mod:`wigdist.ensembles`), dense kernels (:mod:`wigdist.linalg`),
exact algebraic identities checked against direct computation
(:mod:`wigdist.identities`), spectral counts (:mod:`wigdist.spectral`),
LCD and small-ball tools (:mod:`wigdist.lcd`) and Monte-Carlo experiments
(:mod:`wigdist.experiments`).
"""
__version__ = "0.1.0"

from .ensembles import EnsembleSpec, MatrixSample, sample_iid, sample_wigner, take_cols, take_rows
from .linalg import (
    DegeneracyError,
    RankDeficiencyError,
    distance_to_rowspace,
    least_singular_value,
    projector_onto_complement,
    svd,
    trace_inverse_gram,
)
from .identities import (
    decompose_distance,
    diagonal_entry_formula,
    qq_inverse_via_schur,
    rank_one_inverse_update,
    schur_block_inverse,
    trace_comparison,
)
from .spectral import count_singular_values, interlacing_check, quarter_circle_mass
from .lcd import LcdParams, classify_compressibility, lcd, lcd_multi, lcd_subspace, levy_concentration
from .experiments import ExperimentConfig, run_distance_experiment, run_identity_suite
