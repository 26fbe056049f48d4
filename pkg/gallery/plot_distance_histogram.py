"""
Distance of a row to the span of the next rows
==============================================

Sample symmetric Gaussian and sign matrices, measure the distance from the
first row to the span of rows 2..n+1, and histogram (dist^2 - m) / sqrt(m).
"""

from pathlib import Path

from wigdist.ensembles import EnsembleSpec
from wigdist.experiments import ExperimentConfig, histogram_svg, run_distance_experiment

N, n, trials = 200, 180, 400

# one histogram per entry law; the SVG lands next to this script
for kind in ("goe", "rademacher"):
    config = ExperimentConfig(EnsembleSpec(kind, N), N, n, trials, master_seed=42)
    records, hist = run_distance_experiment(config, bins=25)
    print(f"{kind:>10}: mean {hist.mean:+.3f}, variance {hist.variance:.3f}, unimodal {hist.unimodal}")
    Path(__file__).with_name(f"distance_{kind}.svg").write_text(histogram_svg(hist))
