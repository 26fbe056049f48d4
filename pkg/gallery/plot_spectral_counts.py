"""
Singular values against the quarter-circle law
==============================================

Count singular values of A / sqrt(N) in short intervals and compare with
N times the quarter-circle mass of each interval.
"""

import numpy as np

from wigdist.ensembles import EnsembleSpec, sample_wigner
from wigdist.spectral import count_singular_values, interlacing_check

N = 1000
A = sample_wigner(EnsembleSpec("standard-gaussian", N), 3, 0)

for lo in np.arange(0.1, 1.1, 0.1):
    c = count_singular_values(A, lo, lo + 0.1)
    print(f"[{lo:.1f}, {lo + 0.1:.1f}]: observed {c.observed:3d}, predicted {c.predicted:6.1f}")

# dropping a row never breaks interlacing
print("interlacing after removing row 0:", interlacing_check(A, 0).ok)
