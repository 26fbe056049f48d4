"""
Exact identities behind the distance
====================================

Every identity is checked against a direct computation on one instance,
then a deliberately perturbed formula shows that the harness notices.
"""

from wigdist.ensembles import EnsembleSpec, sample_wigner
from wigdist.experiments import run_identity_suite
from wigdist.identities import decompose_distance, verify_instance

A = sample_wigner(EnsembleSpec("standard-gaussian", 30), 1, 0).entries

# split dist^2 into the truncated distance plus a rank-one correction
dec = decompose_distance(A, 24)
print(f"dist^2 = {dec.total:.6f} = {dec.truncated_term:.6f} + {dec.error_numerator ** 2 / dec.error_denominator:.6f}")

# error of each identity against its oracle; correction_excess is |correction| minus
# the sum of the four error terms, so any negative value passes
for name, err in verify_instance(A, 24).items():
    print(f"{name:>24}: {err:.1e}")

# a 1e-4 offset in one formula must be reported with its seed
report = run_identity_suite(instances=6, seed=0, n_range=(10, 20), perturb={"diagonal_entry": 1e-4})
print("perturbed suite passed:", report["passed"], "first violation:", report["violations"][0]["check"])
