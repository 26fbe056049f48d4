import math
import time

import numpy as np
import pytest

from wigdist.cli import main as cli_main
from wigdist.ensembles import EnsembleSpec, trial_rng
from wigdist.experiments import (
    ExperimentConfig,
    load_acceptance,
    lower_tail,
    run_delocalization_experiment,
    run_distance_experiment,
    run_identity_suite,
    run_independent_distance_experiment,
    run_interlacing_experiment,
    run_inverse_entry_experiment,
    run_spectral_count_experiment,
    sv_scaling_study,
)
from wigdist.lcd import LcdParams, fit_small_ball_constant, lcd, levy_concentration, small_ball_bound

ACC = load_acceptance()


def cfg(kind, N, n, trials, seed, grid=()):
    return ExperimentConfig(EnsembleSpec(kind, N), N, n, trials, seed, grid)


def test_identity_suite(verdict):
    c = ACC["identities"]
    start = time.perf_counter()
    rep = run_identity_suite(c["instances"], c["seed"], tuple(c["n_range"]))
    elapsed = time.perf_counter() - start
    worst = max(rep["max_error"].values())
    ok = rep["passed"] and not rep["vacuous"] and elapsed < c["max_runtime_s"]
    verdict(1, "identity suite", ok,
            f"{rep['checked']} checked, {len(rep['degenerate'])} degenerate, {len(rep['violations'])} violations, "
            f"max error {worst:.2e}, {elapsed:.1f}s")


def _histogram(verdict, c, number, label):
    details, ok = [], True
    for kind in c["ensembles"]:
        start = time.perf_counter()
        records, hist = run_distance_experiment(cfg(kind, c["N"], c["n"], c["trials"], c["seed"]), bins=c["bins"])
        elapsed = time.perf_counter() - start
        lo, hi = c["variance"]
        good = (hist.unimodal and abs(hist.mean) <= c["max_abs_mean"] and lo <= hist.variance <= hi
                and elapsed < c["max_runtime_s"])
        ok &= good
        details.append(f"{kind} mean {hist.mean:+.3f} var {hist.variance:.3f} "
                       f"unimodal {hist.unimodal} ({elapsed:.0f}s)")
    verdict(number, label, ok, "; ".join(details))


def test_histogram_reduced(verdict):
    _histogram(verdict, ACC["histogram_reduced"], 2, "distance histogram, reduced scale")


@pytest.mark.slow
def test_histogram_full_scale(verdict):
    _histogram(verdict, ACC["histogram_full"], 2, "distance histogram, full scale")


def test_independent_tail(verdict):
    c = ACC["independent_tail"]
    curve = run_independent_distance_experiment(cfg("standard-gaussian", c["N"], c["N"] - c["m"], c["trials"],
                                                    c["seed"], c["t"]))
    fit = curve.fit
    k = int(np.argmin(np.abs(curve.t - c["t_check"])))
    bound = math.exp(-c["t_check"] ** 2 / fit["K"])
    # a line through the positive points needs two of them; otherwise the origin fit carries the slope
    slope = fit.get("slope", fit["slope_origin"])
    ok = slope < 0 and fit["slope_origin"] < 0 and curve.is_monotone() and curve.wilson_low[k] <= bound
    verdict(3, "independent-model tail", ok,
            f"P = {np.round(curve.probability, 4).tolist()}, slope {slope:.3f}, K {fit['K']:.3f}, "
            f"Wilson [{curve.wilson_low[k]:.4f}, {curve.wilson_high[k]:.4f}] at t={c['t_check']:g} "
            f"vs exp(-t^2/K) = {bound:.4f}")


def test_lower_tail(verdict):
    c = ACC["lower_tail"]
    records, _ = run_distance_experiment(cfg(c["ensemble"], c["N"], c["N"] - c["m"], c["trials"], c["seed"]))
    p, lo, hi = lower_tail(records, c["m"], c["lambda"])
    verdict(4, "distance lower tail", p <= c["max_probability"],
            f"P(dist <= sqrt(m) - {c['lambda']:g}) = {p:.4f} (Wilson [{lo:.4f}, {hi:.4f}]), {c['ensemble']}")


def test_sv_scaling(verdict):
    c = ACC["sv_scaling"]
    curves = sv_scaling_study(c["sizes"], c["trials"], c["seed"], eps_grid=c["eps_grid"])
    medians = [curves[N].fit["median_ratio"] for N in c["sizes"]]
    at_fixed = [float(curves[N].probability[list(curves[N].t).index(c["eps_fixed"])]) for N in c["sizes"]]
    monotone = all(curves[N].is_monotone() for N in c["sizes"])
    spread = max(medians) / min(medians)
    ok = spread <= c["max_median_ratio"] and monotone and all(np.diff(at_fixed) <= 0)
    verdict(5, "least singular value scaling", ok,
            f"medians {np.round(medians, 3).tolist()} (spread x{spread:.2f}), "
            f"P(eps={c['eps_fixed']:g}) {at_fixed}, nondecreasing in eps {monotone}")


def test_quarter_circle(verdict):
    c = ACC["quarter_circle"]
    edges = np.linspace(c["lo"], c["hi"], c["intervals"] + 1)
    per_trial = run_spectral_count_experiment(cfg("standard-gaussian", c["N"], c["N"] - 1, c["trials"], c["seed"]),
                                              edges)
    within = [sum(x.relative_deviation <= c["rel_tol"] for x in counts) for counts in per_trial]
    verdict(6, "quarter-circle counts", min(within) >= c["min_intervals"],
            f"intervals within {c['rel_tol']:.0%} per trial: min {min(within)}, all {within}")


def test_interlacing(verdict):
    c = ACC["interlacing"]
    res = run_interlacing_experiment(cfg("standard-gaussian", c["N"], c["N"] - 1, c["trials"], c["seed"]))
    worst = max(v for _, v, _ in res)
    verdict(7, "interlacing", all(ok for ok, _, _ in res),
            f"{len(res)} trials x {c['N']} removals, max violation {worst:.2e} (tolerance {c['rtol']:g} sigma_1)")


def test_delocalization(verdict):
    c = ACC["delocalization"]
    out = [run_delocalization_experiment(cfg("standard-gaussian", N, N - 1, c["trials"], c["seed"]))
           for N in c["sizes"]]
    top = max(o["max"] for o in out)
    medians = [o["median"] for o in out]
    ok = top <= c["max_statistic"] and all(np.diff(medians) <= 0)
    verdict(8, "delocalization", ok,
            f"max {top:.3f}, medians {np.round(medians, 4).tolist()}, "
            f"degenerate {[o['degenerate_count'] for o in out]}")


def test_inverse_entries(verdict):
    c = ACC["inverse_entries"]
    out = [run_inverse_entry_experiment(cfg("standard-gaussian", N, N - 1, c["trials"], c["seed"]))
           for N in c["sizes"]]
    medians = [o["normalized_median"] for o in out]
    verdict(9, "inverse entries", all(np.diff(medians) < 0),
            f"median ratio * N / log^3 N: {np.round(medians, 5).tolist()}")


def lcd_grid_oracle(x, params, bound, step):
    """First k * step <= bound with dist(k step x, Z^N) < min(gamma ||k step x||, alpha)."""
    last = int(bound / step)
    for start in range(1, last + 1, 100_000):
        k = np.arange(start, min(start + 100_000, last + 1))
        V = (k * step)[:, None] * x
        d = np.linalg.norm(V - np.round(V), axis=1)
        hit = d < np.minimum(params.gamma * np.linalg.norm(V, axis=1), params.alpha)
        if hit.any():
            return k[np.argmax(hit)] * step
    return math.inf


def test_lcd_and_small_ball(verdict):
    c = ACC["lcd_small_ball"]
    rng = trial_rng(c["seed"], 0)
    params = LcdParams(c["lcd_alpha"], c["lcd_gamma"])
    worst = 0.0
    disagree = 0
    for _ in range(c["lcd_vectors"]):
        x = rng.standard_normal(int(rng.integers(1, c["lcd_max_N"] + 1)))
        r = lcd(x, params, c["lcd_search_bound"])
        oracle = lcd_grid_oracle(x, params, c["lcd_search_bound"], c["oracle_step"])
        if r.found != math.isfinite(oracle):
            disagree += 1
            continue
        if r.found:
            gap = abs(r.value - oracle)
            worst = max(worst, gap)
            disagree += gap > max(r.resolution, c["oracle_step"])
    levy = levy_concentration(np.array(c["levy_weights"]), c["levy_radius"]).estimate

    sb = LcdParams(c["sb_alpha"], c["sb_gamma"])
    estimates, eps_values, lcds = [], [], []
    for i in range(c["sb_instances"]):
        r_i = trial_rng(c["seed"], i + 1)
        x = r_i.standard_normal(int(r_i.integers(c["sb_N"][0], c["sb_N"][1] + 1)))
        x /= np.linalg.norm(x)
        D = lcd(x, sb).value
        for mult in c["sb_eps_multiples"]:
            eps = mult / D
            estimates.append(levy_concentration(x, eps).estimate)
            eps_values.append(eps)
            lcds.append(D)
    raw = fit_small_ball_constant(estimates, eps_values, sb)
    C0 = max(1.0, raw)
    exceed = sum(e > small_ball_bound(D, eps, sb, C0) + 1e-12 for e, eps, D in zip(estimates, eps_values, lcds))
    ok = disagree == 0 and levy == c["levy_expected"] and C0 <= c["max_C0"] and exceed == 0
    verdict(10, "LCD and small ball", ok,
            f"{c['lcd_vectors']} LCDs, {disagree} disagreements, worst gap {worst:.1e}; "
            f"Levy {levy!r}; fitted C0 {raw:.3f} (used {C0:.3f}) over {len(estimates)} estimates, {exceed} above the bound")


def test_determinism(verdict, tmp_path, capsys):
    c = ACC["determinism"]
    outputs = []
    for w in c["workers"]:
        csv = tmp_path / f"w{w}.csv"
        code = cli_main(["dist-hist", "--size", str(c["N"]), "--rows", str(c["n"]), "--trials", str(c["trials"]),
                         "--seed", str(c["seed"]), "--workers", str(w), "--out", str(csv),
                         "--json", str(tmp_path / f"w{w}.json")])
        assert code == 0
        outputs.append(csv.read_bytes())
    capsys.readouterr()
    same = all(o == outputs[0] for o in outputs)
    verdict(11, "determinism", same,
            f"CSV bytes identical across workers {c['workers']}: {same} ({len(outputs[0])} bytes)")
