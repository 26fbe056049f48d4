"""Command-line front end: ``wigdist <subcommand> [flags]``.

Exit codes: 0 success, 1 usage error, 2 when more than half of the trials
were degenerate. Output files are never overwritten without ``--force``.
Values resolve as explicit flag > ``--config`` file > default; the default
worker count comes from ``WIGDIST_WORKERS``.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .ensembles import KINDS, EnsembleSpec
from .experiments import (
    ExperimentConfig,
    lower_tail,
    records_csv,
    histogram_svg,
    run_delocalization_experiment,
    run_distance_experiment,
    run_hanson_wright_check,
    run_identity_suite,
    run_independent_distance_experiment,
    run_inverse_entry_experiment,
    run_spectral_count_experiment,
    run_sv_tail_experiment,
    summary_json,
    tail_curve,
)
from .lcd import LcdParams, NotApplicableError, lcd, lcd_multi, levy_concentration, small_ball_bound
from .spectral import interval_counts_csv

WORKERS_ENV = "WIGDIST_WORKERS"

# keys that describe where results go rather than what is computed
OUTPUT_KEYS = {"out", "json", "svg", "force", "config"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _floats(text):
    try:
        return [float(v) for v in str(text).replace(";", ",").split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


DEFAULTS = {
    "common": {"seed": 0, "trials": 100, "workers": None, "force": False, "out": None, "json": None,
               "config": None},
    "dist-hist": {"size": 400, "rows": None, "ensemble": "goe", "bins": 30, "svg": None},
    "dist-tail": {"size": 400, "rows": None, "ensemble": "standard-gaussian", "model": "independent",
                  "t_grid": [0.0, 1.0, 2.0, 3.0]},
    "sv-tail": {"size": 200, "rows": None, "ensemble": "standard-gaussian", "mode": "square",
                "eps_grid": [0.01, 0.03, 0.1, 0.3, 1.0, 3.0]},
    "hw-check": {"size": 100, "ensemble": "standard-gaussian", "matrix": "identity",
                 "t_grid": [0.5, 1.0, 1.5, 2.0, 2.5, 3.0]},
    "deloc": {"size": 200, "ensemble": "standard-gaussian"},
    "inv-entry": {"size": 200, "ensemble": "standard-gaussian"},
    "identities": {"instances": 200, "min_size": 10, "max_size": 60, "inject": None},
    "spectral-count": {"size": 1000, "ensemble": "standard-gaussian", "lo": 0.1, "hi": 1.1, "intervals": 10,
                       "trials": 1},
    "lcd": {"vector": None, "alpha": 0.1, "gamma": 0.9, "search_bound": None},
    "smallball": {"weights": None, "radius": 0.1, "mode": "exact", "distribution": "rademacher",
                  "samples": 100000, "alpha": 1.5, "gamma": 0.5, "c0_constant": 1.0},
}


def _add_common(p, trials=True):
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    if trials:
        p.add_argument("--trials", type=int, help="number of trials")
    p.add_argument("--workers", type=int, help=f"worker processes (default ${WORKERS_ENV} or 1)")
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--json", help="JSON summary path (default: standard output)")
    p.add_argument("--config", help="JSON file of flag values; explicit flags take precedence")
    p.add_argument("--force", action="store_true", default=None, help="overwrite existing output files")


def _add_matrix(p, kinds=KINDS):
    p.add_argument("--size", type=int, help="matrix dimension N")
    p.add_argument("--ensemble", choices=kinds, help="scalar law of the entries")


def build_parser():
    parser = _Parser(prog="wigdist", description="Distance concentration experiments for Wigner matrices.")
    parser.add_argument("--version", action="version", version=f"wigdist {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("dist-hist", help="histogram of (dist^2 - m)/sqrt(m), symmetric model")
    _add_matrix(p)
    p.add_argument("--rows", type=int, help="subspace rows n (rows 2..n+1); default N - ceil(N/10)")
    p.add_argument("--bins", type=int)
    p.add_argument("--svg", help="SVG histogram path")
    _add_common(p)

    p = sub.add_parser("dist-tail", help="tail of |dist - sqrt(m)|")
    _add_matrix(p)
    p.add_argument("--rows", type=int)
    p.add_argument("--model", choices=["independent", "symmetric"])
    p.add_argument("--t-grid", dest="t_grid", type=_floats)
    _add_common(p)

    p = sub.add_parser("sv-tail", help="least singular value lower tail")
    _add_matrix(p)
    p.add_argument("--rows", type=int, help="rows n for --mode rect; default N - ceil(N/4)")
    p.add_argument("--mode", choices=["square", "rect"])
    p.add_argument("--eps-grid", dest="eps_grid", type=_floats)
    _add_common(p)

    p = sub.add_parser("hw-check", help="Hanson-Wright quadratic form tails")
    _add_matrix(p, [k for k in KINDS if k != "goe"])
    p.add_argument("--matrix", choices=["identity", "projection", "spd", "zero"])
    p.add_argument("--t-grid", dest="t_grid", type=_floats)
    _add_common(p)

    p = sub.add_parser("deloc", help="sup norm of the unit normal to rows 2..N")
    _add_matrix(p)
    _add_common(p)

    p = sub.add_parser("inv-entry", help="largest inverse entry relative to the HS norm")
    _add_matrix(p)
    _add_common(p)

    p = sub.add_parser("identities", help="exact identity suite against direct oracles")
    p.add_argument("--instances", type=int)
    p.add_argument("--min-size", dest="min_size", type=int)
    p.add_argument("--max-size", dest="max_size", type=int)
    p.add_argument("--inject", help="CHECK=OFFSET, perturb one formula to test the harness")
    _add_common(p, trials=False)

    p = sub.add_parser("spectral-count", help="singular value counts vs the quarter-circle law")
    _add_matrix(p)
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--intervals", type=int)
    _add_common(p)

    p = sub.add_parser("lcd", help="LCD of one vector (several --vector flags: joint LCD)")
    p.add_argument("--vector", action="append", type=_floats, help="comma-separated coordinates")
    p.add_argument("--alpha", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--search-bound", dest="search_bound", type=float)
    p.add_argument("--json", help="JSON output path (default: standard output)")
    p.add_argument("--config")
    p.add_argument("--force", action="store_true", default=None)

    p = sub.add_parser("smallball", help="Lévy concentration of a Rademacher sum")
    p.add_argument("--weights", type=_floats, help="comma-separated coefficients")
    p.add_argument("--radius", type=float)
    p.add_argument("--mode", choices=["exact", "monte-carlo"])
    p.add_argument("--distribution", choices=["rademacher", "gaussian"])
    p.add_argument("--samples", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--c0-constant", dest="c0_constant", type=float, help="constant in the LCD small-ball bound")
    p.add_argument("--seed", type=int)
    p.add_argument("--json")
    p.add_argument("--config")
    p.add_argument("--force", action="store_true", default=None)
    return parser


def resolve(command, args):
    """Merge explicit flags, the optional config file and defaults into one dict."""
    values = {**DEFAULTS["common"], **DEFAULTS[command]}
    explicit = {k: v for k, v in vars(args).items() if k != "command" and v is not None}
    if explicit.get("config"):
        try:
            doc = json.loads(Path(explicit["config"]).read_text())
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {explicit['config']}: {exc}") from exc
        doc = doc.get("flags", doc)
        unknown = set(doc) - set(values)
        if unknown:
            raise UsageError(f"unknown keys in config: {sorted(unknown)}")
        values.update({k: v for k, v in doc.items() if k not in OUTPUT_KEYS})
    values.update(explicit)
    if values.get("workers") is None:
        env = os.environ.get(WORKERS_ENV)
        try:
            values["workers"] = int(env) if env else 1
        except ValueError as exc:
            raise UsageError(f"{WORKERS_ENV} must be an integer, got {env!r}") from exc
    for key in ("trials", "workers", "size", "instances", "intervals", "samples", "bins"):
        if key in values and values[key] is not None and values[key] < 1:
            raise UsageError(f"--{key} must be at least 1")
    return values


def _check_outputs(values):
    for key in ("out", "json", "svg"):
        path = values.get(key)
        if path and Path(path).exists() and not values.get("force"):
            raise UsageError(f"{path} exists; pass --force to overwrite")


def _write(path, text):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _rows(values, fraction):
    """Explicit --rows, else N minus ceil(fraction * N)."""
    if values.get("rows") is not None:
        return values["rows"]
    N = values["size"]
    return N - max(1, math.ceil(fraction * N))


def _config(values, n):
    spec = EnsembleSpec(values["ensemble"], values["size"])
    try:
        return ExperimentConfig(spec, values["size"], n, values["trials"], values["seed"],
                                tuple(values.get("t_grid") or ()), values["workers"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _finish(values, config, statistics, fitted=None, degenerate=0, csv=None, extra=None):
    if csv is not None and values.get("out"):
        Path(values["out"]).write_text(csv)
    flags = {k: v for k, v in values.items()}
    _write(values.get("json"), summary_json(config, statistics, fitted, degenerate, {"flags": flags, **(extra or {})}))
    trials = config.trials if hasattr(config, "trials") else 0
    return 2 if trials and degenerate > 0.5 * trials else 0


def _per_trial_csv(header, columns):
    rows = [header] + [",".join(repr(float(c)) if not isinstance(c, (int, np.integer)) else str(int(c))
                                for c in row) for row in zip(*columns)]
    return "\n".join(rows) + "\n"


def cmd_dist_hist(v):
    cfg = _config(v, _rows(v, 0.1))
    records, hist = run_distance_experiment(cfg, bins=v["bins"])
    bad = sum(r.degenerate for r in records)
    if v.get("svg") and hist is not None:
        Path(v["svg"]).write_text(histogram_svg(hist, title=f"{cfg.ensemble.kind}, N={cfg.N}, n={cfg.n}"))
    stats_ = {"histogram": hist, "model": cfg.ensemble.kind}
    return _finish(v, cfg, stats_, {}, bad, records_csv(records))


def cmd_dist_tail(v):
    cfg = _config(v, _rows(v, 0.1))
    if v["model"] == "independent":
        if cfg.ensemble.kind == "goe":
            raise UsageError("the independent model needs an iid --ensemble (not goe)")
        curve = run_independent_distance_experiment(cfg)
        dist = curve.samples
        bad = curve.fit.get("degenerate", 0)
        csv = _per_trial_csv("sample,deviation", [np.arange(dist.size), dist])
        return _finish(v, cfg, {"tail": curve}, curve.fit, bad, csv)
    records, _ = run_distance_experiment(cfg)
    good = [r for r in records if not r.degenerate]
    dev = np.abs(np.array([r.dist for r in good]) - math.sqrt(cfg.m))
    curve = tail_curve(dev, cfg.t_grid or (0.0, 1.0, 2.0, 3.0), "upper", "|dist - sqrt(m)|")
    low = lower_tail(records, cfg.m, 3.0) if good else (math.nan,) * 3
    return _finish(v, cfg, {"tail": curve, "lower_tail_at_3": low}, {}, len(records) - len(good),
                   records_csv(records))


def cmd_sv_tail(v):
    n = v["size"] - 1 if v["mode"] == "square" else _rows(v, 0.25)
    cfg = _config(v, n)
    curve = run_sv_tail_experiment(cfg, v["mode"], v["eps_grid"])
    csv = _per_trial_csv("trial_index,sigma_ratio", [np.arange(curve.samples.size), curve.samples])
    return _finish(v, cfg, {"tail": curve}, curve.fit, 0, csv)


def cmd_hw_check(v):
    cfg = _config(v, 1)
    res = run_hanson_wright_check(cfg, v["matrix"])
    q, nrm = res.quadratic.samples, res.norm.samples
    csv = _per_trial_csv("trial_index,quadratic,norm", [np.arange(q.size), q, nrm])
    return _finish(v, cfg, {"quadratic": res.quadratic, "norm": res.norm},
                   {"C_quadratic": res.C_quadratic, "C_norm": res.C_norm}, 0, csv)


def cmd_deloc(v):
    cfg = _config(v, v["size"] - 1)
    out = run_delocalization_experiment(cfg)
    stat = out.pop("statistic")
    csv = _per_trial_csv("trial_index,statistic", [np.arange(len(stat)), stat])
    return _finish(v, cfg, out, {}, out["degenerate_count"], csv)


def cmd_inv_entry(v):
    cfg = _config(v, v["size"] - 1)
    out = run_inverse_entry_experiment(cfg)
    ratio = np.array(out.pop("ratio"))
    N = cfg.N
    csv = _per_trial_csv("trial_index,ratio,normalized",
                         [np.arange(ratio.size), ratio, ratio * N / math.log(N) ** 3])
    return _finish(v, cfg, out, {}, out["degenerate_count"], csv)


def cmd_identities(v):
    perturb = None
    if v.get("inject"):
        key, _, val = str(v["inject"]).partition("=")
        try:
            perturb = {key: float(val)}
        except ValueError as exc:
            raise UsageError("--inject expects CHECK=OFFSET") from exc
    if not 1 <= v["min_size"] <= v["max_size"]:
        raise UsageError("need 1 <= --min-size <= --max-size")
    rep = run_identity_suite(v["instances"], v["seed"], (v["min_size"], v["max_size"]), perturb, v["workers"])
    lines = ["instance,check,error,threshold"] + [
        f"{x['instance']},{x['check']},{x['error']!r},{x['threshold']!r}" for x in rep["violations"]]
    if v.get("out"):
        Path(v["out"]).write_text("\n".join(lines) + "\n")
    flags = dict(v)
    _write(v.get("json"), summary_json({"instances": v["instances"], "seed": v["seed"]}, rep, {},
                                       len(rep["degenerate"]), {"flags": flags}))
    if rep["violations"]:
        first = rep["violations"][0]
        print(f"identity violation: {first['check']} error {first['error']:.3e} at seed {first['seed']}, "
              f"instance {first['instance']}", file=sys.stderr)
        return 1
    return 2 if v["instances"] and len(rep["degenerate"]) > 0.5 * v["instances"] else 0


def cmd_spectral_count(v):
    cfg = _config(v, v["size"] - 1)
    if not v["lo"] < v["hi"]:
        raise UsageError("need --lo < --hi")
    edges = np.linspace(v["lo"], v["hi"], v["intervals"] + 1)
    per_trial = run_spectral_count_experiment(cfg, edges)
    lines = ["trial_index," + interval_counts_csv([]).strip()]
    for i, counts in enumerate(per_trial):
        lines += [f"{i},{c.csv_row()}" for c in counts]
    within = [sum(c.relative_deviation <= 0.1 for c in counts) for counts in per_trial]
    stats_ = {"intervals": v["intervals"], "within_10pct_per_trial": within,
              "first_trial": [c.__dict__ for c in per_trial[0]]}
    return _finish(v, cfg, stats_, {}, 0, "\n".join(lines) + "\n")


def cmd_lcd(v):
    if not v.get("vector"):
        raise UsageError("lcd needs at least one --vector")
    vecs = v["vector"]
    if len({len(x) for x in vecs}) != 1:
        raise UsageError("all --vector values must have the same length")
    try:
        params = LcdParams(v["alpha"], v["gamma"])
        res = lcd(vecs[0], params, v["search_bound"]) if len(vecs) == 1 else lcd_multi(vecs, params, v["search_bound"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    doc = {"flags": dict(v), "result": res.to_dict()}
    _write(v.get("json"), json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_smallball(v):
    if not v.get("weights"):
        raise UsageError("smallball needs --weights")
    try:
        params = LcdParams(v["alpha"], v["gamma"])
        est = levy_concentration(v["weights"], v["radius"], v["distribution"], v["mode"], v["samples"], v["seed"])
        res = lcd(v["weights"], params)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if res.found:
        try:
            est.theory_bound = small_ball_bound(res.value, v["radius"], params, v["c0_constant"])
        except NotApplicableError:
            est.theory_bound = None
    doc = {"flags": dict(v), "estimate": est.to_dict(), "lcd": res.to_dict()}
    _write(v.get("json"), json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return 0


COMMANDS = {
    "dist-hist": cmd_dist_hist,
    "dist-tail": cmd_dist_tail,
    "sv-tail": cmd_sv_tail,
    "hw-check": cmd_hw_check,
    "deloc": cmd_deloc,
    "inv-entry": cmd_inv_entry,
    "identities": cmd_identities,
    "spectral-count": cmd_spectral_count,
    "lcd": cmd_lcd,
    "smallball": cmd_smallball,
}


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return 1
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("missing subcommand")
        values = resolve(args.command, args)
        _check_outputs(values)
        return COMMANDS[args.command](values)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
