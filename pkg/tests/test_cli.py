import json
import subprocess
import sys

import pytest

from wigdist.cli import main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_no_arguments_prints_usage_and_exits_one(capsys):
    code, _, err = run([], capsys)
    assert code == 1 and "usage" in err


@pytest.mark.parametrize("argv", [["dist-hist", "--bogus"], ["nonsense"], ["dist-hist", "--trials", "0"],
                                  ["dist-hist", "--size", "10", "--rows", "10"], ["lcd"],
                                  ["identities", "--inject", "diagonal_entry=x"]])
def test_usage_errors_exit_one(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 1 and err.startswith("error:")


def test_help_exits_zero(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["dist-hist", "--help"])
    assert exc.value.code == 0
    assert "--trials" in capsys.readouterr().out


def test_dist_hist_writes_all_outputs(tmp_path, capsys):
    out, js, svg = tmp_path / "d.csv", tmp_path / "d.json", tmp_path / "d.svg"
    argv = ["dist-hist", "--size", "20", "--trials", "15", "--out", str(out), "--json", str(js), "--svg", str(svg)]
    code, _, _ = run(argv, capsys)
    assert code == 0
    assert out.read_text().splitlines()[0] == "trial_index,dist,normalized,sigma_min,degenerate"
    assert len(out.read_text().splitlines()) == 16
    doc = json.loads(js.read_text())
    assert {"config", "statistics", "fitted", "degenerate_count", "flags"} <= set(doc)
    assert doc["config"]["n"] == 18 and doc["config"]["ensemble"]["kind"] == "goe"
    assert svg.read_text().startswith("<svg")
    # refuses to overwrite without --force
    code, _, err = run(argv, capsys)
    assert code == 1 and "--force" in err
    code, _, _ = run(argv + ["--force"], capsys)
    assert code == 0


def test_config_replays_a_run_and_flags_win(tmp_path, capsys):
    first, second, third = (tmp_path / f"{k}.csv" for k in "abc")
    js = tmp_path / "a.json"
    run(["dist-hist", "--size", "16", "--trials", "6", "--seed", "9", "--out", str(first), "--json", str(js)], capsys)
    run(["dist-hist", "--config", str(js), "--out", str(second), "--json", str(tmp_path / "b.json")], capsys)
    assert first.read_bytes() == second.read_bytes()
    run(["dist-hist", "--config", str(js), "--seed", "10", "--out", str(third), "--json", str(tmp_path / "c.json")],
        capsys)
    assert first.read_bytes() != third.read_bytes()
    assert json.loads((tmp_path / "c.json").read_text())["flags"]["seed"] == 10


def test_bad_config_is_a_usage_error(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"colour": "red"}))
    assert run(["dist-hist", "--config", str(cfg)], capsys)[0] == 1
    assert run(["dist-hist", "--config", str(tmp_path / "missing.json")], capsys)[0] == 1


def test_workers_come_from_environment(monkeypatch, tmp_path, capsys):
    monkeypatch.setenv("WIGDIST_WORKERS", "3")
    code, out, _ = run(["sv-tail", "--size", "12", "--trials", "4"], capsys)
    assert code == 0 and json.loads(out)["config"]["workers"] == 3
    code, out, _ = run(["sv-tail", "--size", "12", "--trials", "4", "--workers", "1"], capsys)
    assert json.loads(out)["config"]["workers"] == 1
    monkeypatch.setenv("WIGDIST_WORKERS", "many")
    assert run(["sv-tail", "--size", "12", "--trials", "4"], capsys)[0] == 1


def test_identities_exit_codes(capsys):
    code, out, _ = run(["identities", "--instances", "6", "--max-size", "20"], capsys)
    assert code == 0 and json.loads(out)["statistics"]["passed"]
    code, _, err = run(["identities", "--instances", "6", "--max-size", "20", "--inject", "diagonal_entry=1e-3"],
                       capsys)
    assert code == 1 and "diagonal_entry" in err and "seed 0" in err


def test_degenerate_majority_exits_two(capsys):
    # a 3 x 3 sign matrix is singular more often than not
    code, out, _ = run(["inv-entry", "--size", "3", "--ensemble", "rademacher", "--trials", "400"], capsys)
    doc = json.loads(out)
    assert doc["degenerate_count"] > 200 and code == 2


@pytest.mark.parametrize("argv", [["dist-tail", "--size", "30", "--trials", "20"],
                                  ["dist-tail", "--size", "30", "--trials", "10", "--model", "symmetric"],
                                  ["sv-tail", "--size", "16", "--trials", "5", "--mode", "rect"],
                                  ["hw-check", "--size", "10", "--trials", "20", "--matrix", "spd"],
                                  ["deloc", "--size", "12", "--trials", "3"],
                                  ["inv-entry", "--size", "12", "--trials", "3"],
                                  ["spectral-count", "--size", "50", "--intervals", "3"]])
def test_every_experiment_subcommand_emits_a_summary(argv, capsys):
    code, out, _ = run(argv, capsys)
    assert code == 0
    assert {"config", "statistics", "flags"} <= set(json.loads(out))


def test_lcd_subcommand(capsys):
    code, out, _ = run(["lcd", "--vector", "1,0,0"], capsys)
    res = json.loads(out)["result"]
    assert code == 0 and res["found"] and abs(res["value"] - 0.9) < 1e-6
    code, out, _ = run(["lcd", "--vector", "1,0", "--vector", "0,1"], capsys)
    assert code == 0 and abs(json.loads(out)["result"]["value"] - 0.9) < 1e-2
    assert run(["lcd", "--vector", "1,0", "--vector", "1"], capsys)[0] == 1


def test_smallball_subcommand(capsys):
    code, out, _ = run(["smallball", "--weights", "0.5,0.5,0.5,0.5", "--radius", "0.1"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["estimate"]["estimate"] == 0.375
    code, out, _ = run(["smallball", "--weights", "1,1", "--radius", "0.1", "--mode", "monte-carlo",
                        "--samples", "1000"], capsys)
    assert code == 0 and json.loads(out)["estimate"]["method"] == "monte-carlo"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "wigdist"], capture_output=True, text=True)
    assert proc.returncode == 1 and "usage" in proc.stderr
