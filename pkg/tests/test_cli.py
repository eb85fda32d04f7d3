import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest
import yaml

from mtescape.cli import CACHE_ENV, EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK, main


def _cfg(tmp_path, name="cfg.yaml", **sections):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(sections))
    return str(p)


def _rows(path):
    return list(csv.DictReader(io.StringIO(path.read_text())))


def _logistic_dfn(xs):
    return abs(math.prod(4 - 8 * x for x in xs))


# ----------------------------------------------------------------- find-param
def test_find_param_full_map(tmp_path):
    cfg = _cfg(tmp_path, map={"solve": {"k0": 2, "p": 1, "bracket": [3.9, 4.0]}})
    assert main(["find-param", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_OK
    rep = json.loads((tmp_path / "o" / "find_param.json").read_text())
    assert float(rep["A"]) == pytest.approx(4.0, abs=1e-13)
    assert (rep["k0"], rep["p"]) == (2, 1)


def test_find_param_second_map(tmp_path):
    cfg = _cfg(tmp_path, map={"solve": {"k0": 3, "p": 5, "bracket": [3.92, 3.94]}})
    assert main(["find-param", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_OK
    rep = json.loads((tmp_path / "o" / "find_param.json").read_text())
    assert abs(float(rep["A"]) - 3.93344) < 2e-4
    assert rep["residual"] < 1e-13
    assert rep["partition_size"] == 7
    assert rep["lambda_tail"] > 1


def test_bad_bracket_is_input_error(tmp_path, capsys):
    cfg = _cfg(tmp_path, map={"solve": {"k0": 2, "p": 1, "bracket": [2.0, 2.5]}})
    assert main(["find-param", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_INPUT
    assert "NoRoot" in capsys.readouterr().err


@pytest.mark.parametrize("raw", [
    {"map": {"A": 4.0}, "eps": {"factor": 1.5}},
    {"map": {"A": 4.0}, "numerics": {"n_bins": 0}},
    {"map": {"A": 4.0}, "bogus": 1},
    {"map": {"solve": {"k0": 2, "p": 1, "bracket": [3.9]}}},
    {"eps": {}},
])
def test_bad_configs_exit_2(tmp_path, raw):
    cfg = _cfg(tmp_path, **raw)
    assert main(["density", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_INPUT


def test_missing_config_file(tmp_path):
    assert main(["density", "--config", str(tmp_path / "nope.yaml"),
                 "--out", str(tmp_path / "o")]) == EXIT_INPUT


def test_numerical_failure_exit_3(tmp_path):
    cfg = _cfg(tmp_path, map={"A": 4.0}, z=0.3, eps={"count": 4},
               numerics={"n_bins": 4096, "method": "mc"}, mc={"n_samples": 50, "seed": 1})
    out = tmp_path / "o"
    assert main(["escape", "--config", cfg, "--out", str(out)]) == EXIT_NUMERICAL
    assert json.loads((out / "manifest.json").read_text())["status"] == EXIT_NUMERICAL


def test_exit_codes_distinct():
    assert len({EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL}) == 3


def test_mc_without_seed(tmp_path):
    cfg = _cfg(tmp_path, map={"A": 4.0}, z=0.3, numerics={"n_bins": 1024})
    assert main(["hts", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_INPUT


# ----------------------------------------------------------------- density
def test_density_single_bin(tmp_path):
    cfg = _cfg(tmp_path, map={"A": 4.0}, numerics={"n_bins": 1})
    out = tmp_path / "o"
    assert main(["density", "--config", cfg, "--out", str(out)]) == EXIT_OK
    rows = _rows(out / "density.csv")
    assert len(rows) == 1
    assert float(rows[0]["value"]) == 1.0 and float(rows[0]["mass"]) == 1.0


def test_density_spikes(tmp_path):
    cfg = _cfg(tmp_path, map={"A": 4.0}, numerics={"n_bins": 1 << 14})
    out = tmp_path / "o"
    assert main(["density", "--config", cfg, "--out", str(out)]) == EXIT_OK
    spikes = json.loads((out / "spikes.json").read_text())["spikes"]
    assert sorted(float(s["point"]) for s in spikes) == [0.0, 1.0]
    for s in spikes:
        assert s["exponent"] == pytest.approx(-0.5, abs=0.07)
    masses = np.array([float(r["mass"]) for r in _rows(out / "density.csv")])
    assert masses.sum() == pytest.approx(1.0, abs=1e-12)


def test_density_warm_cache_identical(tmp_path):
    cfg = _cfg(tmp_path, map={"A": 4.0}, numerics={"n_bins": 2048})
    cache = str(tmp_path / "cache")
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["density", "--config", cfg, "--cache", cache, "--out", str(a)]) == EXIT_OK
    assert main(["density", "--config", cfg, "--cache", cache, "--out", str(b)]) == EXIT_OK
    assert (a / "density.csv").read_bytes() == (b / "density.csv").read_bytes()
    ma = json.loads((a / "manifest.json").read_text())
    mb = json.loads((b / "manifest.json").read_text())
    assert ma["cache_misses"] == {"density": 1} and ma["cache_hits"] == {}
    assert mb["cache_hits"] == {"density": 1}


def test_cache_env_variable(tmp_path, monkeypatch):
    cache = tmp_path / "envcache"
    monkeypatch.setenv(CACHE_ENV, str(cache))
    cfg = _cfg(tmp_path, map={"A": 4.0}, numerics={"n_bins": 256}, cache=str(tmp_path / "cfgcache"))
    out = tmp_path / "o"
    assert main(["density", "--config", cfg, "--out", str(out)]) == EXIT_OK
    assert any(cache.rglob("*.txt"))
    assert not (tmp_path / "cfgcache").exists()
    assert json.loads((out / "manifest.json").read_text())["cache_dir"] == str(cache)


def test_cache_flag_beats_env(tmp_path, monkeypatch):
    monkeypatch.setenv(CACHE_ENV, str(tmp_path / "env"))
    cfg = _cfg(tmp_path, map={"A": 4.0}, numerics={"n_bins": 256})
    assert main(["density", "--config", cfg, "--cache", str(tmp_path / "flag"),
                 "--out", str(tmp_path / "o")]) == EXIT_OK
    assert any((tmp_path / "flag").rglob("*.txt"))
    assert not (tmp_path / "env").exists()


def test_cache_key_depends_on_map(tmp_path):
    cache = str(tmp_path / "c")
    for A, name in ((4.0, "a"), (3.9334240747966653, "b")):
        cfg = _cfg(tmp_path, name=f"{name}.yaml", map={"A": A}, numerics={"n_bins": 256})
        assert main(["density", "--config", cfg, "--cache", cache,
                     "--out", str(tmp_path / name)]) == EXIT_OK
        man = json.loads((tmp_path / name / "manifest.json").read_text())
        assert man["cache_hits"] == {}


def test_manifest_fields(tmp_path):
    cfg = _cfg(tmp_path, map={"A": 4.0}, numerics={"n_bins": 256})
    out = tmp_path / "o"
    main(["density", "--config", cfg, "--out", str(out)])
    man = json.loads((out / "manifest.json").read_text())
    for k in ("command", "config_hash", "versions", "cache_hits", "cache_misses",
              "wall_times", "outputs", "status"):
        assert k in man
    assert man["command"] == "density"
    assert set(man["outputs"]) == {"density.csv", "spikes.json"}
    assert "numpy" in man["versions"] and "mtescape" in man["versions"]
    assert len(man["config_hash"]) == 64


# ----------------------------------------------------------------- escape / hts
ESC = dict(map={"A": 4.0}, z=0.3, eps={"count": 4},
           numerics={"n_bins": 4096, "method": "both"}, mc={"n_samples": 20000, "seed": 5})


def test_escape_determinism_across_workers_and_cache(tmp_path):
    cfg = _cfg(tmp_path, **ESC)
    cache = str(tmp_path / "cache")
    outs = []
    for name, extra in (("w1", ["--workers", "1"]), ("w4", ["--workers", "4"]),
                        ("warm", ["--workers", "2", "--cache", cache]),
                        ("warm2", ["--cache", cache])):
        out = tmp_path / name
        assert main(["escape", "--config", cfg, "--out", str(out)] + extra) == EXIT_OK
        outs.append((out / "escape.csv").read_bytes())
    assert len(set(outs)) == 1
    man = json.loads((tmp_path / "warm2" / "manifest.json").read_text())
    assert man["cache_misses"] == {}
    assert sum(man["cache_hits"].values()) >= 9
    rows = _rows(tmp_path / "w1" / "escape.csv")
    assert len(rows) == 4 and rows[0]["case"] == "nonperiodic"
    for r in rows:
        assert float(r["rate_mc"]) == pytest.approx(float(r["rate_spectral"]),
                                                    abs=3 * float(r["rate_mc_stderr"]) +
                                                    0.05 * float(r["rate_spectral"]))
    assert (tmp_path / "w1" / "escape.svg").read_text().startswith("<svg")


def test_seed_override(tmp_path):
    raw = dict(ESC, numerics={"n_bins": 4096, "method": "mc"})
    cfg = _cfg(tmp_path, **raw)
    a, b = tmp_path / "a", tmp_path / "b"
    main(["escape", "--config", cfg, "--out", str(a), "--seed", "11"])
    main(["escape", "--config", cfg, "--out", str(b), "--seed", "12"])
    ra, rb = _rows(a / "escape.csv"), _rows(b / "escape.csv")
    assert ra[0]["seed"] == "11" and rb[0]["seed"] == "12"
    assert ra[0]["rate_mc"] != rb[0]["rate_mc"]


def test_hts_command(tmp_path):
    cfg = _cfg(tmp_path, map={"A": 4.0}, z=0.3, eps={"count": 3},
               numerics={"n_bins": 4096}, mc={"n_samples": 50000, "seed": 3},
               hts={"alpha": [0.8, 1.0], "t": [1.0, 2.0]})
    out = tmp_path / "o"
    assert main(["hts", "--config", cfg, "--out", str(out)]) == EXIT_OK
    rows = _rows(out / "hts.csv")
    assert len(rows) == 3 * 2 * 2
    assert all(float(r["L_value"]) >= 0 for r in rows)
    rep = json.loads((out / "hts_report.json").read_text())
    assert rep["case"] == "nonperiodic" and len(rep["extrapolated"]) == 4


# ----------------------------------------------------------------- trichotomy
def test_trichotomy_empty_battery(tmp_path):
    cfg = _cfg(tmp_path, map={"A": 4.0}, battery=[])
    assert main(["trichotomy", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_INPUT


def test_trichotomy_full_map_battery(tmp_path, capsys):
    x2 = (5 - math.sqrt(5)) / 8
    battery = [0.0, 0.75, x2, 0.3]
    cfg = _cfg(tmp_path, map={"A": 4.0}, battery=battery, numerics={"n_bins": 1 << 14})
    out = tmp_path / "o"
    assert main(["trichotomy", "--config", cfg, "--out", str(out)]) == EXIT_OK
    rows = _rows(out / "trichotomy.csv")
    # predictions from multipliers of f(x) = 4x(1-x) via f'(x) = 4 - 8x
    lam = [_logistic_dfn([0.0]), _logistic_dfn([0.75]), _logistic_dfn([x2, 4 * x2 * (1 - x2)])]
    oracle = [1 - lam[0] ** -0.5, 1 - 1 / lam[1], 1 - 1 / lam[2], 1.0]
    np.testing.assert_allclose([float(r["predicted"]) for r in rows], oracle, atol=1e-9)
    np.testing.assert_allclose(oracle, [0.5, 0.5, 0.75, 1.0], atol=1e-12)
    assert [r["case"] for r in rows] == ["periodic_in_orbit", "periodic_off_orbit",
                                         "periodic_off_orbit", "nonperiodic"]
    assert all(r["escape_pass"] == "1" for r in rows)
    assert "note" not in capsys.readouterr().err


def test_trichotomy_second_map(tmp_path, capsys):
    cfg = _cfg(tmp_path, map={"solve": {"k0": 3, "p": 5, "bracket": [3.92, 3.94]}},
               battery=["postcritical:3"], numerics={"n_bins": 1 << 14})
    out = tmp_path / "o"
    assert main(["trichotomy", "--config", cfg, "--out", str(out)]) == EXIT_OK
    assert "note" in capsys.readouterr().err
    (row,) = _rows(out / "trichotomy.csv")
    # chain rule along the cycle through z, with the derivative written out by hand
    A = 3.9334240747966653
    z = float(row["z"])
    x, lam = z, 1.0
    for _ in range(5):
        lam *= abs(2 * A * abs(x - 0.5))
        x = A / 4 - A * (x - 0.5) ** 2
    assert abs(x - z) < 1e-9
    assert row["case"] == "periodic_in_orbit" and row["period"] == "5"
    assert float(row["predicted"]) == pytest.approx(1 - lam ** -0.5, abs=1e-9)
    assert row["escape_pass"] == "1"


def test_trichotomy_row_errors_aggregate(tmp_path):
    cfg = _cfg(tmp_path, map={"A": 4.0}, battery=[0.3, 1.5], numerics={"n_bins": 4096})
    out = tmp_path / "o"
    status = main(["trichotomy", "--config", cfg, "--out", str(out)])
    rows = _rows(out / "trichotomy.csv")
    assert len(rows) == 2
    assert rows[0]["error"] == "" and rows[1]["error"] != ""
    assert status == EXIT_INPUT


def test_console_script():
    res = subprocess.run([sys.executable, "-m", "mtescape.cli", "--help"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    for cmd in ("find-param", "density", "escape", "hts", "trichotomy"):
        assert cmd in res.stdout
