import csv
import io
import os
import subprocess
import sys

import numpy as np
import pytest

from dwadlab import cli, edgeworth
from dwadlab.rng import stream

SIM_CONFIG = """\
# small Monte Carlo cell
dgp = linear
dim = 1
order = 2
n = 60
bandwidth_gamma = 0.3
alphas = 0.05, 0.1
replications = 120
"""


def _csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def _write_data(path, n=50, d=1, seed=0):
    g = stream(seed)
    x = g.standard_normal((n, d))
    y = x.sum(axis=1) + g.standard_normal(n)
    with open(path, "w") as fh:
        fh.write(",".join(["y"] + [f"x{j + 1}" for j in range(d)]) + "\n")
        for yi, xi in zip(y, x):
            fh.write(",".join(repr(float(v)) for v in [yi, *xi]) + "\n")


def test_format_value():
    assert cli.format_value(True) == "true"
    assert cli.format_value(np.bool_(False)) == "false"
    assert cli.format_value(3) == "3"
    assert cli.format_value(0.1) == "0.10000000000000001"
    assert float(cli.format_value(np.float64(1 / 3))) == 1 / 3


def test_kernel_check_order4(capsys):
    assert cli.main(["kernel-check", "--dim", "1", "--order", "4"]) == 0
    rows = _csv(capsys.readouterr().out)
    assert rows and all(r["pass"] == "true" for r in rows)
    assert list(rows[0]) == ["multi_index", "value", "target", "abs_error", "pass"]


def test_kernel_check_bad_order(capsys):
    assert cli.main(["kernel-check", "--dim", "1", "--order", "3"]) == 2
    assert capsys.readouterr().err.startswith("configuration:")


def test_kernel_check_unreachable_tolerance_is_numerical(capsys):
    # quadrature cannot certify moments below its own round-off
    assert cli.main(["kernel-check", "--dim", "1", "--order", "8", "--tol", "1e-300"]) == 4
    assert capsys.readouterr().err.startswith("numerical:")


def test_unknown_flag_is_configuration_error(capsys):
    assert cli.main(["estimate", "--bogus"]) == 2
    assert "configuration:" in capsys.readouterr().err


def test_estimate_missing_file(tmp_path, capsys):
    code = cli.main(["estimate", "--data", str(tmp_path / "missing.csv"), "--dim", "1",
                     "--bandwidth", "0.5"])
    assert code == 3
    assert capsys.readouterr().err.startswith("data:")


@pytest.mark.parametrize("content", ["y,x2\n1,2\n1,3\n1,4\n", "y,x1\n1,a\n", "y,x1\n1\n", "",
                                     "y,x1\n1,2\n2,3\n"])
def test_estimate_malformed_data(tmp_path, capsys, content):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    assert cli.main(["estimate", "--data", str(path), "--dim", "1", "--bandwidth", "0.5"]) == 3


def test_estimate_output(tmp_path):
    data = tmp_path / "d.csv"
    _write_data(data, d=2)
    before = data.read_bytes()
    out = tmp_path / "est.csv"
    assert cli.main(["estimate", "--data", str(data), "--dim", "2", "--bandwidth", "0.6",
                     "--out", str(out)]) == 0
    assert data.read_bytes() == before
    rows = _csv(out.read_text())
    assert [r["direction"] for r in rows] == ["1 0", "0 1"]
    for r in rows:
        assert float(r["ci_al_lo"]) <= float(r["ci_sb_lo"]) <= float(r["estimate"])
        assert float(r["se_sb"]) <= float(r["se_al"])
    assert not [p for p in os.listdir(tmp_path) if p.startswith(".tmp-")]


def test_estimate_degenerate_variance_is_numerical(tmp_path, capsys):
    data = tmp_path / "c.csv"
    data.write_text("y,x1\n1,0\n1,1\n1,2\n1,3\n")
    assert cli.main(["estimate", "--data", str(data), "--dim", "1", "--bandwidth", "0.5"]) == 4
    assert capsys.readouterr().err.startswith("numerical:")


def test_truth_linear(capsys):
    assert cli.main(["truth", "--dgp", "linear", "--dim", "1", "--n", "1000", "--bandwidth", "0.1"]) == 0
    rows = {r["quantity"]: r["value"] for r in _csv(capsys.readouterr().out)}
    assert float(rows["theta_v"]) == pytest.approx(0.28209479, abs=1e-8)
    assert float(rows["delta_v2"]) == pytest.approx(0.07957747, abs=1e-8)
    assert rows["assumption_1f"] == "false"
    assert rows["assumption_1a"] == "true"
    assert "omega_v2" in rows


def test_edgeworth_subcommand(tmp_path):
    cfg = tmp_path / "e.cfg"
    cfg.write_text("n = 1000\nh = 0.125\nd = 1\nP = 2\nsigma_v = 0.4\ndelta_v2 = 0.08\n"
                   "beta_v = -0.2\nkappa1_v = -0.03\nkappa2_v = 0.4\n")
    out = tmp_path / "g.csv"
    assert cli.main(["edgeworth", "--config", str(cfg), "--set", "grid_points=11", "--out", str(out)]) == 0
    rows = _csv(out.read_text())
    assert len(rows) == 11
    x = np.array([float(r["x"]) for r in rows])
    np.testing.assert_allclose([float(r["Phi"]) for r in rows], edgeworth.norm_cdf(x), rtol=1e-15)
    inputs = edgeworth.DwadExpansionInputs(1000, 0.125, 1, 2, 0.4, 0.08, -0.2, -0.03, 0.4)
    np.testing.assert_allclose([float(r["G_SB"]) for r in rows], edgeworth.studentized_sb(inputs, x),
                               rtol=1e-15)


def test_edgeworth_config_errors(tmp_path):
    cfg = tmp_path / "e.cfg"
    cfg.write_text("n = 1000\nh = 0.125\n")
    assert cli.main(["edgeworth", "--config", str(cfg)]) == 2
    cfg.write_text("n = 1000\nn = 5\n")
    assert cli.main(["edgeworth", "--config", str(cfg)]) == 2
    assert cli.main(["edgeworth", "--config", str(tmp_path / "nope.cfg")]) == 2


def test_simulate_requires_seed(tmp_path, capsys):
    cfg = tmp_path / "s.cfg"
    cfg.write_text(SIM_CONFIG)
    assert cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "seed" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_simulate_outputs_and_determinism(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text(SIM_CONFIG)
    outs = []
    for k, threads in enumerate((1, 3, 1)):
        out = tmp_path / f"run{k}"
        assert cli.main(["simulate", "--config", str(cfg), "--out", str(out), "--seed", "11",
                         "--threads", str(threads)]) == 0
        outs.append({name: (out / name).read_bytes()
                     for name in ("results.csv", "cdf_grid.csv", "diagnostics.csv")})
    assert outs[0] == outs[1] == outs[2]
    rows = _csv(outs[0]["results.csv"].decode())
    assert len(rows) == 8
    assert [(r["scheme"], r["alpha"]) for r in rows] == sorted((r["scheme"], r["alpha"]) for r in rows)
    grid = _csv(outs[0]["cdf_grid.csv"].decode())
    assert len(grid) == 161 and "ecdf_studentized_sb" in grid[0]
    diag = {r["key"]: r["value"] for r in _csv(outs[0]["diagnostics.csv"].decode())}
    assert diag["replications"] == "120"
    assert diag["distributional_comparison_ok"] == "false"


def test_simulate_unknown_key(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text(SIM_CONFIG + "kernel_width = 3\n")
    assert cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path), "--seed", "1"]) == 2


def test_simulate_with_bootstrap(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text(SIM_CONFIG + "bootstrap_draws = 10\nbootstrap_outer = 3\n")
    out = tmp_path / "o"
    assert cli.main(["simulate", "--config", str(cfg), "--out", str(out), "--seed", "2",
                     "--set", "schemes=studentized_sb"]) == 0
    diag = {r["key"]: r["value"] for r in _csv((out / "diagnostics.csv").read_text())}
    assert "bootstrap_ratio" in diag and "bootstrap_unstable" in diag


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dwadlab", "kernel-check", "--dim", "2", "--order", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("multi_index,value,target,abs_error,pass\n")
