import csv
import io
import json

import pytest

from covertgeo.cli import run
from covertgeo.harness import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, EXIT_VERIFY, parse_sweep, run_figure


def body(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_throughput_command(tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert run(["throughput", "--out", str(out)]) == EXIT_OK
    text = out.read_text()
    assert text.startswith("# config {")
    header = json.loads(text.splitlines()[0][len("# config "):])
    assert header["p_i_w"] == pytest.approx(0.1) and header["sigma_zb_w"] == pytest.approx(1e-8)
    row = body(text)[0]
    assert float(row["xi_at_pa"]) == pytest.approx(0.9, abs=1e-8)
    # 12 significant digits in scientific notation
    mant = row["eta"].split("e")[0]
    assert len(mant.replace(".", "").lstrip("-")) == 12


def test_sweep_rows_in_order(tmp_path):
    out = tmp_path / "s.csv"
    assert run(["covert-prob", "--sweep", "lambda_i=1e-4,1e-3,1e-2", "--out", str(out)]) == EXIT_OK
    rows = body(out.read_text())
    assert [float(r["lambda_i"]) for r in rows] == [1e-4, 1e-3, 1e-2]
    xs = [float(r["xi_bar"]) for r in rows]
    assert xs[0] < xs[1] < xs[2]


def test_sweep_over_power_in_other_unit(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"p_i_w": 0.1, "rate": 0.5}))
    out = tmp_path / "o.csv"
    assert run(["outage", "--config", str(cfg), "--sweep", "p_i_dbm=10,20", "--out", str(out)]) == EXIT_OK
    a, b = body(out.read_text())
    assert float(a["conn_outage"]) < float(b["conn_outage"])


def test_simulate_reports_half_widths(tmp_path):
    out = tmp_path / "m.csv"
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"rate": 0.5}))
    assert run(["simulate", "--config", str(cfg), "--trials", "20000", "--out", str(out)]) == EXIT_OK
    row = body(out.read_text())[0]
    hw = float(row["xi_bar_half_width"])
    assert abs(float(row["xi_bar_mc"]) - float(row["xi_bar"])) < hw + 3 * hw / 1.96
    assert float(row["conn_outage_half_width"]) > 0


def test_repeated_runs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["simulate", "--trials", "5000", "--backend", "ppp", "--seed", "5", "--sweep", "p_a_dbm=-10,0"]
    assert run(args + ["--out", str(a)]) == EXIT_OK
    assert run(args + ["--out", str(b), "--threads", "3"]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_usage_errors_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"eps": 1.5}')
    assert run(["eval", "--config", str(bad)]) == EXIT_USAGE
    assert "eps" in capsys.readouterr().err
    assert run(["nonsense"]) == EXIT_USAGE
    assert run(["outage"]) == EXIT_USAGE  # no rate
    assert run(["figure"]) == EXIT_USAGE
    assert run(["verify"]) == EXIT_USAGE
    assert run(["eval", "--sweep", "trials=1,2"]) == EXIT_USAGE
    assert run(["figure", "--fig", "4", "--sweep", "eps=0.1"]) == EXIT_USAGE


def test_row_failures_exit_2_and_keep_the_table(tmp_path):
    out = tmp_path / "e.csv"
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"fading": "rayleigh", "sigma_z_w": 1e-2}))
    code = run(["throughput", "--config", str(cfg), "--sweep", "delta=1e-10,0.1", "--out", str(out)])
    rows = body(out.read_text())
    assert len(rows) == 2
    assert code == EXIT_NUMERICAL
    assert rows[0]["error"] and not rows[1]["error"]


def test_verify_writes_json(tmp_path):
    out = tmp_path / "v.json"
    assert run(["verify", "--target", "prop3", "--out", str(out)]) == EXIT_OK
    rep = json.loads(out.read_text())
    assert rep["passed"] and rep["target"] == "prop3"
    assert all({"name", "passed", "deviation", "tolerance"} <= set(a) for a in rep["assertions"])


def test_verify_failure_exit_3(tmp_path):
    # below the plateau: with a grid ending at low density eta is still rising
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"sigma_zb_w": 1e-2}))
    out = tmp_path / "v.json"
    assert run(["verify", "--target", "cor1", "--config", str(cfg), "--out", str(out)]) == EXIT_VERIFY
    rep = json.loads(out.read_text())
    assert not rep["passed"]


def test_figure_with_custom_grid_and_gnuplot(tmp_path):
    out, gp = tmp_path / "f.csv", tmp_path / "f.gp"
    args = ["figure", "--fig", "6", "--sweep", "eps=0.05,0.1,0.3", "--trials", "5000",
            "--out", str(out), "--gnuplot", str(gp)]
    assert run(args) == EXIT_OK
    rows = body(out.read_text())
    assert len(rows) == 6 and {r["fading"] for r in rows} == {"nonfading", "rayleigh"}
    for fading in ("nonfading", "rayleigh"):
        eta = [float(r["analytic"]) for r in rows if r["fading"] == fading]
        assert eta == sorted(eta)
    assert "plot" in gp.read_text()
    assert "# grid eps" in out.read_text()


def test_figure_seven_flat_then_decreasing():
    t = run_figure(7, {"trials": 2000})
    for fading in ("nonfading", "rayleigh"):
        eta = [r["analytic"] for r in t.rows if r["fading"] == fading]
        assert all(b <= a for a, b in zip(eta, eta[1:]))
        assert abs(eta[1] / eta[0] - 1) < 1e-5
        assert eta[-1] < 0.9 * eta[0]


def test_figure_mc_column_brackets_analytic():
    t = run_figure(2, {"trials": 20000})
    ok = [abs(r["mc_mean"] - r["analytic"]) <= 3 * max(r["mc_half_width"], 1e-4) for r in t.rows]
    assert sum(ok) >= 0.95 * len(ok)


def test_parse_sweep():
    assert parse_sweep("eps=0.1, 0.2") == ("eps", (0.1, 0.2))
    assert parse_sweep("fading=nonfading,rayleigh") == ("fading", ("nonfading", "rayleigh"))
    for bad in ("eps", "eps=", "eps=a,b", "seed=1"):
        with pytest.raises(ValueError):
            parse_sweep(bad)
