"""End-to-end command-line behavior: exit codes, artifacts, determinism."""

import json
import os

import numpy as np
import pytest

from quatsurf.cli import (ConfigError, RunConfig, _parse_complex,
                          _parse_param_list, main)


def read_report(outdir, command):
    name = command.replace("-", "_") + "_report.json"
    with open(os.path.join(outdir, name)) as fh:
        return json.load(fh)


def last_stderr_json(capsys):
    err = capsys.readouterr().err.strip().split("\n")[-1]
    return json.loads(err)


def test_generate_then_analyze_file_input(tmp_path, capsys):
    out = str(tmp_path / "gen")
    assert main(["generate", "--generator", "cylinder", "--n", "33",
                 "--outdir", out]) == 0
    rep = read_report(out, "generate")
    assert rep["results"]["label"] == "cylinder"
    assert rep["results"]["conformality_residual"] < 1e-3
    assert os.path.exists(os.path.join(out, "cylinder_surface.obj"))
    csv = os.path.join(out, "cylinder_fields.csv")
    assert os.path.exists(csv)

    out2 = str(tmp_path / "ana")
    assert main(["analyze", "--input", csv, "--outdir", out2]) == 0
    rep2 = read_report(out2, "analyze")
    assert rep2["results"]["H"]["mean"] == pytest.approx(0.5, abs=1e-3)
    assert rep2["grid"] == rep["grid"]


def test_analyze_report_structure(tmp_path):
    out = str(tmp_path / "a")
    assert main(["analyze", "--generator", "cylinder", "--n", "65",
                 "--outdir", out]) == 0
    rep = read_report(out, "analyze")
    assert set(rep) == {"command", "config", "config_hash", "grid",
                        "tolerances", "results"}
    assert rep["command"] == "analyze"
    assert len(rep["config_hash"]) == 16
    assert rep["grid"]["ny"] == rep["grid"]["nx"] == 65
    assert set(rep["tolerances"]) == {"closed_tol", "chart_tol",
                                      "umbilic_tol", "classify_tol",
                                      "det_tol"}
    res = rep["results"]
    assert res["H"]["mean"] == pytest.approx(0.5, abs=1e-4)
    assert res["umbilic_count"] == 0
    assert res["weingarten_rel"] < 1e-4
    assert os.path.exists(os.path.join(out, "cylinder_curvature.csv"))


def test_bonnet_command(tmp_path):
    out = str(tmp_path / "b")
    assert main(["bonnet", "--generator", "cylinder", "--n", "33",
                 "--eps", "1.0", "--outdir", out]) == 0
    rep = read_report(out, "bonnet")
    res = rep["results"]
    assert res["metric_rel"] < 1e-8
    assert res["noncongruent"] is True
    assert res["congruence_rms"] > res["congruence_floor"]
    assert os.path.exists(os.path.join(out, "cylinder_mate_plus.obj"))
    assert os.path.exists(os.path.join(out, "cylinder_mate_minus.obj"))


def test_solve_ivp_command(tmp_path):
    out = str(tmp_path / "s")
    assert main(["solve-ivp", "--generator", "cylinder", "--n", "33",
                 "--param", "rotation=0.7853981633974483", "--q", "1j",
                 "--steps", "8", "--outdir", out]) == 0
    rep = read_report(out, "solve-ivp")
    res = rep["results"]
    assert res["wellposed"]["angular_margin_deg"] == pytest.approx(45.0,
                                                                   abs=1e-3)
    assert res["curve_match_rel"] < 1e-4


def test_converge_command(tmp_path, capsys):
    out = str(tmp_path / "c")
    assert main(["converge", "--kind", "weingarten", "--generator",
                 "catenoid", "--n", "17", "--levels", "2",
                 "--outdir", out]) == 0
    rep = read_report(out, "converge")
    assert rep["results"]["grid_sizes"] == [17, 33]
    series = rep["results"]["series"]
    assert all(o > 1.9 for row in series.values() for o in row["orders"])
    text = capsys.readouterr().out
    assert "orders:" in text


def test_unknown_generator_is_config_error(tmp_path, capsys):
    out = str(tmp_path / "e")
    code = main(["analyze", "--generator", "cylinder", "--n", "4",
                 "--outdir", out])
    assert code == 1
    payload = last_stderr_json(capsys)
    assert payload["exit_code"] == 1
    assert payload["error"] == "ConfigError"
    assert payload["module"] == "quatsurf.cli"


def test_numerical_error_has_module_and_operation(tmp_path, capsys):
    out = str(tmp_path / "e2")
    code = main(["dual", "--generator", "catenoid", "--n", "33",
                 "--q", "1j", "--outdir", out])
    assert code == 2
    payload = last_stderr_json(capsys)
    assert payload["exit_code"] == 2
    assert payload["module"] == "quatsurf.duality"
    assert payload["operation"] == "integrate_dual"
    assert "not isothermic" in payload["message"]


def test_error_node_is_machine_readable(tmp_path, capsys):
    # y-stretched plane: valid CSV, but the chart is not conformal, and
    # that failure names the offending node
    path = tmp_path / "bad.csv"
    with open(path, "w") as fh:
        fh.write("x,y,px,py,pz\n")
        for j in range(7):
            for i in range(7):
                fh.write("%g,%g,%g,%g,0\n" % (0.1 * i, 0.1 * j,
                                              0.1 * i, 0.2 * j))
    code = main(["analyze", "--input", str(path),
                 "--outdir", str(tmp_path / "o")])
    assert code == 2
    payload = last_stderr_json(capsys)
    assert payload["module"] == "quatsurf.charts"
    assert payload["operation"] == "build_immersion"
    assert "not conformal" in payload["message"]
    node = payload["node"]
    assert isinstance(node, list) and len(node) == 2
    assert all(isinstance(v, int) and 0 <= v < 7 for v in node)


def test_verify_all_is_byte_identical(tmp_path, capsys):
    outs = [str(tmp_path / "v1"), str(tmp_path / "v2")]
    for out in outs:
        assert main(["verify", "--all", "--n", "33", "--outdir", out]) == 0
    blobs = [open(os.path.join(o, "verify_report.json"), "rb").read()
             for o in outs]
    assert blobs[0] == blobs[1]
    text = capsys.readouterr().out
    assert "FAIL" not in text
    rep = read_report(outs[0], "verify")
    assert rep["results"]["passed"] is True
    assert rep["results"]["failures"] == 0


def test_verify_unknown_check(tmp_path, capsys):
    code = main(["verify", "--check", "no_such_check",
                 "--outdir", str(tmp_path / "v")])
    assert code == 1
    assert last_stderr_json(capsys)["error"] == "ConfigError"


def test_outdir_env_fallback(tmp_path, monkeypatch):
    target = str(tmp_path / "from-env")
    monkeypatch.setenv("QUATSURF_OUTDIR", target)
    assert main(["generate", "--generator", "sphere", "--n", "17"]) == 0
    assert os.path.exists(os.path.join(target, "generate_report.json"))
    # explicit flag wins over the environment
    explicit = str(tmp_path / "explicit")
    assert main(["generate", "--generator", "sphere", "--n", "17",
                 "--outdir", explicit]) == 0
    assert os.path.exists(os.path.join(explicit, "generate_report.json"))


def test_parse_param_list():
    assert _parse_param_list(["radius=2", "rotation=0.5"]) \
        == {"radius": 2.0, "rotation": 0.5}
    assert _parse_param_list(None) == {}
    with pytest.raises(ConfigError):
        _parse_param_list(["radius"])
    with pytest.raises(ConfigError):
        _parse_param_list(["radius=abc"])


def test_parse_complex():
    assert _parse_complex("1j") == 1j
    assert _parse_complex("2") == 2 + 0j
    assert _parse_complex("-1+0.5j") == -1 + 0.5j
    with pytest.raises(ConfigError):
        _parse_complex("nope")


def test_runconfig_validation():
    with pytest.raises(ConfigError, match="n"):
        RunConfig(command="analyze", generator="cylinder", n=3).validate()
    with pytest.raises(ConfigError):
        RunConfig(command="frobnicate").validate()
    with pytest.raises(ConfigError, match="kind"):
        RunConfig(command="converge", generator="cylinder").validate()
    with pytest.raises(ConfigError):
        RunConfig(command="analyze", generator="mobius_strip").validate()
    with pytest.raises(ConfigError, match="eps"):
        RunConfig(command="bonnet", generator="cylinder",
                  eps=-1.0).validate()
    cfg = RunConfig(command="analyze", generator="cylinder")
    cfg.validate()
    d = cfg.as_dict()
    assert d["command"] == "analyze"
