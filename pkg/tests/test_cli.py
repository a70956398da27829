"""Config grammar, CSV schemas, and end-to-end command-line runs."""

from __future__ import annotations

import json
import os

import numpy as np
import pytest

from loewnerqc import __version__
from loewnerqc.cli import RunConfig, _grid_csv, _read_trace_csv
from loewnerqc.errors import ValidationError
from loewnerqc.evolution import EvolutionTrajectory, assemble_vector_field


# -- RunConfig ---------------------------------------------------------------------


def test_config_parse_serialize_roundtrip():
    text = """
# comment lines and blanks are ignored
command = chain

driving.p = koebe:k=0.5
grid.radii = 0.45, 0.9
grid.angular_count = 128
"""
    cfg = RunConfig.parse(text)
    assert cfg.command == "chain"
    assert cfg.settings["grid.radii"] == "0.45, 0.9"
    again = RunConfig.parse(cfg.serialize())
    assert again == cfg
    assert RunConfig.parse(again.serialize()) == again


def test_config_errors():
    with pytest.raises(ValidationError):
        RunConfig.parse("driving.p = koebe:k=0.5\n")  # no command anywhere
    with pytest.raises(ValidationError):
        RunConfig.parse("command = evolve\n", command="chain")  # mismatch
    with pytest.raises(ValidationError):
        RunConfig("evolve", {"no.such.key": "1"})
    with pytest.raises(ValidationError):
        RunConfig("teleport", {})
    with pytest.raises(ValidationError):
        RunConfig.parse("command = evolve\njust a line without equals\n")


def test_config_typed_getters():
    cfg = RunConfig("evolve", {
        "time.t": "1.5", "grid.angular_count": "128",
        "evolve.derivative": "true", "point.z": "0.3,0.4",
        "grid.radii": "0.5, 1.5, 2.5",
    })
    assert cfg.get_float("time.t") == 1.5
    assert cfg.get_float("solver.rtol", 1e-10) == 1e-10
    assert cfg.get_int("grid.angular_count") == 128
    assert cfg.get_bool("evolve.derivative") is True
    assert cfg.get_complex("point.z") == 0.3 + 0.4j
    assert cfg.get_floats("grid.radii") == (0.5, 1.5, 2.5)
    with pytest.raises(ValidationError):
        cfg.get_float("time.t", lo=2.0)
    with pytest.raises(ValidationError):
        RunConfig("evolve", {"time.t": "soon"}).get_float("time.t")
    with pytest.raises(ValidationError):
        RunConfig("evolve", {"grid.angular_count": "12.5"}).get_int(
            "grid.angular_count")
    with pytest.raises(ValidationError):
        RunConfig("evolve", {"evolve.derivative": "maybe"}).get_bool(
            "evolve.derivative")
    with pytest.raises(ValidationError):
        cfg.require("map.catalog")


# -- CSV schema --------------------------------------------------------------------


def test_trace_csv_roundtrip_is_exact(tmp_path):
    rng = np.random.default_rng(20260816)
    radii = [1.2, 1.6, 2.0]
    rows = rng.standard_normal((3, 8)) + 1j * rng.standard_normal((3, 8))
    path = tmp_path / "trace.csv"
    path.write_text(_grid_csv(radii, rows))
    radii_back, rows_back = _read_trace_csv(str(path))
    assert radii_back == radii
    assert np.array_equal(rows_back, rows)  # %.17g round-trips doubles


def test_trace_csv_legacy_mu_columns(tmp_path):
    path = tmp_path / "legacy.csv"
    path.write_text("rho,theta_index,re_mu,im_mu\n"
                    "1.5,0,0.25,-0.125\n"
                    "1.5,1,0.0,0.5\n")
    radii, rows = _read_trace_csv(str(path))
    assert radii == [1.5]
    assert rows[0][0] == 0.25 - 0.125j
    assert rows[0][1] == 0.5j


def test_trace_csv_rejects_malformed(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("rho,theta_index,re\n1.5,0,0.25\n")
    with pytest.raises(ValidationError):
        _read_trace_csv(str(bad))  # missing im column
    holes = tmp_path / "holes.csv"
    holes.write_text("rho,theta_index,re,im\n"
                     "1.5,0,0.1,0.0\n1.5,2,0.1,0.0\n")
    with pytest.raises(ValidationError):
        _read_trace_csv(str(holes))  # theta_index 1 missing
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("rho,theta_index,re,im\n"
                      "1.5,0,0.1,0.0\n2.0,0,0.1,0.0\n2.0,1,0.1,0.0\n")
    with pytest.raises(ValidationError):
        _read_trace_csv(str(ragged))  # circles disagree on count
    with pytest.raises(ValidationError):
        _read_trace_csv(str(tmp_path / "nope.csv"))


# -- subprocess runs ---------------------------------------------------------------


def test_cli_version(run_cli):
    res = run_cli(["--version"])
    assert res.returncode == 0
    assert res.stdout.strip() == f"loewnerqc {__version__}"


def test_cli_evolve_matches_library(run_cli):
    res = run_cli(["evolve", "--tau", "0", "--p", "koebe:k=0.5",
                   "--s", "0", "--t", "1", "--z", "0.3,0.4"], threads=1)
    assert res.returncode == 0, res.stderr
    env = json.loads(res.stdout)
    assert env["artifact"] == {"name": "loewnerqc", "version": __version__}
    assert env["timing"] is None  # serial runs carry no timing noise
    payload = env["payload"]
    assert payload["kind"] == "evolution"
    traj = EvolutionTrajectory(assemble_vector_field("0", "koebe:k=0.5"))
    want = traj.evolve_point(0.0, 1.0, 0.3 + 0.4j)
    got = complex(*payload["value"])
    assert abs(got - want) <= 1e-9


def test_cli_evolve_with_derivative(run_cli):
    res = run_cli(["evolve", "--tau", "0", "--p", "koebe:k=0.5",
                   "--t", "0.5", "--z", "0.2,0.1", "--derivative"], threads=1)
    assert res.returncode == 0, res.stderr
    payload = json.loads(res.stdout)["payload"]
    traj = EvolutionTrajectory(assemble_vector_field("0", "koebe:k=0.5"))
    pair = traj.evolve_with_derivative(0.0, 0.5, 0.2 + 0.1j)
    assert abs(complex(*payload["value"]) - pair.value) <= 1e-9
    assert abs(complex(*payload["derivative"]) - pair.dz) <= 1e-9


def test_cli_timing_present_when_threaded(run_cli):
    res = run_cli(["evolve", "--p", "koebe:k=0.5", "--t", "0.25",
                   "--z", "0.1"], threads=3)
    assert res.returncode == 0, res.stderr
    env = json.loads(res.stdout)
    assert env["timing"]["threads"] == 3
    assert env["timing"]["seconds"] >= 0.0


def test_cli_validation_failures_exit_2(run_cli):
    bad_z = run_cli(["evolve", "--p", "koebe:k=0.5", "--t", "1",
                     "--z", "nope"])
    assert bad_z.returncode == 2
    assert "error:" in bad_z.stderr
    no_input = run_cli(["classify"])
    assert no_input.returncode == 2
    missing = run_cli(["classify", "--input", "/does/not/exist.csv"])
    assert missing.returncode == 2
    bad_threads = run_cli(["evolve", "--p", "const:1", "--t", "1",
                           "--z", "0.1"], threads="abc")
    assert bad_threads.returncode == 2
    bad_demo = run_cli(["demo", "bogus"])
    assert bad_demo.returncode == 2


def test_cli_numerical_failure_exit_3_with_envelope(run_cli, tmp_path):
    out = tmp_path / "failed.json"
    res = run_cli(["extend", "--tau", "0", "--p", "koebe:k=0.5",
                   "--radii", "0.5,1.2,1.5", "--angular-count", "64",
                   "--boundary-tolerance", "1e-15",
                   "--output", str(out)], threads=1)
    assert res.returncode == 3
    assert "error:" in res.stderr
    env = json.loads(out.read_text())
    diag = env["payload"]
    assert diag["kind"] == "error"
    assert diag["type"] == "BoundaryResolutionError"
    assert diag["residual"] > 1e-15
    assert "worst_theta" in diag


def test_cli_classify_csv_input(run_cli, tmp_path):
    n = 128
    theta = 2.0 * np.pi * np.arange(n) / n
    trace = 0.5 * np.exp(-1j * theta)
    path = tmp_path / "trace.csv"
    path.write_text(_grid_csv([1.5, 2.0, 3.0], np.vstack([trace] * 3)))
    res = run_cli(["classify", "--input", str(path)], threads=1)
    assert res.returncode == 0, res.stderr
    payload = json.loads(res.stdout)["payload"]
    assert payload["kind"] == "becker-report"
    assert payload["source"] == "imported"
    assert payload["is_becker"] is False
    assert payload["worst"]["order"] == -1
    assert payload["worst"]["magnitude"] == pytest.approx(0.5, abs=1e-12)


def test_cli_chain_csv_output(run_cli, tmp_path):
    out = tmp_path / "chain.csv"
    res = run_cli(["chain", "--tau", "0", "--p", "koebe:k=0.5",
                   "--radii", "0.45,0.9", "--angular-count", "64",
                   "--format", "csv", "--output", str(out)], threads=1)
    assert res.returncode == 0, res.stderr
    assert f"wrote {out}" in res.stdout
    radii, rows = _read_trace_csv(str(out))
    assert radii == [0.45, 0.9]
    zs = np.asarray(radii)[:, None] * np.exp(
        2j * np.pi * np.arange(64) / 64)[None, :]
    want = zs / (1.0 - 0.5 * zs) ** 2
    assert np.max(np.abs(rows - want)) <= 1e-6


def test_cli_schwarzian_catalog(run_cli):
    res = run_cli(["schwarzian", "--catalog", "f1:k=0.5", "--z", "0"],
                  threads=1)
    assert res.returncode == 0, res.stderr
    payload = json.loads(res.stdout)["payload"]
    assert payload["kind"] == "schwarzian-report"
    assert payload["norm"] == pytest.approx(1.5, abs=1e-9)
    assert complex(*payload["value"]) == pytest.approx(-1.5, abs=1e-9)


def test_cli_range_radial(run_cli):
    # the plane verdict needs the growth integral strictly above 10
    res = run_cli(["range", "--tau", "0", "--p", "const:1",
                   "--horizon", "12"], threads=1)
    assert res.returncode == 0, res.stderr
    payload = json.loads(res.stdout)["payload"]
    assert payload["kind"] == "range-report"
    assert payload["verdict"] == "plane"


def test_cli_config_file_with_flag_override(run_cli, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("command = evolve\n"
                   "driving.p = koebe:k=0.5\n"
                   "time.t = 1\n"
                   "point.z = 0.2\n")
    base = run_cli(["evolve", "--config", str(cfg)], threads=1)
    assert base.returncode == 0, base.stderr
    override = run_cli(["evolve", "--config", str(cfg), "--t", "0"],
                       threads=1)
    assert override.returncode == 0, override.stderr
    z0 = complex(*json.loads(override.stdout)["payload"]["value"])
    assert z0 == pytest.approx(0.2)  # t = s: identity
    z1 = complex(*json.loads(base.stdout)["payload"]["value"])
    assert z1 != pytest.approx(0.2)
    mismatch = run_cli(["chain", "--config", str(cfg)])
    assert mismatch.returncode == 2


def test_cli_figures_opt_in(run_cli, tmp_path):
    plain = run_cli(["beltrami", "--catalog", "f1:k=0.5",
                     "--circles", "1.5,2,3", "--angular-count", "64"],
                    threads=1)
    assert plain.returncode == 0, plain.stderr
    assert "figure:" not in plain.stderr
    fig_dir = tmp_path / "figs"
    res = run_cli(["beltrami", "--catalog", "f1:k=0.5",
                   "--circles", "1.5,2,3", "--angular-count", "64",
                   "--figures", str(fig_dir)], threads=1)
    assert res.returncode == 0, res.stderr
    assert "figure:" in res.stderr
    pngs = [f for f in os.listdir(fig_dir) if f.endswith(".png")]
    assert pngs


def test_cli_demo_koebe(run_cli):
    res = run_cli(["demo", "koebe"], threads=1)
    assert res.returncode == 0, res.stderr
    assert "demo:" in res.stderr
    payload = json.loads(res.stdout)["payload"]
    assert payload["kind"] == "demo"
    assert payload["chain_sup_error"] <= 1e-6
    assert payload["classification"]["is_becker"] is True
    assert payload["extension"]["seam"]["discrepancy"] <= 1e-5
