import json

import numpy as np
import pytest
import yaml

from wavekit import cli, scenario
from wavekit.errors import ConfigurationError


BOX = """\
equation: schrodinger
grid: {kind: line, x_min: 0.0, x_max: 1.0, n_points: 256}
potential: {variant: free}
solver: {n_states: 3}
"""

HARMONIC_REJECT = """\
equation: modified_nr_stationary
grid: {kind: line, x_min: -6.0, x_max: 6.0, n_points: 400}
potential: {variant: harmonic, omega: 1.0}
solver: {e_init: 1.0, state_index: 0, policy: reject}
"""


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


# -- parsing ----------------------------------------------------------------

def test_parse_minimal_box():
    config = scenario.parse_scenario(BOX)
    assert config.equation == "schrodinger"
    assert config.grid.n_points == 256
    assert config.solver["n_states"] == 3
    assert config.solver["tol"] == 1e-10  # default filled in


def test_parse_aggregates_all_failures():
    bad = """\
equation: schroedinger
potential: {variant: quartic}
solver: {n_states: 0, damping: 1.5}
"""
    with pytest.raises(ConfigurationError) as exc:
        scenario.parse_scenario(bad)
    failures = exc.value.failures
    assert len(failures) >= 4
    joined = " ".join(failures)
    assert "n_states" in joined and "damping" in joined


def test_parse_unknown_id_suggests_nearest():
    with pytest.raises(ConfigurationError) as exc:
        scenario.parse_scenario("equation: schrodingr\ngrid: {}\n")
    assert "did you mean 'schrodinger'" in str(exc.value)


def test_parse_rejects_non_mapping():
    with pytest.raises(ConfigurationError):
        scenario.parse_scenario("- 1\n- 2\n")


def test_emit_parse_roundtrip():
    config = scenario.parse_scenario(BOX)
    text = scenario.emit_scenario(config)
    again = scenario.parse_scenario(text)
    assert again.raw == config.raw


# -- determinism ------------------------------------------------------------

def test_repeated_runs_share_payload_digest():
    config = scenario.parse_scenario(BOX)
    r1 = scenario.run_scenario(config)
    r2 = scenario.run_scenario(config)
    assert r1.payload_digest == r2.payload_digest
    assert r1.input_digest == r2.input_digest
    # wall time may differ but lives outside the digested payload
    assert r1.diagnostics["wall_time_s"] != r2.payload_digest


def test_compare_report_with_itself_is_zero():
    report = scenario.run_scenario(scenario.parse_scenario(BOX))
    delta = scenario.compare_reports(report, report)
    assert delta["n_compared"] == 3
    assert delta["warnings"] == []
    np.testing.assert_allclose(delta["energy_deltas"], 0.0)
    assert delta["overlap_deficit_max"] < 1e-14


# -- sweeps -----------------------------------------------------------------

def test_sweep_rows_independent_of_jobs():
    doc = yaml.safe_load(BOX)
    values = [64, 128, 256, 512]
    serial = scenario.run_sweep(doc, "grid.n_points", values, jobs=1)
    threaded = scenario.run_sweep(doc, "grid.n_points", values, jobs=4)
    assert scenario.sweep_table(serial, "grid.n_points") == \
        scenario.sweep_table(threaded, "grid.n_points")


def test_sweep_keeps_going_past_failing_cells():
    doc = yaml.safe_load(BOX)
    cells = scenario.run_sweep(doc, "solver.n_states", [2, 0, 3])
    assert [c["status"] for c in cells] == ["ok", "error", "ok"]
    assert cells[1]["error"]["exit_code"] == scenario.EXIT_CONFIG


# -- CSV contracts ----------------------------------------------------------

def test_spectrum_csv_header_and_rows():
    report = scenario.run_scenario(scenario.parse_scenario(BOX))
    lines = scenario.spectrum_csv(report).splitlines()
    assert lines[0] == "index,energy,node_count,self_consistency_residual"
    assert len(lines) == 4
    first = lines[1].split(",")
    assert first[0] == "0"
    np.testing.assert_allclose(float(first[1]), np.pi**2 / 2.0, rtol=1e-4)


def test_frames_csv_header():
    text = """\
equation: modified_nr_timedep
grid: {kind: line, x_min: 0.0, x_max: 6.283185307179586, n_points: 64, boundary: periodic}
potential: {variant: free}
solver: {dt: 1.0e-3, steps: 20}
"""
    report = scenario.run_scenario(scenario.parse_scenario(text))
    lines = scenario.frames_csv(report).splitlines()
    assert lines[0] == "t,x,re_psi,im_psi"
    assert len(lines) == 1 + 3 * 64  # frames at steps 0, 10, 20


# -- CLI exit codes ---------------------------------------------------------

def test_cli_solve_ok(tmp_path, capsys):
    cfg = _write(tmp_path, "box.yaml", BOX)
    out = str(tmp_path / "report.json")
    assert cli.main(["solve", "--config", cfg, "--out", out]) == 0
    doc = json.loads((tmp_path / "report.json").read_text())
    np.testing.assert_allclose(doc["payload"]["energies"][0],
                               np.pi**2 / 2.0, rtol=1e-4)


def test_cli_missing_config_exits_2(tmp_path):
    code = cli.main(["solve", "--config", str(tmp_path / "nope.yaml"),
                     "--quiet"])
    assert code == 2


def test_cli_bad_config_exits_2(tmp_path):
    cfg = _write(tmp_path, "bad.yaml", "equation: nonsense\ngrid: {}\n")
    assert cli.main(["solve", "--config", cfg, "--quiet"]) == 2


def test_cli_nonconvergence_exits_3(tmp_path):
    cfg = _write(tmp_path, "stall.yaml", """\
equation: modified_nr_stationary
grid: {kind: line, x_min: -4.0, x_max: 4.0, n_points: 200}
potential: {variant: square_well, depth: 20.0, half_width: 1.0}
solver: {e_init: -11.0, state_index: 0, max_iter: 3, tol: 1.0e-14}
""")
    assert cli.main(["solve", "--config", cfg, "--quiet"]) == 3


def test_cli_singular_region_exits_4_with_locations(tmp_path):
    cfg = _write(tmp_path, "reject.yaml", HARMONIC_REJECT)
    out = str(tmp_path / "err.json")
    code = cli.main(["solve", "--config", cfg, "--out", out, "--quiet"])
    assert code == 4
    obj = json.loads((tmp_path / "err.json").read_text())
    assert obj["error"] == "SingularRegionError"
    locs = sorted(obj["locations"])
    np.testing.assert_allclose(locs, [-np.sqrt(2.0), np.sqrt(2.0)], atol=1e-9)


def test_cli_dispersion_audit_runs(tmp_path):
    cfg = _write(tmp_path, "audit.yaml", """\
equation: dispersion_audit
units: {c: 137.035999}
solver: {momenta: [0.5, 1.0, 2.0], potential_value: 0.3}
""")
    out = str(tmp_path / "audit.json")
    assert cli.main(["dispersion", "--config", cfg, "--out", out,
                     "--quiet"]) == 0
    doc = json.loads((tmp_path / "audit.json").read_text())
    rows = doc["payload"]["rows"]
    assert len(rows) == 3
    for row in rows:
        for key, value in row.items():
            if key.startswith("residual"):
                # relativistic residuals are O((cp)^2) quantities, so a
                # cancellation floor of ~1e-11 relative is expected
                assert abs(value) < 1e-6, (key, value)


def test_cli_compare_roundtrip(tmp_path, capsys):
    cfg = _write(tmp_path, "box.yaml", BOX)
    a = str(tmp_path / "a.json")
    b = str(tmp_path / "b.json")
    assert cli.main(["solve", "--config", cfg, "--out", a, "--quiet"]) == 0
    assert cli.main(["solve", "--config", cfg, "--out", b, "--quiet"]) == 0
    assert cli.main(["compare", a, b, "--quiet",
                     "--out", str(tmp_path / "delta.json")]) == 0
    delta = json.loads((tmp_path / "delta.json").read_text())
    np.testing.assert_allclose(delta["energy_deltas"], 0.0)


def test_cli_sweep_csv(tmp_path):
    cfg = _write(tmp_path, "sweep.yaml", BOX + """\
sweep:
  parameter: grid.n_points
  values: [64, 128, 256]
""")
    out = str(tmp_path / "sweep.csv")
    assert cli.main(["sweep", "--config", cfg, "--out", out, "--quiet",
                     "--jobs", "2"]) == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0].startswith("grid.n_points,status,ground_energy")
    assert len(lines) == 4
    assert all(line.split(",")[1] == "ok" for line in lines[1:])
