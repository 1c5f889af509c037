import math
import xml.etree.ElementTree as ET

import pytest

from usam.harness import cli
from usam.harness.analysis import CSV_COLUMNS, analyze, default_horizon_ms, normalize_mode
from usam.harness.experiments import (
    PHASE_COLUMNS, SweepSpec, grid, parse_grid, phase, read_csv, rows_to_csv, sweep,
)
from usam.harness.validation import CHECKS, validate
from usam.model import load_preset, loads_config, preset_path

CFG = load_preset()
HEADER = ("rho,delta,mode,F,R,S,psi_raw,psi_gated,feasible,aoi_ms,paoi_ms,aos_ms,voi,aoc,"
          "viol_M,viol_SC,viol_FC,viol_S,wq_mean_ms,t_max_ms,realized_duty,reps,ci_psi")
SVG = "{http://www.w3.org/2000/svg}"


def test_asymptotic_point():
    ev = analyze(CFG, 0.1, 0.3)
    r = ev.report
    assert round(r.s, 4) == 0.7634
    assert r.f == 1.0 and r.r == 1.0
    assert r.feasible and r.psi_gated == r.psi_raw == pytest.approx(0.7634 ** 0.33, rel=1e-3)
    assert ev.reps == 0 and math.isnan(ev.ci_psi)
    assert ev.t_max_ms == pytest.approx(1.5 * 0.7 + 0.57)


def test_point_below_safe_duty_is_gated_out():
    ev = analyze(CFG, 0.1, 0.2)
    assert not ev.report.feasible and ev.report.psi_gated == 0.0
    assert ev.report.psi_raw > 0


def test_simulated_point_without_traffic_is_nan():
    ev = analyze(CFG, 0.0, 0.3, "sim", reps=2, horizon_ms=1e4)
    assert math.isnan(ev.report.f) and math.isnan(ev.report.psi_raw)
    assert math.isnan(ev.report.aoi_ms)


def test_simulated_point_reports_interval():
    ev = analyze(CFG, 0.2, 0.3, "simulated", reps=3, horizon_ms=5e4)
    assert ev.reps == 3 and ev.ci_psi >= 0
    assert 0 < ev.report.psi_raw <= 1
    assert ev.report.aos_ms < ev.report.aoi_ms


def test_modes_and_horizon():
    assert normalize_mode("asym") == "asymptotic"
    with pytest.raises(ValueError):
        normalize_mode("fast")
    assert default_horizon_ms(CFG, 0.0) == 1e5
    assert default_horizon_ms(CFG, 1e-9) == 1e9
    assert default_horizon_ms(CFG, 0.1) == pytest.approx(1e4 / 0.012)


def test_csv_header_is_exact():
    assert ",".join(CSV_COLUMNS) == HEADER
    text, _, _ = sweep(CFG, SweepSpec("delta", 0.2, 0.3, 3), plot=False)
    assert text.splitlines()[0] == HEADER


def test_delta_sweep_switches_at_safe_duty():
    text, _, _ = sweep(CFG, SweepSpec("delta", 0.12, 0.34, 23), plot=False)
    rows = read_csv(text)
    assert len(rows) == 23
    assert rows[0]["delta"] == 0.12 and rows[-1]["delta"] == 0.34
    for r in rows:
        assert r["rho"] == 0.1
        if r["delta"] < 0.23016:
            assert r["psi_gated"] == 0 and r["feasible"] == 0
        else:
            assert r["psi_gated"] > 0 and r["feasible"] == 1


def test_rho_sweep_switches_at_stability_line():
    text, _, _ = sweep(CFG, SweepSpec("rho", 0.0, 1.0, 41), plot=False)
    for r in read_csv(text):
        assert r["delta"] == 0.3
        assert (r["feasible"] == 0) == (r["rho"] > 0.365)
        if r["rho"] > 0.365:
            assert r["psi_gated"] == 0
        elif r["rho"] > 0:  # at rho = 0 no updates flow, so freshness is 0
            assert r["psi_gated"] > 0


def test_two_step_sweep_hits_both_endpoints():
    text, _, _ = sweep(CFG, SweepSpec("rho", 0.05, 0.25, 2), plot=False)
    assert [r["rho"] for r in read_csv(text)] == [0.05, 0.25]
    with pytest.raises(ValueError):
        SweepSpec("rho", 0.05, 0.25, 1)
    with pytest.raises(ValueError):
        SweepSpec("mu", 0.05, 0.25, 3)


def test_sweep_output_is_byte_stable(tmp_path):
    spec = SweepSpec("delta", 0.25, 0.35, 3, mode="sim", reps=2, horizon_ms=2e4, seed=4)
    a, sa, paths = sweep(CFG, spec, tmp_path, name="s")
    b, sb, _ = sweep(CFG, spec)
    assert a == b and sa == sb
    assert [p.name for p in paths] == ["s.csv", "s.svg"]
    assert (tmp_path / "s.csv").read_bytes() == a.encode()


def test_sweep_svg_is_well_formed_with_threshold():
    _, image, _ = sweep(CFG, SweepSpec("delta", 0.05, 0.6, 12))
    root = ET.fromstring(image)
    rules = root.findall(f".//{SVG}line[@class='threshold']")
    assert len(rules) == 1 and rules[0].get("data-x") == "0.230160"
    names = {p.get("data-name") for p in root.findall(f".//{SVG}polyline[@class='series']")}
    assert {"psi_gated", "psi_raw", "F", "R", "S"} <= names


def test_rho_sweep_svg_marks_stability_threshold():
    _, image, _ = sweep(CFG, SweepSpec("rho", 0.0, 1.0, 11, fixed_value=0.5))
    rule = ET.fromstring(image).find(f".//{SVG}line[@class='threshold']")
    assert float(rule.get("data-x")) == pytest.approx(0.608, abs=1e-3)


def test_grids():
    g = grid(0.01, 1.0, 30)
    assert len(g) == 30 and g[0] == 0.01 and g[-1] == 1.0
    assert parse_grid("0:1:5") == [0.0, 0.25, 0.5, 0.75, 1.0]
    with pytest.raises(ValueError):
        parse_grid("0:1")


def test_phase_examples(tmp_path):
    text, image, paths = phase(CFG, [0.1, 0.3, 0.5], [0.0, 0.2, 0.5, 0.7], tmp_path)
    rows = read_csv(text)
    assert text.splitlines()[0] == ",".join(PHASE_COLUMNS)
    lab = {(r["delta"], r["rho"]): r["region"] for r in rows}
    assert lab[(0.1, 0.0)] == "safety-infeasible"
    assert lab[(0.3, 0.2)] == "feasible"
    assert lab[(0.3, 0.5)] == "queue-limited"
    assert lab[(0.5, 0.5)] == "feasible"
    assert lab[(0.5, 0.7)] == "queue-limited"
    root = ET.fromstring(image)
    assert len(root.findall(f".//{SVG}rect[@class='cell']")) == 12
    assert root.find(f".//{SVG}polyline[@class='stability']") is not None
    assert len(paths) == 2


def test_rows_to_csv_formatting():
    text = rows_to_csv([{"a": True, "b": 3, "c": 0.5, "d": math.nan, "e": "x"}], "abcde")
    assert text == "a,b,c,d,e\n1,3,0.500000,nan,x\n"


def test_fast_checks_pass_on_reference_preset():
    results = validate(only={"1", "2", "7", "9"}, echo=None)
    assert [r.key for r in results] == ["1", "2", "7", "9"]
    assert all(r.passed for r in results), [r.line() for r in results]


@pytest.mark.parametrize("change", [{"mu": 500.0}, {"alpha": 1.0}])
def test_mutated_config_fails_threshold_check(change):
    (res,) = validate(CFG.evolve(**change), only={"1"}, echo=None)
    assert not res.passed
    assert res.line().startswith("FAIL [1]")


def test_tight_deadline_fails_margin_check():
    text = preset_path("C").read_text().replace("deadline_ms = 5.0", "deadline_ms = 1.0")
    (res,) = validate(loads_config(text), only={"2"}, echo=None)
    assert not res.passed


def test_check_registry():
    assert list(CHECKS) == [str(i) for i in range(1, 11)]


def _bad_config(tmp_path, old, new):
    path = tmp_path / "cfg.toml"
    path.write_text(preset_path("C").read_text().replace(old, new))
    return str(path)


def test_cli_analyze_ok(capsys):
    assert cli.main(["analyze", "--rho", "0.1", "--delta", "0.3"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == HEADER
    assert "delta_safe=0.230160" in out


def test_cli_sweep_and_phase_write_files(tmp_path):
    assert cli.main(["sweep", "--var", "rho", "--from", "0", "--to", "1", "--steps", "5",
                     "--out", str(tmp_path)]) == 0
    assert (tmp_path / "sweep_rho_asymptotic.csv").exists()
    assert (tmp_path / "sweep_rho_asymptotic.svg").exists()
    assert cli.main(["phase", "--delta-grid", "0.1:1:4", "--rho-grid", "0:1:4",
                     "--out", str(tmp_path)]) == 0
    assert len(read_csv((tmp_path / "phase.csv").read_text())) == 16


def test_cli_validation_failure_exit_code(tmp_path):
    cfg = _bad_config(tmp_path, "mu = 1000.0", "mu = 500.0")
    assert cli.main(["validate", "--config", cfg, "--only", "1"]) == 1
    assert cli.main(["validate", "--only", "1", "9"]) == 0


def test_cli_config_error_exit_code(tmp_path, capsys):
    cfg = _bad_config(tmp_path, "mu = 1000.0\n", "")
    assert cli.main(["analyze", "--config", cfg, "--rho", "0.1", "--delta", "0.3"]) == 2
    assert "mu" in capsys.readouterr().err
    assert cli.main(["analyze", "--rho", "2", "--delta", "0.3", "--mode", "sim",
                     "--horizon-s", "1"]) == 2


def test_cli_io_error_exit_code(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert cli.main(["phase", "--out", str(blocker / "sub")]) == 3
    assert cli.main(["analyze", "--config", str(tmp_path / "none.toml"),
                     "--rho", "0.1", "--delta", "0.3"]) == 3
