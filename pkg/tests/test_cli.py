import json
import re

import numpy as np
import pytest

from pairdiag.cli import main

NUMBER = re.compile(r"-?\d+\.\d+(?:e[-+]\d+)?|-?\d+e[-+]\d+|\b-?\d+\b")


def run(tmp_path, *argv, sub="out"):
    out = tmp_path / sub
    code = main([*argv, "--out", str(out)])
    return code, out


def load(out):
    return json.loads((out / "report.json").read_text())


def json_numbers(obj, acc=None):
    acc = set() if acc is None else acc
    if isinstance(obj, dict):
        for v in obj.values():
            json_numbers(v, acc)
    elif isinstance(obj, list):
        for v in obj:
            json_numbers(v, acc)
    elif isinstance(obj, (int, float)) and not isinstance(obj, bool):
        acc.add(float(obj))
    return acc


def test_verify_single_mode(tmp_path, capsys):
    code, out = run(tmp_path, "verify", "@single_mode")
    assert code == 0
    rep = load(out)
    assert rep["pass"] is True
    assert rep["diag"]["E"] == pytest.approx(0.2071068, abs=1e-7)
    assert rep["seed"] == 42
    assert all(r["ok"] for r in rep["residuals"].values())
    assert all(c["violations"] == 0 for c in rep["inequality_counts"].values())
    assert "single_mode: verify PASS" in capsys.readouterr().out


def test_validate_boundary_fails(tmp_path):
    code, out = run(tmp_path, "validate", "@single_mode_boundary")
    assert code == 1
    rep = load(out)
    assert rep["conditions"]["epsilon"] == 0.0
    assert rep["pass"] is False


def test_diagonalize_boundary_reports_error(tmp_path, capsys):
    code, out = run(tmp_path, "diagonalize", "@single_mode_boundary")
    assert code == 1
    rep = load(out)
    assert rep["error"].startswith("ConditionViolation")
    assert rep["conditions"]["epsilon"] == 0.0
    assert "single_mode_boundary: ConditionViolation" in capsys.readouterr().err


def test_spectrum_table(tmp_path):
    code, out = run(tmp_path, "spectrum", "@single_mode", "--nmax", "8,16,24")
    assert code == 0
    levels = load(out)["spectrum"]["levels"]
    assert [r["nmax"] for r in levels] == [8, 16, 24]
    devs = [r["max_dev"] for r in levels]
    assert devs[0] >= devs[1] >= devs[2]
    csv_rows = (out / "report.csv").read_text().splitlines()
    assert csv_rows[:2] == ["# spectrum", "nmax,dim_fock,max_dev"]
    assert [r.split(",")[0] for r in csv_rows[2:5]] == ["8", "16", "24"]


def test_reports_are_reproducible(tmp_path):
    run(tmp_path, "verify", "@two_mode", sub="a")
    run(tmp_path, "verify", "@two_mode", sub="b")
    for name in ("report.json", "report.csv", "report.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_text_numbers_match_json(tmp_path):
    _, out = run(tmp_path, "verify", "@oscillator_field")
    known = json_numbers(load(out))
    lines = (out / "report.txt").read_text().splitlines()[1:]
    seen = 0
    for line in lines:
        if line.startswith("#") or not line.strip():
            continue
        key, _, value = line.partition("  ")
        for tok in NUMBER.findall(value):
            assert float(tok) in known, line
            seen += 1
    assert seen > 50


def test_seed_changes_samples_not_model(tmp_path):
    _, a = run(tmp_path, "verify", "@single_mode", "--samples", "20", sub="a")
    _, b = run(tmp_path, "verify", "@single_mode", "--samples", "20", "--seed", "7", sub="b")
    ra, rb = load(a), load(b)
    assert rb["seed"] == 7
    assert ra["diag"] == rb["diag"]
    assert ra["inequality_counts"]["aa"]["samples"] == 20


def test_missing_config_exits_2(tmp_path, capsys):
    code, _ = run(tmp_path, "verify", str(tmp_path / "none.json"))
    assert code == 2
    assert "config error" in capsys.readouterr().err


def test_bad_field_exits_2(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"model_id": "b", "kind": "single_pair",
                             "single_pair": {"T": {"diag": [1.0]}, "lambda": 1.0, "g": [1.0, 2.0]}}))
    code, _ = run(tmp_path, "validate", str(p))
    assert code == 2
    assert "field 'single_pair.g'" in capsys.readouterr().err


def test_tolerance_override_can_fail(tmp_path):
    code, out = run(tmp_path, "spectrum", "@single_mode", "--tol-override", "spectrum=1e-17")
    assert code == 1
    rep = load(out)
    assert rep["residuals"]["spectrum_final"]["tolerance"] == 1e-17
    assert rep["residuals"]["spectrum_final"]["ok"] is False


def test_bad_tolerance_name_rejected(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run(tmp_path, "verify", "@single_mode", "--tol-override", "nonsense=1")
    assert exc.value.code == 2


def test_bad_nmax_rejected(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run(tmp_path, "spectrum", "@single_mode", "--nmax", "8,x")
    assert exc.value.code == 2


def test_timings_opt_in(tmp_path):
    _, a = run(tmp_path, "diagonalize", "@two_mode", sub="a")
    _, b = run(tmp_path, "diagonalize", "@two_mode", "--timings", sub="b")
    assert "timings" not in load(a)
    assert set(load(b)["timings"]) >= {"build", "diagonalize"}


def test_multiple_configs_use_subdirectories(tmp_path, capsys):
    code, out = run(tmp_path, "validate", "@single_mode", "@single_mode_boundary")
    assert code == 1
    assert load(out / "single_mode")["pass"] is True
    assert load(out / "single_mode_boundary")["pass"] is False
    lines = capsys.readouterr().out.splitlines()
    assert [l.split(":")[0] for l in lines] == ["single_mode", "single_mode_boundary"]


def test_duplicate_model_ids_rejected(tmp_path):
    code, _ = run(tmp_path, "validate", "@single_mode", "@single_mode")
    assert code == 2


@pytest.mark.parametrize("fmt, files", [("machine", {"report.json"}), ("csv", {"report.csv"}), ("text", {"report.txt"})])
def test_format_selection(tmp_path, fmt, files):
    _, out = run(tmp_path, "validate", "@single_mode", "--format", fmt)
    assert {p.name for p in out.iterdir()} == files


def test_validate_csv_is_key_value(tmp_path):
    _, out = run(tmp_path, "validate", "@single_mode", "--format", "csv")
    rows = (out / "report.csv").read_text().splitlines()
    assert rows[0] == "key,value"
    assert "conditions.epsilon,2.0" in rows


def test_diagonalize_writes_S(tmp_path):
    code, out = run(tmp_path, "diagonalize", "@two_mode")
    assert code == 0
    S = np.loadtxt(out / "S.csv", delimiter=",")
    assert S.shape == (2, 2)
    np.testing.assert_allclose(S, load(out)["S"], atol=0)
    np.testing.assert_allclose(S, S.T, atol=1e-15)


def test_diagonalize_complex_S(tmp_path):
    code, out = run(tmp_path, "diagonalize", "@two_mode_explicit_j")
    assert code == 0
    S = np.array([[complex(c) for c in row.split(",")] for row in (out / "S.csv").read_text().splitlines()])
    np.testing.assert_allclose(S, S.conj().T, atol=1e-15)


def test_sweep_fiber(tmp_path):
    code, out = run(tmp_path, "sweep", "@ti_fiber_ons")
    assert code == 0
    rep = load(out)
    assert len(rep["fiber"]) == 4
    assert rep["fiber"][0]["van_hove_shift"] == 0.0
    row = rep["fiber"][2]
    assert row["E_P"] == pytest.approx(row["E_P_ons"], abs=1e-10)
    irs = [r["ir_diagnostic"] for r in rep["ir_family"]]
    assert irs[0] < irs[1] < irs[2]
    assert rep["residuals"]["ir_increasing"]["ok"] is True


def test_sweep_without_grid_is_config_error(tmp_path):
    code, _ = run(tmp_path, "sweep", "@single_mode")
    assert code == 2


def test_verify_fiber_oracle(tmp_path):
    code, out = run(tmp_path, "verify", "@ti_fiber_ons", "--nmax", "8,16", "--samples", "50")
    rep = load(out)
    assert rep["fiber"]["E_P"] == pytest.approx(rep["oracle"]["predicted"])
    assert rep["residuals"]["fiber_ons"]["ok"]
