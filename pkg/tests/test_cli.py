import csv
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from mmtransducer import cli

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(*args):
    return cli.main([str(a) for a in args])


def write_cfg(tmp_path, base="triple.ini", **edits):
    text = (CONFIGS / base).read_text()
    lines = []
    for line in text.splitlines():
        key = line.split("=")[0].strip()
        lines.append(f"{key} = {edits.pop(key)}" if key in edits else line)
    extra = edits.pop("_append", "")
    assert not edits
    p = tmp_path / "cfg.ini"
    p.write_text("\n".join(lines) + "\n" + extra)
    return p


def test_spectrum_csv_format(tmp_path):
    out = tmp_path / "s.csv"
    assert run("spectrum", "--config", CONFIGS / "triple.ini", "--out", out, "--grid-points", 11) == 0
    rows = list(csv.reader(out.open(newline="")))
    assert tuple(rows[0]) == cli.CSV_HEADER and len(rows) == 12
    assert out.read_bytes().count(b"\r\n") == 12
    for row in rows[1:]:
        for field in row:
            assert float(field) == float("%.17g" % float(field))
    summary = json.loads((tmp_path / "s.summary.json").read_text())
    assert list(summary["points"]) == ["omega_m", "minus_omega_m", "half_omega_m", "zero"]
    man = json.loads((tmp_path / "s.manifest.json").read_text())
    assert man["command"] == "spectrum" and len(man["input_sha256"]) == 64
    assert man["resolved_config"]["derived"]["eta_c"] == 1.0


@pytest.mark.parametrize("power", ["1e-12", "1e-9", "1e-6"])
def test_spectrum_respects_sql(tmp_path, power):
    out = tmp_path / "s.csv"
    cfg = write_cfg(tmp_path, power=power)
    assert run("spectrum", "--config", cfg, "--out", out, "--grid-points", 5) == 0
    at = json.loads((tmp_path / "s.summary.json").read_text())["points"]["omega_m"]
    assert at["S_total_over_zpf"] >= 1.0 - 1e-12


def test_spectrum_is_repeatable(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run("spectrum", "--config", CONFIGS / "triple.ini", "--out", a, "--grid-points", 301, "--threads", 1)
    run("spectrum", "--config", CONFIGS / "triple.ini", "--out", b, "--grid-points", 301, "--threads", 8)
    for suffix in (".csv", ".summary.json", ".manifest.json"):
        assert (tmp_path / f"a{suffix}").read_bytes() == (tmp_path / f"b{suffix}").read_bytes()
    assert json.loads((tmp_path / "a.manifest.json").read_text())["timestamp"] == "2023-11-14T22:13:20Z"


def test_validation_errors_list_every_field(tmp_path, capsys):
    cfg = write_cfg(tmp_path, mass_eff="-1", kappa_ext="abc", frequency_unit="hz", _append="[run2]\nx = 1\n")
    assert run("spectrum", "--config", cfg) == 2
    err = capsys.readouterr().err
    for token in ("kappa_ext", "frequency_unit", "[run2]"):
        assert token in err
    cfg = write_cfg(tmp_path, mass_eff="-1")
    assert run("spectrum", "--config", cfg) == 2
    assert "mass_eff" in capsys.readouterr().err
    assert run("spectrum", "--config", tmp_path / "missing.ini") == 2


def test_unknown_key_rejected(tmp_path, capsys):
    cfg = write_cfg(tmp_path, _append="")
    cfg.write_text(cfg.read_text().replace("[drive]", "[drive]\nwavelength = 1550e-9"))
    assert run("spectrum", "--config", cfg) == 2
    assert "wavelength: unknown key" in capsys.readouterr().err


def test_zero_gain_exit_code(tmp_path, capsys):
    assert run("spectrum", "--config", write_cfg(tmp_path, power="0")) == 6
    assert "zero transduction gain" in capsys.readouterr().err


def test_singular_exit_code(tmp_path, capsys):
    cfg = write_cfg(tmp_path, power="0", gamma_m="0", grid_min="0", grid_max="62831853.07179586", grid_points="3")
    # closed-loop spectra hit the undamped pole; the budget path reports zero gain first
    assert run("spectrum", "--config", cfg) in (3, 6)
    from mmtransducer import engine

    loaded = cli.load_config(cfg)
    with pytest.raises(cli.SingularityError):
        engine.output_spectrum(loaded.system, loaded.system.omega)


def test_compare_triple_and_dual(capsys):
    assert run("compare", "--config", CONFIGS / "triple.ini") == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["pass"] and rep["checks"]["triple_sxx_shape"]["max_rel_deviation"] < 1e-6
    assert run("compare", "--config", CONFIGS / "dual.ini") == 0
    rep = json.loads(capsys.readouterr().out)
    zc = rep["checks"]["zero_crossing"]
    assert rep["pass"] and abs(zc["grid_argmin"] - zc["expected"]) <= zc["grid_step"]


def test_compare_dual_without_cross_terms(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "dual.ini", reservoir_mode="shared_no_cross")
    assert run("compare", "--config", cfg) == 0
    zc = json.loads(capsys.readouterr().out)["checks"]["zero_crossing"]
    assert zc["expected_present"] is False and zc["pass"] and zc["relative_value_at_expected"] > 1e-8


def test_compare_non_canonical(tmp_path):
    cfg = write_cfg(tmp_path, detunings="0, 1e7")
    assert run("compare", "--config", cfg) == 4


def test_cool(tmp_path, capsys):
    assert run("cool", "--config", CONFIGS / "dual.ini") == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["n_f_engine"] == pytest.approx(9 / 1600, rel=1e-6)
    assert rep["n_f_engine"] == pytest.approx(rep["n_f_formula"], rel=1e-6)
    k = 62831853.07179586 / 100
    assert run("cool", "--config", write_cfg(tmp_path, "dual.ini", kappa_ext=repr(k))) == 0
    assert json.loads(capsys.readouterr().out)["n_f_engine"] == pytest.approx(5.625e-5, rel=1e-6)
    assert run("cool", "--config", CONFIGS / "single.ini") == 5


def test_sweep_power_matches_p_sql(tmp_path):
    out = tmp_path / "sw.csv"
    code = run("sweep", "--config", CONFIGS / "triple.ini", "--out", out, "--axis", "power",
               "--min", 1e-12, "--max", 1e-8, "--points", 41, "--spacing", "logarithmic")
    assert code == 0
    rows = list(csv.reader(out.open(newline="")))
    assert rows[0] == ["power", "total_noise_at_omega_m"] and len(rows) == 42
    s = json.loads((tmp_path / "sw.summary.json").read_text())
    step = math.log(1e4) / 40
    assert abs(math.log(s["argmin"] / s["p_sql"]["p_sql"])) <= step


def test_sweep_strict_boundary(tmp_path):
    args = ("sweep", "--config", CONFIGS / "triple.ini", "--axis", "power", "--min", 1e-6, "--max", 1e-3,
            "--points", 5, "--spacing", "logarithmic")
    assert run(*args, "--out", tmp_path / "a.csv") == 0
    assert run(*args, "--strict") == 7


def test_sweep_cancellation_exit_code(tmp_path):
    wm = 62831853.07179586
    cfg = write_cfg(tmp_path, "dual.ini", detunings=f"0, {4 * wm!r}", reservoir_mode="independent")
    args = ("sweep", "--config", cfg, "--axis", "detuning", "--min", -7 * wm, "--max", -wm, "--points", 7,
            "--objective", "backaction_at_minus_omega_m")
    assert run(*args, "--out", tmp_path / "c.csv") == 0
    assert json.loads((tmp_path / "c.summary.json").read_text())["cancellation"]["found"] is False
    assert run(*args, "--strict") == 8


def test_dressed(capsys):
    assert run("dressed", "--config", CONFIGS / "dual.ini") == 0
    rep = json.loads(capsys.readouterr().out)
    wm = 62831853.07179586
    assert rep["required_gc"] == pytest.approx(wm / math.sqrt(2), rel=1e-15)
    for s in rep["spacings"]:
        assert s == pytest.approx(wm, rel=1e-12)
    assert sorted(rep["coupling_weight_magnitudes"]) == pytest.approx([0.5, 0.5, 1 / math.sqrt(2)], abs=1e-12)
    assert rep["reference_basis_mismatch"] is True


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "mmtransducer", "cool", "--config", str(CONFIGS / "dual.ini")],
                       capture_output=True, text=True, check=False)
    assert r.returncode == 0 and "n_f_engine" in r.stdout
