from __future__ import annotations

import csv
import json
import math

import numpy as np
import pytest

from padctrl.cli import main
from padctrl.pulses import FieldSpec


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_pad_end_to_end(tmp_path, capsys):
    code, out, _ = run(["pad", "--preset", "rempi5", "--e-min", 8, "--e-max", 12, "--e-steps", 5,
                        "--theta-steps", 19, "--svg", "--out", tmp_path], capsys)
    assert code == 0
    assert out.startswith("best |A| = ") and " eV, theta=" in out and out.strip().endswith("deg")
    for f in ("pad.csv", "anisotropy.csv", "pad.svg", "anisotropy.svg", "manifest.json"):
        assert (tmp_path / f).exists()
    assert len(rows(tmp_path / "pad.csv")) == 5 * 19
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["command"] == "pad" and len(man["inputs"]["field"]) == 5
    assert man["summary"]["best_abs_A"] > 0
    assert (tmp_path / "pad.svg").read_text().startswith("<svg")


def test_phi_slice_default(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    run(["pad", "--e-steps", 3, "--theta-steps", 7, "--out", a], capsys)
    run(["pad", "--e-steps", 3, "--theta-steps", 7, "--phi-slice", 90, "--out", b], capsys)
    assert (a / "pad.csv").read_text() == (b / "pad.csv").read_text()


def test_angle_convention_only_relabels(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    run(["pad", "--e-steps", 2, "--theta-steps", 7, "--out", a], capsys)
    run(["pad", "--e-steps", 2, "--theta-steps", 7, "--angle-convention", "prop-axis", "--out", b], capsys)
    assert (a / "pad.csv").read_text() == (b / "pad.csv").read_text()
    assert json.loads((b / "manifest.json").read_text())["summary"]["angle_convention"] == "prop-axis"


def test_missing_dipole_file(tmp_path, capsys):
    code, _, err = run(["pad", "--dipoles", tmp_path / "missing.dat", "--out", tmp_path], capsys)
    assert code == 3 and "missing.dat" in err


def test_config_errors(tmp_path, capsys):
    assert run(["pad", "--e-steps", 0, "--out", tmp_path], capsys)[0] == 2
    assert run(["pad", "--e-min", 50, "--e-max", 60, "--out", tmp_path], capsys)[0] == 2
    assert run(["pad", "--bogus"], capsys)[0] == 2
    assert run(["frobnicate"], capsys)[0] == 2


def test_dipole_file_round_trip_through_cli(tmp_path, capsys):
    d = tmp_path / "d.dat"
    assert run(["write-dipoles", d, "--l-max", 2, "--out", tmp_path / "w"], capsys)[0] == 0
    code, out, _ = run(["pad", "--dipoles", d, "--e-steps", 2, "--theta-steps", 5, "--out", tmp_path / "p"], capsys)
    assert code == 0
    man = json.loads((tmp_path / "p" / "manifest.json").read_text())
    assert len(man["inputs"]["dipoles"]["sha256"]) == 64


def test_scan(tmp_path, capsys):
    code, out, _ = run(["scan", "--omega-steps", 2, "--phase-steps", 5, "--phase-max", 4 * math.pi,
                        "--theta-steps", 13, "--out", tmp_path], capsys)
    assert code == 0 and out.startswith("max |A| = ")
    r = rows(tmp_path / "scan.csv")
    assert len(r) == 2 * 5
    # phases 0, pi, 2 pi, 3 pi, 4 pi: the 0 / 2 pi / 4 pi and pi / 3 pi columns coincide
    for om in {x["omega_eV"] for x in r}:
        a = [x["asymmetry"] for x in r if x["omega_eV"] == om]
        assert a[0] == a[2] == a[4] and a[1] == a[3]


def test_scan_empty_range(tmp_path, capsys):
    assert run(["scan", "--phase-steps", 0, "--out", tmp_path], capsys)[0] == 2
    assert run(["scan", "--omega-steps", 0, "--out", tmp_path], capsys)[0] == 2


def test_optimize_noop_and_budget(tmp_path, capsys):
    code, _, _ = run(["optimize", "--e-target", 10, "--theta-steps", 9, "--budget", 5, "--out", tmp_path / "a"],
                     capsys)
    assert code == 0
    assert len(rows(tmp_path / "a" / "trace.csv")) == 1
    assert (tmp_path / "a" / "final_pad.csv").exists()
    code, _, _ = run(["optimize", "--e-target", 10, "--theta-steps", 9, "--free", "1:phase", "1:tau:-20:20",
                      "--budget", 12, "--out", tmp_path / "b"], capsys)
    assert code == 0
    assert len(rows(tmp_path / "b" / "trace.csv")) <= 12
    best = FieldSpec.load_json(tmp_path / "b" / "best_field.json")
    assert len(best.pulses) == 2


def test_optimize_stub(tmp_path, capsys):
    code, _, _ = run(["optimize", "--objective", "stub", "--free", "0:tau", "--budget", 200, "--out", tmp_path],
                     capsys)
    assert code == 0
    s = json.loads((tmp_path / "manifest.json").read_text())["summary"]
    target = s["stub_maximizer"][0]
    got = s["best_params"]["0:tau_fs"]
    assert abs(got - target) <= 1e-4 * 200.0


def test_optimize_bad_free(tmp_path, capsys):
    assert run(["optimize", "--free", "chirp", "--out", tmp_path], capsys)[0] == 2
    assert run(["optimize", "--free", "9:tau", "--out", tmp_path], capsys)[0] == 2


def test_pulse(tmp_path, capsys):
    field = tmp_path / "crp.json"
    field.write_text(json.dumps([{"intensity_Wcm2": 1e11, "omega_eV": 10.0, "phase_rad": 0.0, "tau_fs": 0.0,
                                  "fwhm_fs": 20.0, "channel": "CRP"}]))
    code, out, _ = run(["pulse", "--field", field, "--svg", "--t-steps", 50, "--omega-steps", 200,
                        "--out", tmp_path / "o"], capsys)
    assert code == 0
    h = rows(tmp_path / "o" / "helicity.csv")
    assert {r["zeta_10.0000eV"] for r in h} == {"1.0"}
    spec = rows(tmp_path / "o" / "spectrum.csv")
    peak = max(spec, key=lambda r: float(r["intensity"]))
    assert float(peak["omega_eV"]) == pytest.approx(10.0, abs=0.05)
    for f in ("spectrum.svg", "helicity.svg", "spectrogram.svg", "spectrogram.csv", "manifest.json"):
        assert (tmp_path / "o" / f).exists()


def test_pulse_balanced_is_zero(tmp_path, capsys):
    field = tmp_path / "bal.json"
    rec = {"intensity_Wcm2": 1e11, "omega_eV": 10.0, "phase_rad": 0.0, "tau_fs": 0.0, "fwhm_fs": 20.0}
    field.write_text(json.dumps({"pulses": [dict(rec, channel="CRP"), dict(rec, channel="CLP", phase_rad=1.0)]}))
    code, _, _ = run(["pulse", "--field", field, "--no-spectrogram", "--out", tmp_path], capsys)
    assert code == 0
    z = [float(r["zeta_10.0000eV"]) for r in rows(tmp_path / "helicity.csv")]
    assert np.allclose(z, 0.0, atol=1e-12)


def test_validate(tmp_path, capsys):
    code, out, _ = run(["validate", "--instances", 3, "--out", tmp_path], capsys)
    assert code == 0 and "PASS" in out
    assert json.loads((tmp_path / "manifest.json").read_text())["summary"]["passed"] is True
    # an impossible tolerance is reported as a numerical failure
    assert run(["validate", "--instances", 1, "--tol", 1e-30, "--out", tmp_path], capsys)[0] == 4


def test_validate_corrupted_file(tmp_path, capsys):
    d = tmp_path / "d.dat"
    run(["write-dipoles", d, "--l-max", 2, "--out", tmp_path], capsys)
    lines = d.read_text().splitlines()
    bad = [ln for ln in lines if ln.startswith("bb")][0].split()
    bad[-1] = repr(float(bad[-1]) + 0.5)
    lines[lines.index([ln for ln in lines if ln.startswith("bb")][0])] = " ".join(bad)
    d.write_text("\n".join(lines) + "\n")
    code, _, err = run(["validate", "--dipoles", d, "--out", tmp_path], capsys)
    assert code == 3 and "hermiticity" in err


def test_module_entry_point():
    import subprocess
    import sys
    r = subprocess.run([sys.executable, "-m", "padctrl", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "validate" in r.stdout
