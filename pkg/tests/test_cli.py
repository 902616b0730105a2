from __future__ import annotations

import json

import numpy as np
import pytest

from frozen_spectral import cli, reference
from frozen_spectral.core import Potential, SineCoefficients, Spectrum
from frozen_spectral.spectrum import CountMismatch


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_forward_zero(tmp_path, capsys):
    assert run("forward", "--q", "zero", "--m-max", 5, "--out", tmp_path) == 0
    spec = Spectrum.from_json(tmp_path / "spectrum.json")
    np.testing.assert_allclose(spec.rhos, [1, 2, 3, 4, 5], rtol=1e-12)
    assert "Re sqrt(lambda)" in capsys.readouterr().out


def test_forward_is_deterministic(tmp_path):
    for d in ("a", "b"):
        assert run("forward", "--q", "1-cos(2t)", "--m-max", 6, "--out", tmp_path / d) == 0
    assert (tmp_path / "a/spectrum.json").read_bytes() == (tmp_path / "b/spectrum.json").read_bytes()


def test_forward_count_mismatch_exit(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise CountMismatch("forced", [])

    monkeypatch.setattr(cli, "compute_spectrum", boom)
    assert run("forward", "--out", tmp_path) == 3


@pytest.mark.parametrize("argv", [("forward", "--q", "exp(t)"), ("forward", "--frozen", "4"),
                                  ("plot-data", "example3"), ("inverse", "missing.json")])
def test_config_errors_exit_2(tmp_path, argv):
    assert run(*argv, "--out", tmp_path) == 2


def test_inverse_writes_bundle(tmp_path, capsys):
    reference.cosine_spectrum().to_json(tmp_path / "s.json")
    assert run("inverse", tmp_path / "s.json", "--out", tmp_path) == 0
    d = SineCoefficients.from_json(tmp_path / "coefficients.json")
    assert d.M == 10
    assert (tmp_path / "q_hat.csv").read_text().startswith("t,q_hat\n")
    assert (tmp_path / "modes.csv").exists()


def test_inverse_free_spectrum_is_zero(tmp_path):
    Spectrum.from_lambdas([k * k for k in range(1, 9)]).to_json(tmp_path / "s.json")
    assert run("inverse", tmp_path / "s.json", "--out", tmp_path) == 0
    q = Potential.from_csv(tmp_path / "q_hat.csv")
    assert np.max(np.abs(q.values)) < 1e-12


def test_inverse_all_ill_posed_exit_4(tmp_path):
    Spectrum.from_lambdas([1, 4]).to_json(tmp_path / "s.json")
    assert run("inverse", tmp_path / "s.json", "--frozen", "pi/2", "--tau", 2, "--out", tmp_path) == 4


@pytest.mark.parametrize("frozen, modes, code, m", [("1,sqrt(2)", 50, 0, None), ("pi/2", 4, 1, 2),
                                                    ("pi/3,2pi/3", 6, 1, 3)])
def test_check(capsys, frozen, modes, code, m):
    assert run("check", "--frozen", frozen, "--modes", modes) == code
    out = capsys.readouterr().out
    if code == 0:
        assert out.strip().splitlines()[-1].startswith("pass")
    else:
        assert f"{m:>3} " in out and out.strip().splitlines()[-1].startswith("fail")
        assert any(line.startswith(f"{m:>3} ") and "<= tau" in line for line in out.splitlines())


def test_eval_delta(capsys):
    assert run("eval-delta", "--q", "t", "--lambda", "4+1i") == 0
    rows = {line.split()[0]: complex(float(line.split()[1]), float(line.split()[2][:-1]))
            for line in capsys.readouterr().out.splitlines()}
    assert abs(rows["delta_closed"] - rows["delta_det"]) < 1e-12
    assert abs(rows["delta_closed"] - rows["delta_shooting"]) < 1e-9


def test_roundtrip_zero_and_random(tmp_path, capsys):
    assert run("roundtrip", "--q", "zero", "--m-max", 5, "--out", tmp_path) == 0
    report = json.loads((tmp_path / "roundtrip.json").read_text())
    assert max(report["mode_error"]) == 0.0
    assert run("roundtrip", "--q", "random", "--seed", 7, "--m-max", 8, "--out", tmp_path) == 0
    report = json.loads((tmp_path / "roundtrip.json").read_text())
    assert max(report["mode_error"]) < 5e-3


@pytest.mark.parametrize("name", ["example1", "roundtrip"])
def test_plot_data(tmp_path, name):
    assert run("plot-data", name, "--q", "zero", "--m-max", 4, "--out", tmp_path) == 0
    for f in ("q_true.csv", "q_hat.csv", "residual.csv"):
        assert (tmp_path / f).exists()
    if name == "roundtrip":
        resid = np.loadtxt(tmp_path / "residual.csv", delimiter=",", skiprows=1)
        assert np.all(resid[:, 1] == 0)


def test_csv_input(tmp_path):
    Potential.from_form(reference.LINEAR_FORM, 2049).to_csv(tmp_path / "q.csv")
    assert run("forward", "--q", tmp_path / "q.csv", "--m-max", 3, "--out", tmp_path) == 0
    spec = Spectrum.from_json(tmp_path / "spectrum.json")
    assert abs(spec[3].rho - 2.90145) < 2e-3
