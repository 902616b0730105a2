from __future__ import annotations

import math

import numpy as np
import pytest

from frozen_spectral import reference
from frozen_spectral.charfn import CharacteristicFunction
from frozen_spectral.core import PI, ClosedForm, FrozenArguments, Potential
from frozen_spectral.oracle import (
    PivotBreakdown,
    SecularFunction,
    cross_validate,
    fd_spectrum,
    loaded_determinant,
    normalized_determinant,
    secular_value,
    shoot_delta,
)

LINEAR = Potential.from_form(reference.LINEAR_FORM)


@pytest.mark.parametrize("lam", [3.7, -2.0, 4 + 1j, 120.0 - 5j])
def test_shooting_matches_closed_form(lam):
    closed = CharacteristicFunction(LINEAR, reference.FROZEN)(lam)
    shot = shoot_delta(LINEAR, reference.FROZEN, lam).delta
    assert abs(shot - closed) <= 1e-7 * max(1.0, abs(closed))


def test_shooting_fourth_order():
    closed = CharacteristicFunction(LINEAR, reference.FROZEN)(50.0)
    errs = [abs(shoot_delta(LINEAR, reference.FROZEN, 50.0, PI / n).delta - closed) for n in (256, 512)]
    assert 10 < errs[0] / errs[1] < 22


def test_shooting_rejects_coarse_step():
    with pytest.raises(ValueError):
        shoot_delta(LINEAR, reference.FROZEN, 1.0, PI / 100)


def test_secular_matches_dense_determinant():
    sec = SecularFunction.build(LINEAR, reference.FROZEN, 65)
    A = sec.dense()
    assert A.shape == (64, 64)
    for lam in (2.3, 17.9, 55.5):
        sign, logdet = np.linalg.slogdet(A - lam * np.eye(64))
        dense = sign * math.exp(logdet)
        assert loaded_determinant(sec, lam) == pytest.approx(dense, rel=1e-10)


def test_secular_pivot_breakdown():
    sec = SecularFunction.build(LINEAR, reference.FROZEN, 64)
    with pytest.raises(PivotBreakdown):
        secular_value(sec, sec.mu[2])
    assert normalized_determinant(sec, 0.0) == pytest.approx(secular_value(sec, 0.0))


def test_fd_spectrum_free_case():
    spec = fd_spectrum(Potential.zero(), FrozenArguments((1.0,)), 5)
    # with no load the determinant vanishes only at the discrete Laplacian eigenvalues
    np.testing.assert_allclose(spec.rhos.real, np.arange(1, 6), atol=1e-6)


def test_cross_validation_report():
    report = cross_validate(LINEAR, reference.FROZEN, 5)
    assert report.max_discrepancy < 5e-3
    assert report.count_deficit == 2  # the complex pair is invisible to the FD route
    assert "max discrepancy" in report.table()
    assert len(report.to_dict()["rows"]) == report.winding_total
