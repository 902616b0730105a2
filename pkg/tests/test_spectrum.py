from __future__ import annotations

import cmath
import math

import numpy as np
import pytest

from frozen_spectral import reference
from frozen_spectral.core import PI, ClosedForm, FrozenArguments, Potential
from frozen_spectral.spectrum import (
    Box,
    CountMismatch,
    RootSearchConfig,
    ZeroOnContour,
    asymptotic_constant,
    compute_spectrum,
    imaginary_axis_scan,
    locate_zeros,
    real_root_scan,
    refine_complex_root,
    winding_count,
)


def free(lam):
    rho = cmath.sqrt(lam)
    return cmath.sin(rho * PI) / rho if rho else PI


def test_real_scan_finds_integers():
    roots = real_root_scan(free, (0.0, 6.5))
    np.testing.assert_allclose(roots, [1, 2, 3, 4, 5, 6], atol=1e-12)


def test_imaginary_axis_scan():
    roots = imaginary_axis_scan(lambda lam: lam + 0.25, 2.0)
    assert len(roots) == 1 and abs(roots[0] - 0.5j) < 1e-12


def test_winding_counts():
    f = lambda lam: (lam - 1) * (lam - 4) * (lam - (2 + 0.3j) ** 2) * (lam - (2 - 0.3j) ** 2)
    # symmetric first box sees rho = +-1, i.e. two zeros for one eigenvalue
    assert winding_count(f, Box(-1.5, 1.5, -2, 2)) == 2
    assert winding_count(f, Box(1.5, 2.5, -2, 2)) == 3
    with pytest.raises(ZeroOnContour):
        winding_count(lambda lam: lam - 2.25, Box(1.5, 2.5, -2, 2))


def test_refine_complex_root():
    target = 2.2 + 0.4j
    z = refine_complex_root(lambda lam: (lam - target**2) * free(lam), 2.1 + 0.3j)
    assert abs(z - target) < 1e-10


def test_locate_zeros_with_complex_pair():
    pair = 3.1 + 0.25j
    f = lambda lam: free(lam) * (lam - pair**2) * (lam - pair.conjugate() ** 2)
    search = locate_zeros(f, RootSearchConfig(m_max=6))
    rhos = search.spectrum.rhos
    assert search.winding_total == len(rhos) == 8
    assert np.min(np.abs(rhos - pair)) < 1e-9 and np.min(np.abs(rhos - pair.conjugate())) < 1e-9


def test_zero_potential_spectrum():
    spec = compute_spectrum(Potential.zero(), reference.FROZEN, RootSearchConfig(m_max=8))
    np.testing.assert_allclose(spec.rhos, np.arange(1, 9), rtol=1e-12)


def test_negative_eigenvalue_found():
    # a strong constant load pulls the lowest eigenvalue below zero
    q = Potential.from_form(ClosedForm(poly=(-3.0,)))
    spec = compute_spectrum(q, FrozenArguments((1.0,)), RootSearchConfig(m_max=4))
    assert spec[1].lam.real < 0 and spec[1].rho.real == 0
    assert len(spec) == 4


def test_count_mismatch_is_reported(monkeypatch):
    import frozen_spectral.spectrum as sp

    monkeypatch.setattr(sp, "real_root_scan", lambda *a, **k: [])
    monkeypatch.setattr(sp, "refine_complex_root", lambda *a, **k: (_ for _ in ()).throw(sp.NoConvergence("x")))
    with pytest.raises(CountMismatch) as info:
        locate_zeros(free, RootSearchConfig(m_max=3))
    assert info.value.boxes


def test_warns_when_uniqueness_fails():
    with pytest.warns(RuntimeWarning):
        compute_spectrum(Potential.zero(), FrozenArguments((PI / 2,)), RootSearchConfig(m_max=3))


def test_asymptotic_constant_bounded():
    spec = reference.linear_spectrum()
    c, seq = asymptotic_constant(spec, start=3)
    assert c < 1.0 and seq.size == 19
