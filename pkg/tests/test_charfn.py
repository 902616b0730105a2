from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frozen_spectral.charfn import CharacteristicFunction, SingularAuxiliarySystem, delta_closed, delta_det
from frozen_spectral.core import PI, ClosedForm, FrozenArguments, Potential

F2 = FrozenArguments((1.0, math.sqrt(2)))
ONE = Potential.from_form(ClosedForm(poly=(1,)))
LINEAR = Potential.from_form(ClosedForm(poly=(0, 1)))

lambdas = st.builds(complex, st.floats(-30, 150), st.floats(-40, 40))


def _v_const(a, rho):
    # int_0^a sin rho(a-t)/rho dt
    return (1 - cmath.cos(rho * a)) / rho**2


def _v_linear(a, rho):
    # int_0^a t sin rho(a-t)/rho dt
    return (a - cmath.sin(rho * a) / rho) / rho**2


@pytest.mark.parametrize("lam", [2.5, 17.0, -3.0, 4 + 3j, 60 - 10j])
@pytest.mark.parametrize("q, kernel", [(ONE, _v_const), (LINEAR, _v_linear)])
def test_boundary_integrals_closed_forms(q, kernel, lam):
    ev = CharacteristicFunction(q, F2).boundary_integrals(lam)
    rho = cmath.sqrt(lam)
    for a, v in zip(F2.points, ev.V):
        assert abs(v - kernel(a, rho)) < 1e-11
    assert abs(ev.I_pi - kernel(PI, rho)) < 1e-11


def test_boundary_integral_at_zero_lambda():
    ev = CharacteristicFunction(ONE, FrozenArguments((PI / 2,))).boundary_integrals(0.0)
    assert ev.V[0] == pytest.approx(PI**2 / 8, rel=1e-13)
    assert ev.I_pi == pytest.approx(PI**2 / 2, rel=1e-13)


@given(lambdas)
def test_zero_potential_gives_free_sine(lam):
    rho = cmath.sqrt(lam)
    expected = cmath.sin(rho * PI) / rho if rho else PI
    assert abs(delta_closed(Potential.zero(), F2, lam) - expected) <= 1e-13 * max(1, abs(expected))


@settings(max_examples=30, deadline=None)
@given(lambdas, st.sampled_from([(1.0,), (1.0, math.sqrt(2)), (0.3, 1.7, 2.9), (0.2, 0.9, 1.4, 2.2, 3.0)]))
def test_determinant_equals_closed_form(lam, pts):
    F = FrozenArguments(pts)
    cf = CharacteristicFunction(LINEAR, F)
    closed, det = cf.closed(lam), cf.det(lam)
    assert abs(det - closed) <= 1e-12 * max(1.0, abs(closed))


@settings(max_examples=30, deadline=None)
@given(lambdas)
def test_s_values_satisfy_frozen_system(lam):
    cf = CharacteristicFunction(LINEAR, F2)
    ev = cf.boundary_integrals(lam)
    s_a, s_pi = cf.s_values(lam)
    sigma = sum(s_a)
    for a, v, s in zip(F2.points, ev.V, s_a):
        assert abs(s - (cmath.sin(ev.rho * a) / ev.rho if ev.rho else a) - sigma * v) < 1e-12 * max(1, abs(s))
    assert abs(s_pi * ev.pivot - ev.closed()) <= 1e-12 * max(1.0, abs(ev.closed()))


def test_singular_auxiliary_system():
    # q = 2/a^2, one point: 1 - V = 1 - q a^2/2 = 0 at lambda = 0
    a = 1.2
    q = Potential.from_form(ClosedForm(poly=(2 / a**2,)))
    with pytest.raises(SingularAuxiliarySystem):
        CharacteristicFunction(q, FrozenArguments((a,))).s_values(0.0)
    # the characteristic function itself stays finite there
    assert np.isfinite(delta_det(q, FrozenArguments((a,)), 0.0))


def test_matrix_shape_and_first_row():
    cf = CharacteristicFunction(LINEAR, FrozenArguments((0.5, 1.0, 2.0)))
    ev = cf.boundary_integrals(3.0)
    E = ev.matrix(cf.F)
    assert E.shape == (4, 4)
    assert E[0, 1] == pytest.approx(ev.V[0] - 1)
    assert np.all(E[0, 2:] == 1)


def test_sampled_potential_matches_closed_form():
    t = np.linspace(0, PI, 4097)
    sampled = Potential.from_samples(t, np.sin(t) ** 2)
    exact = Potential.from_form(ClosedForm(cos=(0.5, 0, -0.5)))
    for lam in (3.0, 20.0 + 2j):
        a, b = delta_closed(sampled, F2, lam), delta_closed(exact, F2, lam)
        assert abs(a - b) < 1e-6
