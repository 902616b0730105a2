from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from frozen_spectral.core import ClosedForm
from frozen_spectral.expr import ExpressionError, parse_constant, parse_frozen, parse_potential


@pytest.mark.parametrize("text, form", [
    ("zero", ClosedForm()),
    ("0", ClosedForm()),
    ("t", ClosedForm(poly=(0, 1))),
    ("1-cos(2t)", ClosedForm(poly=(1,), cos=(0, 0, -1))),
    ("t^2 - 3sin(4t) + 2", ClosedForm(poly=(2, 0, 1), sin=(0, 0, 0, 0, -3))),
    ("2*t*t", ClosedForm(poly=(0, 0, 2))),
])
def test_parse_potential(text, form):
    assert parse_potential(text) == form


def test_parse_frozen_and_constants():
    assert parse_frozen("pi/3,2pi/3").points == pytest.approx((math.pi / 3, 2 * math.pi / 3))
    assert parse_frozen("1, sqrt(2)").points == pytest.approx((1.0, math.sqrt(2)))
    assert parse_constant("3pi/4") == pytest.approx(3 * math.pi / 4)


@pytest.mark.parametrize("text", ["foo(", "cos(t)*sin(t)", "exp(t)", "t^-1", "", "1,,2"])
def test_parse_errors(text):
    with pytest.raises(ExpressionError):
        parse_potential(text) if "," not in text else parse_frozen(text)


@given(st.lists(st.integers(-9, 9), min_size=1, max_size=4), st.integers(-9, 9))
def test_parse_matches_evaluation(coeffs, c0):
    text = f"{c0}" + "".join(f" + ({c})cos({k}t)" for k, c in enumerate(coeffs, start=1))
    t = np.linspace(0, math.pi, 9)
    expected = c0 + sum(c * np.cos(k * t) for k, c in enumerate(coeffs, start=1))
    np.testing.assert_allclose(parse_potential(text)(t), expected, atol=1e-12)
