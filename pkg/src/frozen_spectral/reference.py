"""Reference eigenvalue data for the frozen points ``{1, sqrt(2)}``.

Values are square roots of eigenvalues to five or six significant digits.
The source list for ``q(t) = t`` repeats ``10.9929``; it is entered once here.
"""

from __future__ import annotations

import math

from .core import ClosedForm, FrozenArguments, Spectrum

FROZEN = FrozenArguments((1.0, math.sqrt(2.0)))

#: q(t) = 1 - cos 2t, indices 1..10
COSINE_RHO = (1.98868, 2.0, 3.06656, 4.0, 5.00142, 6.0, 6.99975, 8.0, 8.99976, 10.0)
COSINE_FORM = ClosedForm(cos=(1.0, 0.0, -1.0))

#: q(t) = t, indices 3..21 real; indices 1, 2 are the conjugate pair
LINEAR_RHO_REAL = (
    2.90145, 4.09132, 4.98819, 5.98425, 7.00424, 7.99936, 9.00732, 9.99528, 10.9929,
    12.0105, 12.9998, 13.9907, 15.006, 16.0035, 16.9935, 18.0013, 19.0032, 19.9997, 20.9997,
)
LINEAR_RHO_PAIR = 1.99593 + 0.4925j
LINEAR_FORM = ClosedForm(poly=(0.0, 1.0))


def cosine_spectrum() -> Spectrum:
    return Spectrum.from_rhos(COSINE_RHO, m_max=10)


def linear_spectrum() -> Spectrum:
    rhos = [LINEAR_RHO_PAIR, LINEAR_RHO_PAIR.conjugate(), *LINEAR_RHO_REAL]
    return Spectrum.from_rhos(rhos, m_max=21)
