"""Forward and inverse spectral problems for ``-y'' + q(x) sum_i y(a_i) = lambda y`` on ``(0, pi)``
with Dirichlet conditions at both ends."""

from __future__ import annotations

from .charfn import CharacteristicFunction, SingularAuxiliarySystem, delta_closed, delta_det, s_values
from .core import ClosedForm, FrozenArguments, Potential, SineCoefficients, SpectralPoint, Spectrum
from .inverse import (
    AllModesIllPosed,
    IllPosedMode,
    check_uniqueness,
    delta_from_spectrum,
    mode_coefficient,
    reconstruct,
    tail_at_integer,
    tail_factor,
)
from .spectrum import CountMismatch, RootSearchConfig, compute_spectrum, locate_zeros

__all__ = [
    "AllModesIllPosed", "CharacteristicFunction", "ClosedForm", "CountMismatch", "FrozenArguments",
    "IllPosedMode", "Potential", "RootSearchConfig", "SineCoefficients", "SingularAuxiliarySystem",
    "SpectralPoint", "Spectrum", "check_uniqueness", "compute_spectrum", "delta_closed", "delta_det",
    "delta_from_spectrum", "locate_zeros", "mode_coefficient", "reconstruct", "s_values",
    "tail_at_integer", "tail_factor",
]
