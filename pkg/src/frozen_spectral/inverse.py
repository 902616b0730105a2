"""Potential reconstruction from a finite spectrum.

With ``N`` known eigenvalues the characteristic function is approximated by

    Delta(lambda) ~ prod_{k<=N} (lambda_k - lambda)/k^2 * tail(lambda, N)

where the tail replaces the unknown eigenvalues ``k > N`` by ``k^2``:

    tail(lambda, N) = (sin rho pi / rho) / prod_{k<=N} (k^2 - lambda)/k^2
                    = pi * prod_{k>N} (k^2 - lambda)/k^2.

At ``lambda = m^2`` the characteristic function reduces to
``G(m) (pi/2) d_m / m^2`` with ``G(m) = sum_i sin(m a_i)``, which gives the
sine coefficient ``d_m`` of ``q`` in the basis ``sin m(pi - t)``.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import (
    PI,
    FrozenArguments,
    Potential,
    SineCoefficients,
    Spectrum,
    principal_rho,
    sinc_kernel,
    synthesize,
)

logger = logging.getLogger(__name__)

DEFAULT_TAU = 1e-3
POLE_TOL = 1e-8
IMAG_RESIDUE_RTOL = 1e-8


class PoleHit(ZeroDivisionError):
    """``lambda`` is within ``1e-8`` of some ``k^2`` with ``k <= N``."""


class IllPosedMode(ArithmeticError):
    def __init__(self, m: int, G: float, tau: float):
        super().__init__(f"mode {m} is unrecoverable: |G({m})| = {abs(G):.3g} <= tau = {tau:g}")
        self.m, self.G, self.tau = m, G, tau


class AllModesIllPosed(ArithmeticError):
    pass


class ConditioningWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class UniquenessReport:
    values: tuple[tuple[int, float], ...]
    min_abs_G: float
    worst_m: int
    tau: float

    @property
    def passed(self) -> bool:
        return self.min_abs_G > self.tau

    @property
    def failing_modes(self) -> list[int]:
        return [m for m, g in self.values if abs(g) <= self.tau]

    def G(self, m: int) -> float:
        return self.values[m - 1][1]


def check_uniqueness(F: FrozenArguments, M: int, tau: float = DEFAULT_TAU) -> UniquenessReport:
    """Tabulate ``G(m) = sum_i sin(m a_i)`` for ``m = 1..M`` and gate on ``min |G| > tau``."""
    if M < 1:
        raise ValueError("M must be at least 1")
    m = np.arange(1, M + 1)
    G = np.asarray(F.sine_sum(m), dtype=float)
    worst = int(np.argmin(np.abs(G)))
    return UniquenessReport(
        tuple((int(k), float(g)) for k, g in zip(m, G)),
        float(abs(G[worst])),
        worst + 1,
        tau,
    )


def tail_at_integer(m: int, N: int) -> float:
    """``pi (N!)^2 / ((N-m)! (N+m)!)``, the value of the tail at ``lambda = m^2``."""
    if not 1 <= m <= N:
        raise ValueError(f"need 1 <= m <= N, got m={m}, N={N}")
    return PI * math.exp(2 * math.lgamma(N + 1) - math.lgamma(N - m + 1) - math.lgamma(N + m + 1))


def _integer_square_root(lam: complex) -> int | None:
    """``m`` if ``lam == m^2`` for a positive integer ``m`` (to rounding), else ``None``."""
    if lam.imag != 0.0 or lam.real < 0.5:
        return None
    m = round(math.sqrt(lam.real))
    return m if abs(lam.real - m * m) <= 4 * np.finfo(float).eps * lam.real else None


def tail_factor(lam: complex, N: int) -> complex:
    """``(sin rho pi / rho) / prod_{k<=N} (k^2 - lambda)/k^2`` with log-magnitude accumulation."""
    lam = complex(lam)
    k2 = np.arange(1, N + 1, dtype=float) ** 2
    if N and np.min(np.abs(lam - k2)) < POLE_TOL:
        raise PoleHit(f"lambda = {lam} is within {POLE_TOL} of k^2 for some k <= {N}; use tail_at_integer")
    m = _integer_square_root(lam)
    if m is not None and m > N:
        return 0j
    sinc = sinc_kernel(principal_rho(lam), PI)
    if N == 0:
        return sinc
    log_prod = np.sum(np.log((k2 - lam) / k2 + 0j))
    return complex(sinc * np.exp(-log_prod))


def _slots(spec: Spectrum) -> int:
    return sum(p.multiplicity for p in spec)


def _hadamard_head(spec: Spectrum, lam: complex) -> complex:
    """``prod_k (lambda_k - lambda)/k^2``, conjugate pairs multiplied as real quadratics."""
    pts = spec.eigenvalues
    out = 1.0 + 0j
    slot = i = 0
    while i < len(pts):
        p = pts[i]
        nxt = pts[i + 1] if i + 1 < len(pts) else None
        if (not p.is_real and nxt is not None and p.multiplicity == nxt.multiplicity == 1
                and abs(nxt.lam - p.lam.conjugate()) <= 1e-10 * max(1.0, abs(p.lam))):
            quad = lam * lam - 2 * p.lam.real * lam + abs(p.lam) ** 2
            out *= quad / ((slot + 1) ** 2 * (slot + 2) ** 2)
            slot += 2
            i += 2
            continue
        for _ in range(p.multiplicity):
            slot += 1
            out *= (p.lam - lam) / slot**2
        i += 1
    return out


def delta_from_spectrum(spec: Spectrum, lam: complex) -> complex:
    """Characteristic function rebuilt from ``N`` eigenvalues and the analytic tail."""
    N = _slots(spec)
    if N < 1:
        raise ValueError("need at least one eigenvalue")
    lam = complex(lam)
    head = _hadamard_head(spec, lam)
    k2 = np.arange(1, N + 1, dtype=float) ** 2
    dist = np.abs(lam - k2)
    near = int(np.argmin(dist))
    if dist[near] < POLE_TOL:
        return head * tail_at_integer(near + 1, N)
    return head * tail_factor(lam, N)


@dataclass(frozen=True)
class ModeDiagnostics:
    m: int
    delta: float
    G: float
    d: float
    imag_residue: float = 0.0
    ill_posed: bool = False

    @property
    def conditioning_warning(self) -> bool:
        return self.imag_residue > IMAG_RESIDUE_RTOL * abs(self.delta)


def _mode(spec: Spectrum, F: FrozenArguments, m: int, tau: float) -> ModeDiagnostics:
    N = _slots(spec)
    if not 1 <= m <= N:
        raise ValueError(f"mode {m} is outside 1..{N}")
    G = float(F.sine_sum(m))
    value = delta_from_spectrum(spec, float(m * m))
    if abs(G) <= tau:
        return ModeDiagnostics(m, value.real, G, 0.0, abs(value.imag), ill_posed=True)
    d = (2.0 / PI) * m * m * value.real / G
    diag = ModeDiagnostics(m, value.real, G, d, abs(value.imag))
    if diag.conditioning_warning:
        warnings.warn(f"mode {m}: imaginary residue {value.imag:.3g} in Delta(m^2)", ConditioningWarning)
    return diag


def mode_coefficient(spec: Spectrum, F: FrozenArguments, m: int, tau: float = DEFAULT_TAU) -> float:
    """``d_m = (2/pi) m^2 Delta(m^2) / G(m)``; raises :class:`IllPosedMode` when ``|G(m)| <= tau``."""
    diag = _mode(spec, F, m, tau)
    if diag.ill_posed:
        raise IllPosedMode(m, diag.G, tau)
    return diag.d


@dataclass(frozen=True)
class ReconstructionResult:
    coefficients: SineCoefficients
    q_hat: Potential
    per_mode: tuple[ModeDiagnostics, ...]
    N_used: int

    @property
    def ill_posed(self) -> list[int]:
        return [r.m for r in self.per_mode if r.ill_posed]

    def to_dict(self) -> dict:
        return {
            "coefficients": self.coefficients.to_dict(),
            "N_used": self.N_used,
            "ill_posed_modes": self.ill_posed,
            "per_mode": [
                {"m": r.m, "delta": r.delta, "G": r.G, "d": r.d,
                 "imag_residue": r.imag_residue, "ill_posed": r.ill_posed,
                 "conditioning_warning": r.conditioning_warning}
                for r in self.per_mode
            ],
        }


def reconstruct(spec: Spectrum, F: FrozenArguments, grid: int = 513,
                tau: float = DEFAULT_TAU) -> ReconstructionResult:
    """Recover ``d_1..d_N`` and synthesize ``q_hat`` on a uniform grid of ``grid`` points.

    Modes with ``|G(m)| <= tau`` are reported and left at zero.
    """
    N = _slots(spec)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConditioningWarning)
        per_mode = tuple(_mode(spec, F, m, tau) for m in range(1, N + 1))
    if all(r.ill_posed for r in per_mode):
        raise AllModesIllPosed(f"every mode 1..{N} fails |G(m)| > {tau:g}")
    for r in per_mode:
        if r.ill_posed:
            logger.warning("mode %d skipped: |G| = %.3g", r.m, abs(r.G))
        elif r.conditioning_warning:
            logger.warning("mode %d: imaginary residue %.3g", r.m, r.imag_residue)
    coeffs = SineCoefficients(np.array([r.d for r in per_mode]))
    t = np.linspace(0.0, PI, grid)
    q_hat = Potential(t, synthesize(coeffs, t), coeffs.closed_form())
    return ReconstructionResult(coeffs, q_hat, per_mode, N)
