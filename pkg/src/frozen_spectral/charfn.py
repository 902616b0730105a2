"""Characteristic function of the loaded Dirichlet problem.

The eigenvalue problem is ``-y'' + q(x) sum_i y(a_i) = lambda y`` on
``(0, pi)`` with ``y(0) = y(pi) = 0``.  Its characteristic function is
evaluated two ways from the same boundary integrals

    V_j  = int_0^{a_j} q(t) sin rho(a_j - t)/rho dt
    I_pi = int_0^{pi}  q(t) sin rho(pi - t)/rho dt

* ``delta_det``: determinant of the bordered ``(n+1) x (n+1)`` matrix,
* ``delta_closed``: ``(sin rho pi/rho)(1 - sum V) + (sum_j sin rho a_j/rho) I_pi``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_H_MAX,
    PI,
    SERIES_CUTOFF,
    FrozenArguments,
    Potential,
    principal_rho,
    simpson_intervals,
    sinc_kernel,
)

#: |1 - sum V| at or below this is treated as a degenerate frozen-value system.
SINGULAR_THRESHOLD = 1e-12


class SingularAuxiliarySystem(ArithmeticError):
    """The scalar system for ``sigma = sum_i S(a_i)`` has a (numerically) zero pivot."""


@dataclass(frozen=True)
class CharFnEvaluation:
    lam: complex
    rho: complex
    V: tuple[complex, ...]
    I_pi: complex
    G_over_rho: complex
    sin_pi_over_rho: complex
    delta: complex | None = None

    @property
    def pivot(self) -> complex:
        """``1 - sum_j V_j``."""
        return 1.0 - sum(self.V)

    def closed(self) -> complex:
        return self.sin_pi_over_rho * self.pivot + self.G_over_rho * self.I_pi

    def matrix(self, F: FrozenArguments) -> np.ndarray:
        """Bordered matrix whose determinant is the characteristic function.

        Column 0 holds ``sin(rho a_j)/rho`` (last row ``sin(rho pi)/rho``),
        column 1 holds ``V_j`` (with ``-1`` on the first row) and ``I_pi``;
        the remaining columns are ones on row 0 and ``-1`` on the shifted
        diagonal.
        """
        n = len(self.V)
        rho = self.rho
        E = np.zeros((n + 1, n + 1), dtype=complex)
        E[:n, 0] = [sinc_kernel(rho, a) for a in F.points]
        E[n, 0] = self.sin_pi_over_rho
        E[:n, 1] = self.V
        E[0, 1] -= 1.0
        E[n, 1] = self.I_pi
        if n > 1:
            E[0, 2:] = 1.0
            E[np.arange(1, n), np.arange(2, n + 1)] = -1.0
        return E


class CharacteristicFunction:
    """Evaluator for ``Delta_n(lambda)`` bound to one potential and one set of frozen arguments.

    Sample grids of ``q`` are cached per interval, so repeated evaluation at
    many ``lambda`` only pays for the kernel.  Instances are safe to share
    between threads; the cache only ever gains entries.
    """

    def __init__(self, q: Potential, F: FrozenArguments, h_max: float = DEFAULT_H_MAX):
        self.q = q
        self.F = F
        self.h_max = h_max
        self._grids: dict[tuple[float, int], tuple[np.ndarray, np.ndarray]] = {}

    def _grid(self, x: float, n: int):
        key = (x, n)
        hit = self._grids.get(key)
        if hit is None:
            t = np.linspace(0.0, x, n + 1)
            # composite Simpson weights folded into the samples of q
            w = np.full(n + 1, 2.0)
            w[1::2] = 4.0
            w[0] = w[-1] = 1.0
            hit = (x - t, w * (x / n / 3.0) * self.q(t))
            self._grids[key] = hit
        return hit

    def _integral(self, x: float, rho: complex) -> complex:
        if self.q.is_zero:
            return 0j
        freq = abs(rho.real) + abs(rho.imag)
        n = simpson_intervals(x, freq, self.h_max)
        lag, wq = self._grid(x, n)
        r = rho.real if rho.imag == 0.0 else rho
        if r == 0:
            return complex(wq @ lag)
        z = r * lag
        kern = np.sin(z) / r
        small = np.abs(z) < SERIES_CUTOFF
        if small.any():
            zs = z[small]
            kern[small] = lag[small] * (1.0 - zs * zs / 6.0 + zs**4 / 120.0)
        return complex(wq @ kern)

    def boundary_integrals(self, lam: complex) -> CharFnEvaluation:
        lam = complex(lam)
        rho = principal_rho(lam)
        V = tuple(self._integral(a, rho) for a in self.F.points)
        I_pi = self._integral(PI, rho)
        G = sum(sinc_kernel(rho, a) for a in self.F.points)
        return CharFnEvaluation(lam, rho, V, I_pi, G, sinc_kernel(rho, PI))

    def evaluate(self, lam: complex) -> CharFnEvaluation:
        ev = self.boundary_integrals(lam)
        return CharFnEvaluation(ev.lam, ev.rho, ev.V, ev.I_pi, ev.G_over_rho, ev.sin_pi_over_rho, ev.closed())

    def closed(self, lam: complex) -> complex:
        return self.boundary_integrals(lam).closed()

    __call__ = closed

    def det(self, lam: complex) -> complex:
        ev = self.boundary_integrals(lam)
        # numpy's det factorises with partial pivoting (LAPACK getrf)
        return complex(np.linalg.det(ev.matrix(self.F)))

    def s_values(self, lam: complex) -> tuple[tuple[complex, ...], complex]:
        """``(S(a_1..a_n, lambda), S(pi, lambda))`` via the scalar sigma-reduction."""
        ev = self.boundary_integrals(lam)
        pivot = ev.pivot
        if abs(pivot) <= SINGULAR_THRESHOLD:
            raise SingularAuxiliarySystem(f"1 - sum V = {pivot} at lambda = {ev.lam}")
        sigma = ev.G_over_rho / pivot
        s_a = tuple(sinc_kernel(ev.rho, a) + sigma * v for a, v in zip(self.F.points, ev.V))
        return s_a, ev.sin_pi_over_rho + sigma * ev.I_pi


def boundary_integrals(q: Potential, F: FrozenArguments, lam: complex) -> CharFnEvaluation:
    return CharacteristicFunction(q, F).boundary_integrals(lam)


def delta_det(q: Potential, F: FrozenArguments, lam: complex) -> complex:
    return CharacteristicFunction(q, F).det(lam)


def delta_closed(q: Potential, F: FrozenArguments, lam: complex) -> complex:
    return CharacteristicFunction(q, F).closed(lam)


def s_values(q: Potential, F: FrozenArguments, lam: complex):
    return CharacteristicFunction(q, F).s_values(lam)
