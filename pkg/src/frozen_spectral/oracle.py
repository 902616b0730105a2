"""Independent cross-checks of the characteristic function and the spectrum.

Two routes share nothing with the quadrature in :mod:`charfn`:

* shooting: RK4 integration of ``u'' = -lambda u`` (``u(0)=0, u'(0)=1``) and
  ``v'' = -lambda v + q`` (``v(0)=v'(0)=0``); the solution of the loaded
  problem is ``S = u + sigma v`` with ``sigma = sum_i S(a_i)``.
* finite differences: the loaded operator on a uniform grid is the
  Dirichlet Laplacian ``T`` plus the rank-one term ``q s^T`` (``s`` samples
  ``sum_i y(a_i)`` by linear interpolation), so
  ``det(T + q s^T - lambda I) = det(T - lambda I) (1 + s^T (T - lambda I)^{-1} q)``.
  Only real eigenvalues are found this way.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import brentq

from .charfn import SINGULAR_THRESHOLD, CharacteristicFunction, SingularAuxiliarySystem
from .core import PI, FrozenArguments, Potential, Spectrum
from .spectrum import RootSearchConfig, SpectrumSearch, locate_zeros

logger = logging.getLogger(__name__)

DEFAULT_STEP = PI / 2048
#: default RK4 steps also keep h*|rho| below this, so the local phase error stays flat in lambda
PHASE_STEP = 0.01
DEFAULT_FD_H = PI / 2048
FD_SCAN_PER_UNIT = 200
PIVOT_TOL = 1e-12


class PivotBreakdown(ArithmeticError):
    """``lambda`` coincides with an eigenvalue of the unloaded Laplacian."""


# ---------------------------------------------------------------------------
# shooting
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ShootingResult:
    t: np.ndarray
    u: np.ndarray
    v: np.ndarray
    du: np.ndarray
    dv: np.ndarray
    u_at: tuple[complex, ...]
    v_at: tuple[complex, ...]
    sigma: complex
    delta: complex
    step: float


def _hermite(t0: float, h: float, y, dy, x: float) -> complex:
    k = min(int((x - t0) // h), len(y) - 2)
    s = (x - t0 - k * h) / h
    s2, s3 = s * s, s * s * s
    return ((2 * s3 - 3 * s2 + 1) * y[k] + (s3 - 2 * s2 + s) * h * dy[k]
            + (-2 * s3 + 3 * s2) * y[k + 1] + (s3 - s2) * h * dy[k + 1])


def shoot_delta(q: Potential, F: FrozenArguments, lam: complex, step: float | None = None) -> ShootingResult:
    """Characteristic function from two RK4 initial-value solves on ``[0, pi]``.

    Without an explicit ``step`` the spacing is ``min(pi/2048, 0.01/|sqrt(lambda)|)``.
    """
    lam = complex(lam)
    if step is None:
        step = min(DEFAULT_STEP, PHASE_STEP / max(abs(lam) ** 0.5, 1.0))
    if step > PI / 256 * (1 + 1e-12):
        raise ValueError("step must not exceed pi/256")
    n = math.ceil(PI / step - 1e-9)
    h = PI / n
    t = np.linspace(0.0, PI, n + 1)
    q_nodes = q(t).tolist()
    q_mid = q(t[:-1] + h / 2).tolist()

    u, du, v, dv = 0j, 1 + 0j, 0j, 0j
    U, DU, Vs, DV = [u], [du], [v], [dv]
    h2, h6 = h / 2, h / 6
    for k in range(n):
        q0, qm, q1 = q_nodes[k], q_mid[k], q_nodes[k + 1]
        # u' = du, du' = -lam u ; v' = dv, dv' = -lam v + q
        k1u, k1du = du, -lam * u
        k1v, k1dv = dv, -lam * v + q0
        k2u, k2du = du + h2 * k1du, -lam * (u + h2 * k1u)
        k2v, k2dv = dv + h2 * k1dv, -lam * (v + h2 * k1v) + qm
        k3u, k3du = du + h2 * k2du, -lam * (u + h2 * k2u)
        k3v, k3dv = dv + h2 * k2dv, -lam * (v + h2 * k2v) + qm
        k4u, k4du = du + h * k3du, -lam * (u + h * k3u)
        k4v, k4dv = dv + h * k3dv, -lam * (v + h * k3v) + q1
        u += h6 * (k1u + 2 * k2u + 2 * k3u + k4u)
        du += h6 * (k1du + 2 * k2du + 2 * k3du + k4du)
        v += h6 * (k1v + 2 * k2v + 2 * k3v + k4v)
        dv += h6 * (k1dv + 2 * k2dv + 2 * k3dv + k4dv)
        U.append(u)
        DU.append(du)
        Vs.append(v)
        DV.append(dv)

    u_at = tuple(_hermite(0.0, h, U, DU, a) for a in F.points)
    v_at = tuple(_hermite(0.0, h, Vs, DV, a) for a in F.points)
    pivot = 1.0 - sum(v_at)
    if abs(pivot) <= SINGULAR_THRESHOLD:
        raise SingularAuxiliarySystem(f"1 - sum v(a_i) = {pivot} at lambda = {lam}")
    sigma = sum(u_at) / pivot
    delta = (U[-1] + sigma * Vs[-1]) * pivot
    return ShootingResult(t, np.array(U), np.array(Vs), np.array(DU), np.array(DV),
                          u_at, v_at, sigma, delta, h)


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SecularFunction:
    """Discrete loaded operator ``T + load s^T`` on ``n`` uniform intervals of ``[0, pi]``."""

    h: float
    x: np.ndarray
    diag: np.ndarray
    off: np.ndarray
    load: np.ndarray
    s: np.ndarray
    mu: np.ndarray

    @classmethod
    def build(cls, q: Potential, F: FrozenArguments, n_intervals: int) -> "SecularFunction":
        h = PI / n_intervals
        x = h * np.arange(1, n_intervals)
        size = n_intervals - 1
        s = np.zeros(size)
        for a in F.points:
            j = int(a // h)
            w = a / h - j
            # node j sits at x[j-1]; node 0 is the boundary where y vanishes
            if 1 <= j <= size:
                s[j - 1] += 1 - w
            if 1 <= j + 1 <= size:
                s[j] += w
        k = np.arange(1, n_intervals)
        mu = (4 / h**2) * np.sin(k * h / 2) ** 2
        return cls(h, x, np.full(size, 2 / h**2), np.full(size - 1, -1 / h**2), q(x), s, mu)

    @property
    def size(self) -> int:
        return self.x.size

    def dense(self) -> np.ndarray:
        """``T + load s^T`` as a dense matrix."""
        A = np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)
        return A + np.outer(self.load, self.s)


def secular_value(sec: SecularFunction, lam: float) -> float:
    """``1 + s^T (T - lambda I)^{-1} load`` from one banded solve."""
    lam = float(lam)
    if np.min(np.abs(sec.mu - lam)) <= PIVOT_TOL * max(1.0, abs(lam)):
        raise PivotBreakdown(f"lambda = {lam} is an eigenvalue of the unloaded Laplacian")
    if not np.any(sec.load) or not np.any(sec.s):
        return 1.0
    ab = np.zeros((3, sec.size))
    ab[0, 1:] = sec.off
    ab[1] = sec.diag - lam
    ab[2, :-1] = sec.off
    y = solve_banded((1, 1), ab, sec.load, check_finite=False)
    return float(1.0 + sec.s @ y)


def normalized_determinant(sec: SecularFunction, lam: float) -> float:
    """``det(T + load s^T - lambda I) / det(T)``, accumulated in sign and log-magnitude."""
    secular = secular_value(sec, lam)
    ratios = 1.0 - lam / sec.mu
    sign = -1.0 if np.count_nonzero(ratios < 0) % 2 else 1.0
    return sign * math.exp(float(np.sum(np.log(np.abs(ratios))))) * secular


def loaded_determinant(sec: SecularFunction, lam: float) -> float:
    """``det(T - lambda I) * secular_value``, for comparison with a dense determinant."""
    secular = secular_value(sec, lam)
    diffs = sec.mu - lam
    sign = -1.0 if np.count_nonzero(diffs < 0) % 2 else 1.0
    return sign * math.exp(float(np.sum(np.log(np.abs(diffs))))) * secular


def _safe(func, lam: float) -> float:
    try:
        return func(lam)
    except PivotBreakdown:
        return func(lam + 1e-9 * max(1.0, abs(lam)))


def _fd_roots(sec: SecularFunction, m_max: int) -> np.ndarray:
    def g(rho):
        return _safe(lambda lam: normalized_determinant(sec, lam), rho * rho)

    hi = m_max + 0.5
    grid = np.linspace(0.0, hi, math.ceil(hi * FD_SCAN_PER_UNIT) + 1)[1:]
    vals = np.array([g(r) for r in grid])
    roots = [brentq(g, grid[i], grid[i + 1], xtol=1e-14)
             for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]]
    return np.array(roots) ** 2


def _richardson(coarse: np.ndarray, fine: np.ndarray) -> np.ndarray:
    if coarse.size == fine.size:
        return (4 * fine - coarse) / 3
    out = []
    for lam in fine:
        j = int(np.argmin(np.abs(coarse - lam))) if coarse.size else -1
        if j >= 0 and abs(coarse[j] - lam) < 0.05 * max(1.0, lam):
            out.append((4 * lam - coarse[j]) / 3)
        else:
            out.append(lam)
    return np.array(out)


def fd_spectrum(q: Potential, F: FrozenArguments, m_max: int, h: float = DEFAULT_FD_H) -> Spectrum:
    """Real eigenvalues in ``(0, (m_max + 1/2)^2]`` from finite differences at ``h`` and ``h/2``, Richardson-extrapolated."""
    if h > PI / 512 * (1 + 1e-12):
        raise ValueError("h must not exceed pi/512")
    n = int(round(PI / h))
    coarse = _fd_roots(SecularFunction.build(q, F, n), m_max)
    fine = _fd_roots(SecularFunction.build(q, F, 2 * n), m_max)
    return Spectrum.from_lambdas(np.sort(_richardson(coarse, fine)), m_max)


# ---------------------------------------------------------------------------
# cross validation
# ---------------------------------------------------------------------------


@dataclass
class CrossValidationRow:
    m: int
    rho: complex
    rho_fd: float | None
    fd_gap: float | None
    shoot_residual: float
    shoot_shift: float


@dataclass
class CrossValidationReport:
    rows: list[CrossValidationRow]
    winding_total: int
    fd_count: int
    notes: list[str] = field(default_factory=list)

    @property
    def max_discrepancy(self) -> float:
        gaps = [r.fd_gap for r in self.rows if r.fd_gap is not None]
        shifts = [r.shoot_shift for r in self.rows]
        return max(gaps + shifts, default=0.0)

    @property
    def count_deficit(self) -> int:
        return self.winding_total - self.fd_count

    def to_dict(self) -> dict:
        return {
            "max_discrepancy": self.max_discrepancy,
            "winding_total": self.winding_total,
            "fd_count": self.fd_count,
            "count_deficit": self.count_deficit,
            "notes": self.notes,
            "rows": [
                {"m": r.m, "rho": {"re": r.rho.real, "im": r.rho.imag}, "rho_fd": r.rho_fd,
                 "fd_gap": r.fd_gap, "shoot_residual": r.shoot_residual, "shoot_shift": r.shoot_shift}
                for r in self.rows
            ],
        }

    def table(self) -> str:
        lines = [f"{'m':>3} {'rho (root finder)':>28} {'rho (FD)':>14} {'|gap|':>10} {'|shoot|':>10} {'shift':>10}"]
        for r in self.rows:
            rho = f"{r.rho.real:.9f}{r.rho.imag:+.9f}i"
            fd = f"{r.rho_fd:.9f}" if r.rho_fd is not None else "-"
            gap = f"{r.fd_gap:.2e}" if r.fd_gap is not None else "-"
            lines.append(f"{r.m:>3} {rho:>28} {fd:>14} {gap:>10} {r.shoot_residual:10.2e} {r.shoot_shift:10.2e}")
        lines.append(f"max discrepancy {self.max_discrepancy:.3e}; winding total {self.winding_total}, "
                     f"FD found {self.fd_count}")
        lines.extend(self.notes)
        return "\n".join(lines)


def cross_validate(q: Potential, F: FrozenArguments, m_max: int, h: float = DEFAULT_FD_H,
                   step: float | None = None, config: RootSearchConfig | None = None) -> CrossValidationReport:
    """Compare the root finder against the FD spectrum and shooting residuals at every eigenvalue."""
    config = config or RootSearchConfig(m_max=m_max)
    cf = CharacteristicFunction(q, F)
    search: SpectrumSearch = locate_zeros(cf, config)
    fd = fd_spectrum(q, F, m_max, h)
    fd_rho = np.array([p.rho.real for p in fd])

    rows = []
    for m, p in enumerate(search.spectrum, start=1):
        rho_fd = gap = None
        if p.is_real and p.lam.real > 0 and fd_rho.size:
            j = int(np.argmin(np.abs(fd_rho - p.rho.real)))
            rho_fd = float(fd_rho[j])
            gap = abs(rho_fd - p.rho.real)
        res = abs(shoot_delta(q, F, p.lam, step).delta)
        dz = 1e-6 * (1 + abs(p.rho))
        slope = abs(cf((p.rho + dz) ** 2) - cf((p.rho - dz) ** 2)) / (2 * dz)
        rows.append(CrossValidationRow(m, p.rho, rho_fd, gap, res, res / slope if slope else math.inf))

    report = CrossValidationReport(rows, len(search.spectrum), len(fd))
    if report.count_deficit:
        report.notes.append(f"FD route found {len(fd)} real eigenvalues against {report.winding_total} counted; "
                            "complex eigenvalues are invisible to it")
    return report
