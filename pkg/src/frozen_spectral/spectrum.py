"""Locating the zeros of the characteristic function.

All root work happens in the rho-plane, where eigenvalues sit close to the
integers.  The strip ``0 <= Re rho <= m_max + 1/2`` is cut into unit boxes
with edges at half-integers.  Each box is counted with the argument
principle, real roots are bracketed on the real axis, and any remaining
deficit is closed by complex Newton from a grid of seeds.

The first box is taken symmetric, ``[-3/2, 3/2] x [-H, H]``: ``Delta(rho^2)``
is even in rho, so every eigenvalue there contributes exactly two zeros
(``+rho`` and ``-rho``, or ``+-i s`` for negative eigenvalues) and the
eigenvalue count is half the winding number.  This keeps negative
eigenvalues, whose rho lies on the imaginary axis, off the contour.
"""

from __future__ import annotations

import logging
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .charfn import CharacteristicFunction
from .core import FrozenArguments, Potential, SpectralPoint, Spectrum

logger = logging.getLogger(__name__)

Evaluator = Callable[[complex], complex]

THREADS_ENV = "FROZEN_SPECTRAL_THREADS"

ZERO_ON_CONTOUR_RTOL = 1e-13
MAX_BISECTION_LEVELS = 12
MAX_CONTOUR_SHIFTS = 5
CONTOUR_SHIFT = 1e-3
MERGE_TOL = 1e-8


class RootSearchError(RuntimeError):
    pass


class NoConvergence(RootSearchError):
    pass


class EscapedRegion(RootSearchError):
    pass


class ZeroOnContour(RootSearchError):
    def __init__(self, point: complex):
        super().__init__(f"characteristic function vanishes on the contour near rho = {point}")
        self.point = point


class PhaseJumpUnresolved(RootSearchError):
    pass


class CountMismatch(RootSearchError):
    def __init__(self, message: str, boxes: list["BoxReport"]):
        super().__init__(message)
        self.boxes = boxes


class LowPrecisionRoot(RuntimeWarning):
    pass


@dataclass(frozen=True)
class RootSearchConfig:
    m_max: int = 20
    im_height: float = 2.0
    newton_tol: float = 1e-11
    max_iter: int = 60
    scan_points_per_unit: int = 40
    samples_per_side: int = 16

    def __post_init__(self):
        if self.m_max < 1:
            raise ValueError("m_max must be at least 1")
        if not self.im_height > 0:
            raise ValueError("im_height must be positive")


@dataclass(frozen=True)
class Box:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def contains(self, z: complex, pad: float = 0.0) -> bool:
        return (
            self.re_min - pad <= z.real <= self.re_max + pad
            and self.im_min - pad <= z.imag <= self.im_max + pad
        )

    def doubled(self) -> "Box":
        cr, ci = (self.re_min + self.re_max) / 2, (self.im_min + self.im_max) / 2
        wr, wi = self.re_max - self.re_min, self.im_max - self.im_min
        return Box(cr - wr, cr + wr, ci - wi, ci + wi)


@dataclass
class BoxReport:
    box: Box
    winding: int
    count: int
    roots: list[complex] = field(default_factory=list)
    multiplicity: list[int] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def found(self) -> int:
        return sum(self.multiplicity)


@dataclass
class SpectrumSearch:
    spectrum: Spectrum
    boxes: list[BoxReport]

    @property
    def winding_total(self) -> int:
        return sum(b.count for b in self.boxes)


def _as_rho_function(delta: Evaluator) -> Callable[[complex], complex]:
    return lambda z: complex(delta(z * z))


def _merge(values: list, tol: float = MERGE_TOL) -> list:
    out: list = []
    for v in sorted(values, key=lambda z: (complex(z).real, complex(z).imag)):
        if not any(abs(v - w) <= tol * (1 + abs(w)) for w in out):
            out.append(v)
    return out


def _bracket_roots(func, grid: np.ndarray, max_iter: int) -> list[float]:
    vals = np.array([func(x) for x in grid])
    roots = [float(x) for x, v in zip(grid, vals) if v == 0.0]
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        a, b = float(grid[i]), float(grid[i + 1])
        root, info = brentq(func, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                            maxiter=max_iter, full_output=True, disp=False)
        if not info.converged:
            warnings.warn(f"root in [{a}, {b}] not converged; using the bracket midpoint", LowPrecisionRoot)
            root = 0.5 * (a + b)
        roots.append(float(root))
    return roots


def _scan_grid(lo: float, hi: float, density: float, offset: float) -> np.ndarray:
    n = max(2, math.ceil((hi - lo) * density))
    grid = np.linspace(lo, hi, n + 1)
    if offset:
        step = (hi - lo) / n
        grid = np.clip(grid + offset * step, lo, hi)
    if grid[0] <= 0.0:
        # rho*Delta(rho^2) vanishes identically at rho = 0
        grid[0] = min(1e-6, grid[1] / 2)
    return np.unique(grid)


def real_root_scan(delta: Evaluator, rho_range: tuple[float, float], config: RootSearchConfig | None = None,
                   density_factor: float = 1.0, offset: float = 0.0) -> list[float]:
    """Real roots of ``g(rho) = rho * Delta(rho^2)`` in ``rho_range``.

    Sign changes on a uniform scan are refined with Brent's method;
    duplicates closer than ``1e-8`` are merged.
    """
    config = config or RootSearchConfig()
    lo, hi = rho_range
    grid = _scan_grid(lo, hi, config.scan_points_per_unit * density_factor, offset)

    def g(r):
        return (r * complex(delta(r * r))).real

    return _merge(_bracket_roots(g, grid, config.max_iter))


def imaginary_axis_scan(delta: Evaluator, height: float, config: RootSearchConfig | None = None,
                        density_factor: float = 1.0) -> list[complex]:
    """Negative eigenvalues ``lambda = -s^2`` with ``0 < s < height``, returned as ``rho = i s``."""
    config = config or RootSearchConfig()
    grid = _scan_grid(0.0, height, config.scan_points_per_unit * density_factor, 0.0)

    def h(s):
        return complex(delta(-s * s)).real

    return [1j * s for s in _merge(_bracket_roots(h, grid, config.max_iter))]


def winding_count(delta: Evaluator, box: Box, samples_per_side: int = 16) -> int:
    """Number of zeros of ``rho -> Delta(rho^2)`` inside ``box`` (argument principle)."""
    f = _as_rho_function(delta)
    corners = [complex(box.re_min, box.im_min), complex(box.re_max, box.im_min),
               complex(box.re_max, box.im_max), complex(box.re_min, box.im_max)]
    pts = []
    for a, b in zip(corners, corners[1:] + corners[:1]):
        pts.extend(a + (b - a) * k / samples_per_side for k in range(samples_per_side))
    vals = [f(z) for z in pts]
    scale = max(abs(v) for v in vals) or 1.0
    floor = ZERO_ON_CONTOUR_RTOL * scale

    for z, v in zip(pts, vals):
        if abs(v) < floor:
            raise ZeroOnContour(z)

    def increment(za, zb, fa, fb, depth):
        d = np.angle(fb / fa)
        if abs(d) < np.pi / 2:
            return d
        if depth >= MAX_BISECTION_LEVELS:
            raise PhaseJumpUnresolved(f"phase jump between {za} and {zb} not resolved")
        zm = 0.5 * (za + zb)
        fm = f(zm)
        if abs(fm) < floor:
            raise ZeroOnContour(zm)
        return increment(za, zm, fa, fm, depth + 1) + increment(zm, zb, fm, fb, depth + 1)

    total = 0.0
    n = len(pts)
    for k in range(n):
        total += increment(pts[k], pts[(k + 1) % n], vals[k], vals[(k + 1) % n], 0)
    return int(round(total / (2 * np.pi)))


def refine_complex_root(delta: Evaluator, z0: complex, config: RootSearchConfig | None = None,
                        region: Box | None = None) -> complex:
    """Complex Newton on ``rho -> Delta(rho^2)`` with a central-difference derivative."""
    config = config or RootSearchConfig()
    f = _as_rho_function(delta)
    limit = region.doubled() if region is not None else None
    z = complex(z0)
    step_tol = 1e-12 * (1 + abs(z0))
    for _ in range(config.max_iter):
        fz = f(z)
        h = 1e-6 * (1 + abs(z))
        df = (f(z + h) - f(z - h)) / (2 * h)
        if df == 0:
            raise NoConvergence(f"vanishing derivative at rho = {z}")
        step = fz / df
        z = z - step
        if limit is not None and not limit.contains(z):
            raise EscapedRegion(f"Newton iterate {z} left {limit}")
        if abs(step) < step_tol and abs(f(z)) <= config.newton_tol * (1 + abs(z)):
            return z
    raise NoConvergence(f"Newton from {z0} did not converge in {config.max_iter} iterations")


def _snap(z: complex) -> complex:
    tol = 1e-9 * (1 + abs(z))
    re, im = z.real, z.imag
    if abs(im) <= tol:
        im = 0.0
    if abs(re) <= tol:
        re = 0.0
    if re < 0 or (re == 0 and im < 0):
        re, im = -re, -im
    return complex(re + 0.0, im + 0.0)


def _thread_count() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return 1


class _BoxSearch:
    def __init__(self, delta: Evaluator, config: RootSearchConfig):
        self.delta = delta
        self.config = config

    def _inside(self, box: Box, first: bool, z: complex) -> bool:
        lo = 0.0 if first else box.re_min
        if first and z.real == 0.0:
            return 0.0 < z.imag < box.im_max
        return lo <= z.real < box.re_max and box.im_min < z.imag < box.im_max

    def _add(self, roots: list[complex], z: complex, box: Box, first: bool) -> bool:
        z = _snap(z)
        if not self._inside(box, first, z):
            return False
        if any(abs(z - w) <= MERGE_TOL * (1 + abs(w)) for w in roots):
            return False
        roots.append(z)
        if z.imag != 0.0 and z.real != 0.0:
            roots.append(z.conjugate())
        return True

    def _seed(self, report: BoxReport, first: bool, k: int):
        box, cfg = report.box, self.config
        lo = 0.0 if first else box.re_min
        fr = np.arange(1, k + 1) / (k + 1)
        for im in box.im_min + (box.im_max - box.im_min) * fr:
            for re in lo + (box.re_max - lo) * fr:
                if len(report.roots) >= report.count:
                    return
                try:
                    z = refine_complex_root(self.delta, complex(re, im), cfg, box)
                except (NoConvergence, EscapedRegion):
                    continue
                if z.real < 0:
                    z = -z
                self._add(report.roots, z, box, first)

    def run(self, box: Box, winding: int, first: bool) -> BoxReport:
        cfg = self.config
        count = winding // 2 if first else winding
        report = BoxReport(box, winding, count)
        lo = 0.0 if first else box.re_min

        for r in real_root_scan(self.delta, (lo, box.re_max), cfg):
            self._add(report.roots, complex(r), box, first)
        if first:
            for z in imaginary_axis_scan(self.delta, box.im_max, cfg):
                self._add(report.roots, z, box, first)

        if len(report.roots) < count:
            report.notes.append("rescanned real axis at 8x density")
            for r in real_root_scan(self.delta, (lo, box.re_max), cfg, density_factor=8, offset=0.37):
                self._add(report.roots, complex(r), box, first)
            if first:
                for z in imaginary_axis_scan(self.delta, box.im_max, cfg, density_factor=8):
                    self._add(report.roots, z, box, first)

        for k in (3, 5, 9):
            if len(report.roots) >= count:
                break
            report.notes.append(f"complex Newton from {k}x{k} seeds")
            self._seed(report, first, k)

        report.roots.sort(key=lambda z: (z.real, z.imag))
        report.multiplicity = [1] * len(report.roots)
        if 0 < len(report.roots) < count:
            self._multiplicities(report, first)
        return report

    def _multiplicities(self, report: BoxReport, first: bool):
        report.notes.append("checked multiplicities on shrunken boxes")
        r = 1e-3
        for i, z in enumerate(report.roots):
            small = Box(z.real - r, z.real + r, z.imag - r, z.imag + r)
            try:
                w = winding_count(self.delta, small, 16)
            except RootSearchError:
                continue
            if first and abs(z) < r:
                w //= 2
            report.multiplicity[i] = max(1, w)


def _plan(m_max: int, first_edge: float, shifts: dict[int, float], height: float) -> list[Box]:
    edges = [k + 0.5 + shifts.get(k, 0.0) for k in range(1, m_max + 1)]
    edges[0] = first_edge + shifts.get(1, 0.0)
    boxes = [Box(-edges[0], edges[0], -height, height)]
    boxes += [Box(a, b, -height, height) for a, b in zip(edges, edges[1:])]
    return boxes


def _winding_all(delta: Evaluator, config: RootSearchConfig) -> tuple[list[Box], list[int]]:
    shifts: dict[int, float] = {}
    height = config.im_height
    for attempt in range(MAX_CONTOUR_SHIFTS + 1):
        boxes = _plan(config.m_max, 1.5, shifts, height)
        try:
            return boxes, [winding_count(delta, b, config.samples_per_side) for b in boxes]
        except ZeroOnContour as exc:
            if attempt == MAX_CONTOUR_SHIFTS:
                raise
            z = exc.point
            if abs(abs(z.imag) - height) < 1e-9:
                height += CONTOUR_SHIFT
            else:
                k = int(round(abs(z.real) - 0.5))
                shifts[k] = shifts.get(k, 0.0) + CONTOUR_SHIFT
            logger.info("zero on contour near rho=%s; shifting contour", z)
    raise AssertionError("unreachable")


def locate_zeros(delta: Evaluator, config: RootSearchConfig | None = None) -> SpectrumSearch:
    """Find every zero with ``0 <= Re rho <= m_max + 1/2`` and ``|Im rho| < im_height``."""
    config = config or RootSearchConfig()
    boxes, windings = _winding_all(delta, config)
    search = _BoxSearch(delta, config)
    jobs = [(b, w, i == 0) for i, (b, w) in enumerate(zip(boxes, windings))]
    workers = min(_thread_count(), len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(lambda job: search.run(*job), jobs))
    else:
        reports = [search.run(*job) for job in jobs]

    bad = [r for r in reports if r.found != r.count]
    if bad:
        detail = "; ".join(f"[{r.box.re_min:g}, {r.box.re_max:g}]: counted {r.count}, found {r.found}" for r in bad)
        raise CountMismatch(f"roots found do not match winding counts ({detail})", reports)

    points = [SpectralPoint.from_rho(z, m) for r in reports for z, m in zip(r.roots, r.multiplicity)]
    return SpectrumSearch(Spectrum(tuple(points), config.m_max), reports)


def compute_spectrum(q: Potential, F: FrozenArguments, config: RootSearchConfig | None = None) -> Spectrum:
    """Eigenvalues of the loaded problem with ``Re rho <= m_max + 1/2``, sorted and conjugate-closed."""
    from .inverse import check_uniqueness

    config = config or RootSearchConfig()
    report = check_uniqueness(F, config.m_max)
    if not report.passed:
        warnings.warn(
            f"sum_i sin(m a_i) is {report.min_abs_G:.3g} at m={report.worst_m}; "
            "the potential is not determined by this spectrum",
            RuntimeWarning,
        )
    return locate_zeros(CharacteristicFunction(q, F), config).spectrum


def asymptotic_constant(spectrum: Spectrum, start: int = 1) -> tuple[float, np.ndarray]:
    """Largest ``|rho_m - m| * m`` over real eigenvalues from index ``start`` on, with the per-index sequence."""
    scaled = np.array([abs(p.rho - m) * m for m, p in enumerate(spectrum, start=1)
                       if m >= start and p.is_real])
    return (float(scaled.max()) if scaled.size else 0.0), scaled
