"""Domain types and the sine machinery shared by every other module.

Everything here works in the basis ``sin m(pi - t)`` on ``[0, pi]``.  For odd
``m`` it coincides with ``sin(m t)``; for even ``m`` the sign flips, so all
coefficient I/O is defined in this basis and nowhere else.
"""

from __future__ import annotations

import cmath
import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.integrate import simpson

PI = math.pi

#: Below this value of |rho*x| the kernel sin(rho x)/rho is taken from its Taylor series.
SERIES_CUTOFF = 1e-4

#: Finest spacing used by the composite Simpson rules, independent of frequency.
DEFAULT_H_MAX = PI / 4096

MIN_INTERVALS = 256
NODES_PER_PERIOD = 16
MIN_POTENTIAL_POINTS = 33

SINE_BASIS_TAG = "sin_m_pi_minus_t"


# ---------------------------------------------------------------------------
# frozen arguments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FrozenArguments:
    """Strictly increasing interior points ``0 < a_1 < ... < a_n < pi``."""

    points: tuple[float, ...]

    def __post_init__(self):
        pts = tuple(float(a) for a in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 1:
            raise ValueError("at least one frozen argument is required")
        for a in pts:
            if not (0.0 < a < PI) or not math.isfinite(a):
                raise ValueError(f"frozen argument {a!r} is not inside (0, pi)")
        for lo, hi in zip(pts, pts[1:]):
            if not lo < hi:
                raise ValueError(f"frozen arguments must be strictly increasing, got {pts}")

    @property
    def n(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def sine_sum(self, rho):
        """``G(rho) = sum_i sin(rho a_i)``; accepts scalars or arrays."""
        rho = np.asarray(rho)
        out = sum(np.sin(rho * a) for a in self.points)
        return out.item() if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# potentials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClosedForm:
    """``q(t) = sum_k poly[k] t^k + sum_k cos[k] cos(k t) + sum_k sin[k] sin(k t)``.

    Only used to regenerate samples at arbitrary resolution.
    """

    poly: tuple[float, ...] = ()
    cos: tuple[float, ...] = ()
    sin: tuple[float, ...] = ()

    def __post_init__(self):
        for name in ("poly", "cos", "sin"):
            vals = tuple(float(c) for c in getattr(self, name))
            # trailing zeros carry no information; strip them so equal forms compare equal
            while vals and vals[-1] == 0.0:
                vals = vals[:-1]
            object.__setattr__(self, name, vals)

    @property
    def kind(self) -> str:
        has_poly = any(self.poly)
        has_trig = any(self.cos) or any(self.sin[1:])
        if not has_poly and not has_trig:
            return "zero"
        if has_poly and not has_trig:
            return "polynomial"
        if has_trig and not has_poly:
            return "trigonometric"
        return "mixed"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        if self.poly:
            out = out + np.polynomial.polynomial.polyval(t, self.poly)
        for k, c in enumerate(self.cos):
            if c:
                out = out + c * np.cos(k * t)
        for k, c in enumerate(self.sin):
            if c and k:
                out = out + c * np.sin(k * t)
        return out

    @classmethod
    def from_sine_modes(cls, d: Sequence[float]) -> "ClosedForm":
        """Closed form of ``sum_m d[m-1] sin m(pi - t)``."""
        sin = [0.0] + [(1.0 if m % 2 else -1.0) * float(c) for m, c in enumerate(d, start=1)]
        return cls(sin=tuple(sin))

    def to_dict(self) -> dict:
        return {"poly": list(self.poly), "cos": list(self.cos), "sin": list(self.sin)}


@dataclass(frozen=True, eq=False)
class Potential:
    """Potential ``q`` sampled on a uniform grid covering ``[0, pi]``.

    Between samples ``q`` is read by linear interpolation unless a closed form
    is attached, in which case the closed form is evaluated exactly.
    """

    t: np.ndarray
    values: np.ndarray
    form: ClosedForm | None = None

    def __post_init__(self):
        t = np.array(self.t, dtype=float)
        v = np.array(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape:
            raise ValueError("t and values must be 1-D arrays of equal length")
        if t.size < MIN_POTENTIAL_POINTS:
            raise ValueError(f"a potential needs at least {MIN_POTENTIAL_POINTS} samples, got {t.size}")
        if abs(t[0]) > 1e-12 or abs(t[-1] - PI) > 1e-12:
            raise ValueError("the sample grid must start at 0 and end at pi")
        steps = np.diff(t)
        if np.any(steps <= 0) or np.max(np.abs(steps - PI / (t.size - 1))) > 1e-9:
            raise ValueError("the sample grid must be uniform")
        if not np.all(np.isfinite(v)):
            raise ValueError("potential values must be finite")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_form(cls, form: ClosedForm, n_points: int = 513) -> "Potential":
        t = np.linspace(0.0, PI, n_points)
        return cls(t, form(t), form)

    @classmethod
    def zero(cls, n_points: int = 513) -> "Potential":
        return cls.from_form(ClosedForm(), n_points)

    @classmethod
    def from_samples(cls, t, values) -> "Potential":
        return cls(np.asarray(t, float), np.asarray(values, float))

    @property
    def is_zero(self) -> bool:
        if self.form is not None:
            return self.form.kind == "zero"
        return not np.any(self.values)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.form is not None:
            return self.form(x)
        return np.interp(x, self.t, self.values)

    def resample(self, n_points: int) -> "Potential":
        t = np.linspace(0.0, PI, n_points)
        return Potential(t, self(t), self.form)

    def to_csv(self, path, value_header: str = "q") -> None:
        write_csv(path, ("t", value_header), zip(self.t, self.values))

    @classmethod
    def from_csv(cls, path) -> "Potential":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or [h.strip() for h in rows[0][:2]] not in (["t", "q"], ["t", "q_hat"]):
            raise ValueError(f"{path}: expected a 't,q' header")
        data = np.array([[float(r[0]), float(r[1])] for r in rows[1:] if r], dtype=float)
        return cls(data[:, 0], data[:, 1])


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence[float]]) -> None:
    """CSV with LF line endings and 17 significant digits."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(f"{float(v):.17g}" for v in row) + "\n")


# ---------------------------------------------------------------------------
# spectral points
# ---------------------------------------------------------------------------


def principal_rho(lam: complex) -> complex:
    """Square root of ``lam`` with ``Re >= 0`` (and ``Im >= 0`` when ``Re == 0``)."""
    rho = cmath.sqrt(complex(lam))
    if rho.real < 0 or (rho.real == 0 and rho.imag < 0):
        rho = -rho
    # cmath returns -0.0 real parts on the negative axis; normalise for clean output
    return complex(rho.real + 0.0, rho.imag + 0.0)


@dataclass(frozen=True)
class SpectralPoint:
    lam: complex
    rho: complex
    multiplicity: int = 1

    def __post_init__(self):
        lam, rho = complex(self.lam), complex(self.rho)
        if rho.real < 0 or (rho.real == 0 and rho.imag < 0):
            raise ValueError("rho must be the principal square root")
        if abs(rho * rho - lam) > 1e-12 * max(1.0, abs(lam)):
            raise ValueError(f"rho^2 = {rho * rho} does not match lambda = {lam}")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "rho", rho)

    @classmethod
    def from_lambda(cls, lam: complex, multiplicity: int = 1) -> "SpectralPoint":
        return cls(complex(lam), principal_rho(lam), multiplicity)

    @classmethod
    def from_rho(cls, rho: complex, multiplicity: int = 1) -> "SpectralPoint":
        rho = principal_rho(complex(rho) ** 2) if complex(rho).real < 0 else complex(rho)
        return cls(rho * rho, rho, multiplicity)

    @property
    def is_real(self) -> bool:
        return abs(self.lam.imag) <= 1e-12 * max(1.0, abs(self.lam))


def _sort_key(p: SpectralPoint):
    return (p.lam.real, p.lam.imag)


@dataclass(frozen=True)
class Spectrum:
    """Finite, conjugate-closed list of eigenvalues indexed ``1..N`` by sorted order."""

    eigenvalues: tuple[SpectralPoint, ...]
    m_max: int | None = None

    def __post_init__(self):
        pts = tuple(sorted(self.eigenvalues, key=_sort_key))
        object.__setattr__(self, "eigenvalues", pts)
        for p in pts:
            if p.is_real:
                continue
            tol = 1e-10 * max(1.0, abs(p.lam))
            if not any(abs(o.lam - p.lam.conjugate()) <= tol for o in pts if o is not p):
                raise ValueError(f"spectrum is not closed under conjugation: {p.lam} has no partner")

    @classmethod
    def from_lambdas(cls, lams: Iterable[complex], m_max: int | None = None) -> "Spectrum":
        return cls(tuple(SpectralPoint.from_lambda(x) for x in lams), m_max)

    @classmethod
    def from_rhos(cls, rhos: Iterable[complex], m_max: int | None = None) -> "Spectrum":
        return cls(tuple(SpectralPoint.from_rho(r) for r in rhos), m_max)

    @property
    def truncation(self) -> int:
        return len(self.eigenvalues)

    def __len__(self):
        return len(self.eigenvalues)

    def __iter__(self):
        return iter(self.eigenvalues)

    def __getitem__(self, m: int) -> SpectralPoint:
        """One-based access, ``spec[1]`` is the lowest eigenvalue."""
        if m < 1:
            raise IndexError("spectra are indexed from 1")
        return self.eigenvalues[m - 1]

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([p.lam for p in self.eigenvalues], dtype=complex)

    @property
    def rhos(self) -> np.ndarray:
        return np.array([p.rho for p in self.eigenvalues], dtype=complex)

    def to_dict(self) -> dict:
        out = {
            "eigenvalues": [{"re": p.lam.real, "im": p.lam.imag} for p in self.eigenvalues],
            "rho": [{"re": p.rho.real, "im": p.rho.imag} for p in self.eigenvalues],
            "m_max": self.m_max,
        }
        mult = [p.multiplicity for p in self.eigenvalues]
        if any(m != 1 for m in mult):
            out["multiplicity"] = mult
        return out

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_dict(cls, data: dict) -> "Spectrum":
        """Accepts eigenvalues, rho values, or both (kept verbatim when both are given and consistent)."""

        def _c(entry):
            if isinstance(entry, dict):
                return complex(entry.get("re", 0.0), entry.get("im", 0.0))
            if isinstance(entry, (list, tuple)):
                return complex(entry[0], entry[1])
            return complex(entry)

        mult = data.get("multiplicity")
        if data.get("rho") and data.get("eigenvalues") and len(data["rho"]) == len(data["eigenvalues"]):
            rhos = [_c(e) for e in data["rho"]]
            lams = [_c(e) for e in data["eigenvalues"]]
            mult = mult or [1] * len(rhos)
            try:
                pts = [SpectralPoint(x, r, k) for x, r, k in zip(lams, rhos, mult)]
            except ValueError:
                pts = [SpectralPoint.from_rho(r, k) for r, k in zip(rhos, mult)]
        elif data.get("rho"):
            rhos = [_c(e) for e in data["rho"]]
            mult = mult or [1] * len(rhos)
            pts = [SpectralPoint.from_rho(r, k) for r, k in zip(rhos, mult)]
        elif data.get("eigenvalues"):
            lams = [_c(e) for e in data["eigenvalues"]]
            mult = mult or [1] * len(lams)
            pts = [SpectralPoint.from_lambda(x, k) for x, k in zip(lams, mult)]
        else:
            raise ValueError("spectrum data carries neither 'eigenvalues' nor 'rho'")
        return cls(tuple(pts), data.get("m_max"))

    @classmethod
    def from_json(cls, path) -> "Spectrum":
        return cls.from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# sine coefficients
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SineCoefficients:
    """``d[m-1]`` is the coefficient of ``sin m(pi - t)``."""

    d: np.ndarray

    def __post_init__(self):
        d = np.array(self.d, dtype=float).reshape(-1)
        if not np.all(np.isfinite(d)):
            raise ValueError("sine coefficients must be finite")
        d.setflags(write=False)
        object.__setattr__(self, "d", d)

    def __len__(self):
        return self.d.size

    def __getitem__(self, m: int) -> float:
        if m < 1:
            raise IndexError("sine modes are indexed from 1")
        return float(self.d[m - 1])

    @property
    def M(self) -> int:
        return self.d.size

    def closed_form(self) -> ClosedForm:
        return ClosedForm.from_sine_modes(self.d)

    def to_potential(self, n_points: int = 513) -> Potential:
        return Potential.from_form(self.closed_form(), n_points)

    def to_dict(self) -> dict:
        return {"basis": SINE_BASIS_TAG, "d": [float(x) for x in self.d]}

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_dict(cls, data: dict) -> "SineCoefficients":
        if data.get("basis") != SINE_BASIS_TAG:
            raise ValueError(f"unsupported basis {data.get('basis')!r}")
        return cls(np.asarray(data["d"], float))

    @classmethod
    def from_json(cls, path) -> "SineCoefficients":
        return cls.from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# kernels and quadrature
# ---------------------------------------------------------------------------


def sinc_kernel(rho: complex, x):
    """``sin(rho x)/rho``, entire in ``lambda = rho^2``.

    ``x`` may be an array.  Where ``|rho x| < 1e-4`` the three-term Taylor
    series is used, which also covers ``rho = 0``.
    """
    rho = complex(rho)
    x = np.asarray(x, dtype=float)
    z = rho * x
    r2x2 = z * z
    series = x * (1.0 - r2x2 / 6.0 + r2x2 * r2x2 / 120.0)
    if rho == 0:
        out = series.astype(complex)
    else:
        small = np.abs(z) < SERIES_CUTOFF
        with np.errstate(invalid="ignore"):
            direct = np.sin(z) / rho
        out = np.where(small, series, direct)
    return complex(out) if out.ndim == 0 else out


def simpson_intervals(length: float, freq: float = 0.0, h_max: float = DEFAULT_H_MAX) -> int:
    """Even number of Simpson intervals for an integrand of the given frequency on ``[0, length]``.

    Guarantees at least ``NODES_PER_PERIOD`` nodes per oscillation period, at
    least ``MIN_INTERVALS`` intervals, and spacing no coarser than ``h_max``.
    """
    n = max(
        MIN_INTERVALS,
        math.ceil(NODES_PER_PERIOD * abs(freq) * length / (2 * PI)),
        math.ceil(length / h_max),
    )
    return n + (n % 2)


def sine_coefficients(q: Potential, M: int, h_max: float = DEFAULT_H_MAX) -> SineCoefficients:
    """``d_m = (2/pi) int_0^pi q(t) sin m(pi - t) dt`` for ``m = 1..M`` by composite Simpson."""
    if M < 1:
        raise ValueError("M must be at least 1")
    n = simpson_intervals(PI, M, h_max)
    t = np.linspace(0.0, PI, n + 1)
    m = np.arange(1, M + 1)[:, None]
    integrand = q(t)[None, :] * np.sin(m * (PI - t[None, :]))
    return SineCoefficients((2.0 / PI) * simpson(integrand, dx=PI / n, axis=1))


def synthesize(d: SineCoefficients, grid) -> np.ndarray:
    """Partial sum ``sum_m d[m] sin m(pi - t)`` evaluated pointwise on ``grid``."""
    t = np.asarray(grid, dtype=float)
    if t.size == 0:
        raise ValueError("grid must be non-empty")
    if np.any(t < -1e-12) or np.any(t > PI + 1e-12):
        raise ValueError("grid points must lie in [0, pi]")
    m = np.arange(1, d.M + 1)
    basis = np.sin(np.multiply.outer(PI - t, m))
    return basis @ d.d
