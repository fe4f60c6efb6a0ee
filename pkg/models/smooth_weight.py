"""
Smooth compactly supported weights on R and their products on gl2(R)^2.
"""
import os
import sys
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

import mpmath
import numpy as np
from scipy import integrate

from services.error_handler import PreconditionError

# exp(-1/s) is below 1e-434 for s <= 1e-3; treated as exactly 0
_CUTOFF = 1e-3


class WeightShape(Enum):
    """Profile of a smooth weight."""
    BUMP = ("bump", "A exp(-1/(1-u^2)) on the open support")
    PLATEAU = ("plateau", "Smooth step, identically A on the plateau")

    def __init__(self, code: str, display_name: str):
        self.code = code
        self.display_name = display_name

    @classmethod
    def from_code(cls, code: str) -> "WeightShape":
        for shape in cls:
            if shape.code == code:
                return shape
        raise ValueError(f"Unknown weight shape: {code}")


def _bump_parts(u: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """phi(u) = exp(-1/(1-u^2)) with its first and second u-derivatives."""
    s = 1.0 - u * u
    inside = s > _CUTOFF
    phi = np.zeros_like(u)
    d1 = np.zeros_like(u)
    d2 = np.zeros_like(u)
    si = s[inside]
    ui = u[inside]
    val = np.exp(-1.0 / si)
    g1 = -2.0 * ui / si ** 2
    g2 = -2.0 / si ** 2 - 8.0 * ui ** 2 / si ** 3
    phi[inside] = val
    d1[inside] = val * g1
    d2[inside] = val * (g1 ** 2 + g2)
    return phi, d1, d2


def _edge(z: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """e(z) = exp(-1/z) for z > 0, else 0, with derivatives."""
    e0 = np.zeros_like(z)
    e1 = np.zeros_like(z)
    e2 = np.zeros_like(z)
    pos = z > _CUTOFF
    zp = z[pos]
    val = np.exp(-1.0 / zp)
    e0[pos] = val
    e1[pos] = val / zp ** 2
    e2[pos] = val * (1.0 / zp ** 4 - 2.0 / zp ** 3)
    return e0, e1, e2


def _step_parts(z: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """S(z) = e(z) / (e(z) + e(1-z)): 0 for z <= 0, 1 for z >= 1."""
    a, a1, a2 = _edge(z)
    b, e1, e2 = _edge(1.0 - z)
    b1 = -e1
    b2 = e2
    den = a + b
    s0 = np.where(z >= 1.0, 1.0, 0.0)
    s1 = np.zeros_like(z)
    s2 = np.zeros_like(z)
    mid = den > 0
    am, bm, dm = a[mid], b[mid], den[mid]
    a1m, b1m, a2m, b2m = a1[mid], b1[mid], a2[mid], b2[mid]
    num1 = a1m * bm - am * b1m
    s0[mid] = am / dm
    s1[mid] = num1 / dm ** 2
    s2[mid] = ((a2m * bm - am * b2m) * dm - 2.0 * num1 * (a1m + b1m)) / dm ** 3
    return s0, s1, s2


@dataclass(frozen=True)
class SmoothWeight:
    """
    Smooth weight supported in [lo, hi].

    BUMP weights are A exp(-1/(1-u^2)) with u = (x - centre)/radius. PLATEAU weights equal A
    on [plateau_lo, plateau_hi] and ramp smoothly to 0 at lo and hi.
    """
    lo: float
    hi: float
    amplitude: float = 1.0
    shape: WeightShape = WeightShape.BUMP
    plateau_lo: Optional[float] = None
    plateau_hi: Optional[float] = None

    def __post_init__(self):
        valid, errors = self.validate()
        if not valid:
            raise PreconditionError("; ".join(errors))

    def validate(self) -> Tuple[bool, List[str]]:
        errors = []
        if not self.lo < self.hi:
            errors.append(f"empty support ({self.lo}, {self.hi})")
        if self.shape is WeightShape.PLATEAU:
            if self.plateau_lo is None or self.plateau_hi is None:
                errors.append("plateau weights need plateau bounds")
            elif not self.lo < self.plateau_lo <= self.plateau_hi < self.hi:
                errors.append("plateau must sit strictly inside the support")
        return len(errors) == 0, errors

    # Constructors ------------------------------------------------------
    @classmethod
    def bump(cls, center: float, radius: float, amplitude: float = 1.0) -> "SmoothWeight":
        return cls(center - radius, center + radius, amplitude)

    @classmethod
    def plateau(cls, lo: float, plateau_lo: float, plateau_hi: float, hi: float,
                amplitude: float = 1.0) -> "SmoothWeight":
        return cls(lo, hi, amplitude, WeightShape.PLATEAU, plateau_lo, plateau_hi)

    def scaled(self, factor: float) -> "SmoothWeight":
        return replace(self, amplitude=self.amplitude * factor)

    def normalized(self, total: float = 1.0, dps: int = 50) -> "SmoothWeight":
        """Same profile with amplitude chosen so that the integral equals `total`."""
        shape_integral = self.shape_integral_mp(dps)
        with mpmath.workdps(dps):
            amplitude = mpmath.mpf(total) / shape_integral
        return replace(self, amplitude=float(amplitude))

    # Geometry ----------------------------------------------------------
    @property
    def center(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def radius(self) -> float:
        return 0.5 * (self.hi - self.lo)

    @property
    def support(self) -> Tuple[float, float]:
        return self.lo, self.hi

    def contains(self, x: float) -> bool:
        return self.lo < x < self.hi

    def equals_one_on(self, lo: float, hi: float) -> bool:
        """True when the weight is identically 1 on [lo, hi]."""
        if self.shape is not WeightShape.PLATEAU or self.amplitude != 1.0:
            return False
        return self.plateau_lo <= lo and hi <= self.plateau_hi

    # Evaluation --------------------------------------------------------
    def _parts(self, x) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        if self.shape is WeightShape.BUMP:
            r = self.radius
            phi, d1, d2 = _bump_parts((flat - self.center) / r)
            parts = (phi, d1 / r, d2 / r ** 2)
        else:
            wl = self.plateau_lo - self.lo
            wr = self.hi - self.plateau_hi
            l0, l1, l2 = _step_parts((flat - self.lo) / wl)
            r0, r1, r2 = _step_parts((self.hi - flat) / wr)
            l1, l2 = l1 / wl, l2 / wl ** 2
            r1, r2 = -r1 / wr, r2 / wr ** 2
            parts = (l0 * r0, l1 * r0 + l0 * r1, l2 * r0 + 2.0 * l1 * r1 + l0 * r2)
        return tuple(self.amplitude * p.reshape(x.shape) for p in parts)

    def __call__(self, x):
        value = self._parts(x)[0]
        return float(value) if np.ndim(value) == 0 else value

    def derivative(self, x, order: int = 1):
        if order not in (1, 2):
            raise PreconditionError("derivatives of order 1 and 2 are available")
        value = self._parts(x)[order]
        return float(value) if np.ndim(value) == 0 else value

    def evaluate_mp(self, x) -> mpmath.mpf:
        """Multiple precision evaluation at the current mpmath precision."""
        x = mpmath.mpf(x)
        if not (self.lo < x < self.hi):
            return mpmath.mpf(0)
        if self.shape is WeightShape.BUMP:
            u = (x - mpmath.mpf(self.center)) / mpmath.mpf(self.radius)
            return mpmath.mpf(self.amplitude) * mpmath.exp(-1 / (1 - u * u))

        def step(z):
            if z <= 0:
                return mpmath.mpf(0)
            if z >= 1:
                return mpmath.mpf(1)
            a, b = mpmath.exp(-1 / z), mpmath.exp(-1 / (1 - z))
            return a / (a + b)

        left = step((x - self.lo) / (mpmath.mpf(self.plateau_lo) - self.lo))
        right = step((self.hi - x) / (self.hi - mpmath.mpf(self.plateau_hi)))
        return mpmath.mpf(self.amplitude) * left * right

    def shape_integral_mp(self, dps: int = 50) -> mpmath.mpf:
        """Integral of the profile with unit amplitude, by tanh-sinh quadrature."""
        unit = replace(self, amplitude=1.0)
        with mpmath.workdps(dps):
            if self.shape is WeightShape.BUMP:
                return mpmath.quad(unit.evaluate_mp, [self.lo, self.center, self.hi])
            return mpmath.quad(unit.evaluate_mp, [self.lo, self.plateau_lo, self.plateau_hi, self.hi])

    def integral(self, epsabs: float = 1e-14) -> float:
        points = [self.center] if self.shape is WeightShape.BUMP else [self.plateau_lo, self.plateau_hi]
        value, _ = integrate.quad(lambda x: self(x), self.lo, self.hi, points=points,
                                  epsabs=epsabs, limit=200)
        return value

    def to_dict(self) -> Dict[str, Any]:
        return {"shape": self.shape.code, "lo": self.lo, "hi": self.hi, "amplitude": self.amplitude,
                "plateau_lo": self.plateau_lo, "plateau_hi": self.plateau_hi}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SmoothWeight":
        return cls(float(data["lo"]), float(data["hi"]), float(data.get("amplitude", 1.0)),
                   WeightShape.from_code(data.get("shape", "bump")),
                   data.get("plateau_lo"), data.get("plateau_hi"))


def _interval_product(a: Tuple[float, float], b: Tuple[float, float]) -> Tuple[float, float]:
    corners = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
    return min(corners), max(corners)


@dataclass(frozen=True)
class MatrixBump:
    """
    f(T1, T2) = amplitude * prod of eight entry weights, entries ordered
    (T1_11, T1_12, T1_21, T1_22, T2_11, T2_12, T2_21, T2_22).
    """
    factors: Tuple[SmoothWeight, ...]
    amplitude: float = 1.0

    def __post_init__(self):
        if len(self.factors) != 8:
            raise PreconditionError("a matrix bump needs eight entry weights")
        for i in range(2):
            if self.min_abs_det(i) <= 0:
                raise PreconditionError(f"the support box of T{i + 1} meets det = 0")

    @classmethod
    def from_boxes(cls, diag: Sequence[Tuple[float, float]], off: Sequence[Tuple[float, float]],
                   amplitude: float = 1.0) -> "MatrixBump":
        """Bumps on (lo, hi) intervals; diag[i] for both diagonal entries of T_i, off[i] for the others."""
        factors = []
        for i in range(2):
            d = SmoothWeight(diag[i][0], diag[i][1])
            o = SmoothWeight(off[i][0], off[i][1])
            factors.extend([d, o, o, d])
        return cls(tuple(factors), amplitude)

    @property
    def box(self) -> Tuple[np.ndarray, np.ndarray]:
        return (np.array([f.lo for f in self.factors]), np.array([f.hi for f in self.factors]))

    def entry_interval(self, j: int) -> Tuple[float, float]:
        return self.factors[j].lo, self.factors[j].hi

    def det_range(self, i: int) -> Tuple[float, float]:
        """Interval enclosing det T_i over the support box."""
        a, b, c, d = (self.entry_interval(4 * i + j) for j in range(4))
        ad = _interval_product(a, d)
        bc = _interval_product(b, c)
        return ad[0] - bc[1], ad[1] - bc[0]

    def min_abs_det(self, i: int) -> float:
        lo, hi = self.det_range(i)
        if lo <= 0 <= hi:
            return 0.0
        return min(abs(lo), abs(hi))

    def P_range(self, b: Tuple[float, float]) -> Tuple[float, float]:
        """Interval enclosing P(b, T) = b1 det T1 - b2 det T2 over the box."""
        d1 = _interval_product((b[0], b[0]), self.det_range(0))
        d2 = _interval_product((b[1], b[1]), self.det_range(1))
        return d1[0] - d2[1], d1[1] - d2[0]

    def __call__(self, T: np.ndarray) -> np.ndarray:
        T = np.asarray(T, dtype=float)
        value = np.full(T.shape[:-1], self.amplitude)
        for j, f in enumerate(self.factors):
            value = value * f(T[..., j])
        return value

    def scaled(self, factor: float) -> "MatrixBump":
        return MatrixBump(self.factors, self.amplitude * factor)

    def to_dict(self) -> Dict[str, Any]:
        return {"amplitude": self.amplitude, "factors": [f.to_dict() for f in self.factors]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MatrixBump":
        return cls(tuple(SmoothWeight.from_dict(f) for f in data["factors"]),
                   float(data.get("amplitude", 1.0)))


@dataclass(frozen=True)
class CompositeMatrixWeight:
    """Finite sum of matrix bumps."""
    parts: Tuple[MatrixBump, ...] = field(default_factory=tuple)

    @property
    def box(self) -> Tuple[np.ndarray, np.ndarray]:
        los = np.min([p.box[0] for p in self.parts], axis=0)
        his = np.max([p.box[1] for p in self.parts], axis=0)
        return los, his

    def P_range(self, b: Tuple[float, float]) -> Tuple[float, float]:
        ranges = [p.P_range(b) for p in self.parts]
        return min(r[0] for r in ranges), max(r[1] for r in ranges)

    def __call__(self, T: np.ndarray) -> np.ndarray:
        total = self.parts[0](T)
        for part in self.parts[1:]:
            total = total + part(T)
        return total

