"""
Value types of the geometric side over Q with S = {inf, 2}.
"""
import math
import os
import sys
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Dict, List, Tuple

project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

import numpy as np
from sympy import isprime

from models.delta_config import DeltaConfig, PlaceSet
from models.padic import valuation
from models.quadrature import QuadratureSpec
from models.smooth_weight import MatrixBump, SmoothWeight
from services.error_handler import PreconditionError


@dataclass(frozen=True)
class SCtx:
    """
    S = {inf, 2} over Q: O^S = Z[1/2], units +-2^Z, fundamental domain R_{>0} x Z_2^x.
    """
    places: PlaceSet = PlaceSet.INF_2
    discriminant: int = 1

    @property
    def dyadic(self) -> int:
        return 2

    def s_norm(self, x) -> Fraction:
        """|x|_S = |x|_inf |x|_2 for x in Q^x."""
        x = Fraction(x)
        if x == 0:
            raise PreconditionError("|0|_S is not defined")
        return abs(x) * Fraction(2) ** (-valuation(x, 2))

    def is_s_unit(self, x) -> bool:
        x = Fraction(x)
        if x == 0:
            return False
        return abs(x.numerator) & (abs(x.numerator) - 1) == 0 and x.denominator & (x.denominator - 1) == 0

    def in_fundamental_domain(self, x) -> bool:
        """x in R_{>0} x Z_2^x."""
        x = Fraction(x)
        return x > 0 and valuation(x, 2) == 0

    def unit_translate(self, x) -> Tuple[Fraction, Fraction]:
        """The S-unit u with u x in the fundamental domain, and u x."""
        x = Fraction(x)
        if x == 0:
            raise PreconditionError("0 has no unit translate")
        u = Fraction(1 if x > 0 else -1) * Fraction(2) ** (-valuation(x, 2))
        return u, u * x

    def translates_in_domain(self, x, window: int = 8) -> int:
        """Number of +-2^j x, |j| <= window, inside the fundamental domain."""
        x = Fraction(x)
        return sum(1 for j in range(-window, window + 1) for s in (1, -1)
                   if self.in_fundamental_domain(s * Fraction(2) ** j * x))

    def indicator_F(self, b: Tuple[Any, Any]) -> bool:
        """1_F(b) for rational b: b1 in the fundamental domain, b1 and b2 units away from S."""
        return self.in_fundamental_domain(b[0]) and self.is_s_unit(b[0]) and self.is_s_unit(b[1])

    def to_dict(self) -> Dict[str, Any]:
        return {"S": self.places.code, "O_S": "Z[1/2]", "fundamental_domain": "R>0 x Z_2^x",
                "d_F": self.discriminant}


@dataclass(frozen=True)
class HeckeFunction:
    """
    Phi = 1_{v(det)=2} - (p^2+p+1) 1_{p GL2(Z_p)} on gl2(Q_p), evaluated on integer entries.

    Phi only depends on the entries mod p^3.
    """
    p: int
    k: int = 2

    def __post_init__(self):
        if self.k != 2:
            raise PreconditionError("the Hecke function is implemented for k = 2")
        if not isprime(self.p):
            raise PreconditionError(f"p={self.p} is not prime")

    @property
    def coset_count(self) -> int:
        return self.p * self.p + self.p + 1

    @property
    def depth(self) -> int:
        return self.k + 1

    def __call__(self, a, b, c, d) -> np.ndarray:
        p = self.p
        mod = p ** self.depth
        detm = (a * d - b * c) % mod
        on_shell = (detm % p ** self.k == 0) & (detm != 0)
        scalar = (a % p == 0) & (b % p == 0) & (c % p == 0) & (d % p == 0)
        return np.where(on_shell, np.where(scalar, 1 - self.coset_count, 1), 0).astype(np.int64)

    def to_dict(self) -> Dict[str, Any]:
        return {"p": self.p, "k": self.k, "coset_count": self.coset_count}


@dataclass(frozen=True)
class GlobalTestFunction:
    """
    f = f_inf (x) f_2: an archimedean matrix bump pair at unit scale, entering sums as
    f_inf(gamma / sqrt(X)), and at p = 2 the Hecke function of valuation k for T1 with
    1_{GL2(Z_2)} for T2.
    """
    arch: MatrixBump
    p: int = 2
    k: int = 2

    def __post_init__(self):
        HeckeFunction(self.p, self.k)

    @property
    def hecke(self) -> HeckeFunction:
        return HeckeFunction(self.p, self.k)

    def dyadic_weight_T1(self, a, b, c, d) -> np.ndarray:
        return self.hecke(a, b, c, d)

    def dyadic_weight_T2(self, a, b, c, d) -> np.ndarray:
        det = a * d - b * c
        return (det % self.p != 0).astype(np.int64)

    @property
    def depth(self) -> int:
        """Both dyadic factors depend on entries mod p^depth."""
        return self.k + 1

    def scaled(self, factor: float) -> "GlobalTestFunction":
        return replace(self, arch=self.arch.scaled(factor))

    def to_dict(self) -> Dict[str, Any]:
        return {"arch": self.arch.to_dict(), "p": self.p, "k": self.k,
                "f_12": f"1_(v(det)={self.k}) - (p^2+p+1) 1_(p GL2)", "f_22": "1_GL2(Z_p)"}

    @classmethod
    def default(cls) -> "GlobalTestFunction":
        return cls(MatrixBump.from_boxes([(1.5, 2.5), (0.9, 1.6)], [(-0.25, 0.25), (-0.2, 0.2)]))

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GlobalTestFunction":
        return cls(MatrixBump.from_dict(data["arch"]), int(data.get("p", 2)), int(data.get("k", 2)))


@dataclass(frozen=True)
class SigmaParams:
    """X, Q = sqrt(X), the delta-symbol configuration and the weights V1, V2, V3."""
    X: float
    V1: SmoothWeight
    V2: SmoothWeight
    V3: SmoothWeight
    W_center: float = 2.5
    W_radius: float = 1.5

    def __post_init__(self):
        valid, errors = self.validate()
        if not valid:
            raise PreconditionError("; ".join(errors))

    def validate(self) -> Tuple[bool, List[str]]:
        errors = []
        if self.X <= 0:
            errors.append("X must be positive")
        if self.V1.lo < 0:
            errors.append("V1 must be supported in (0, inf)")
        if not self.V2.equals_one_on(self.V1.lo, self.V1.hi):
            errors.append("V2 must be identically 1 on the support of V1")
        if self.V3.lo <= 0:
            errors.append("V3 must be supported in (0, inf)")
        if not self.V3.equals_one_on(0.95, 1.05):
            errors.append("V3 must be identically 1 near 1")
        return len(errors) == 0, errors

    @property
    def Q(self) -> float:
        return math.sqrt(self.X)

    @property
    def delta(self) -> DeltaConfig:
        return DeltaConfig.create(self.Q, PlaceSet.INF_2, self.W_center, self.W_radius)

    def with_X(self, X: float) -> "SigmaParams":
        return replace(self, X=float(X))

    def V(self, x1: np.ndarray, x2: np.ndarray, ratio: np.ndarray) -> np.ndarray:
        """V1(|x1|_S) V2(|x2|_S) V3_inf(x2/x1) from the S-norms and the real ratio."""
        return self.V1(x1) * self.V2(x2) * self.V3(ratio)

    @classmethod
    def default(cls, X: float = 50.0) -> "SigmaParams":
        return cls(float(X), SmoothWeight.bump(2.0, 1.5),
                   SmoothWeight.plateau(0.25, 0.5, 3.5, 5.0),
                   SmoothWeight.plateau(0.5, 0.8, 1.25, 2.0))

    def to_dict(self) -> Dict[str, Any]:
        return {"X": self.X, "Q": self.Q, "V1": self.V1.to_dict(), "V2": self.V2.to_dict(),
                "V3": self.V3.to_dict(), "W": {"center": self.W_center, "radius": self.W_radius}}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SigmaParams":
        W = data.get("W", {})
        return cls(float(data["X"]), SmoothWeight.from_dict(data["V1"]),
                   SmoothWeight.from_dict(data["V2"]), SmoothWeight.from_dict(data["V3"]),
                   float(W.get("center", 2.5)), float(W.get("radius", 1.5)))


@dataclass(frozen=True)
class TruncationSpec:
    """
    Radii of the truncated sums: dual gamma vectors with sup-norm <= gamma_radius (in units
    of the dual lattice), odd c <= c_max, dyadic shells 2^e with e <= e_max.

    The archimedean t-integral of the W(P/t) term runs over t_min_fraction * t_max <= |t| <= t_max
    on t_nodes Gauss-Legendre nodes in log t; below that the |t|^(4-eps) law bounds the tail.
    """
    gamma_radius: int = 1
    c_max: int = 3
    e_max: int = 5
    tail_safety: float = 3.0
    t_nodes: int = 32
    t_min_fraction: float = 0.02
    eps: float = 0.5
    quadrature: QuadratureSpec = field(default_factory=lambda: QuadratureSpec(log2_points=12, n_estimates=4))

    def __post_init__(self):
        if self.gamma_radius < 0 or self.c_max < 0 or self.e_max < 0:
            raise PreconditionError("truncation radii must be nonnegative")
        if not 0 < self.t_min_fraction < 1 or self.t_nodes < 2:
            raise PreconditionError("the t-grid needs 0 < t_min_fraction < 1 and at least two nodes")

    def with_radius(self, gamma_radius: int) -> "TruncationSpec":
        return replace(self, gamma_radius=int(gamma_radius))

    def to_dict(self) -> Dict[str, Any]:
        return {"gamma_radius": self.gamma_radius, "c_max": self.c_max, "e_max": self.e_max,
                "tail_safety": self.tail_safety, "t_nodes": self.t_nodes,
                "t_min_fraction": self.t_min_fraction, "eps": self.eps,
                "quadrature": self.quadrature.to_dict()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TruncationSpec":
        quad = data.get("quadrature", {})
        spec = QuadratureSpec(log2_points=int(quad.get("log2_points", 12)),
                              n_estimates=int(quad.get("n_estimates", 4)),
                              seed=int(quad.get("seed", QuadratureSpec().seed)))
        return cls(int(data.get("gamma_radius", 1)), int(data.get("c_max", 3)), int(data.get("e_max", 5)),
                   float(data.get("tail_safety", 3.0)), int(data.get("t_nodes", 32)),
                   float(data.get("t_min_fraction", 0.02)), float(data.get("eps", 0.5)), spec)


@dataclass(frozen=True)
class SatakePair:
    alpha: complex
    beta: complex

    @classmethod
    def from_ratio(cls, x: complex, phase: float = 0.0) -> "SatakePair":
        """alpha/beta = x and alpha beta = exp(i phase)."""
        ab = complex(np.exp(1j * phase))
        alpha = complex(np.sqrt(x * ab))
        return cls(alpha, ab / alpha)

    @property
    def product(self) -> complex:
        return self.alpha * self.beta

    def is_generic_unitary(self, q: float, delta: float = 0.0) -> bool:
        bound = q ** (0.5 - delta)
        return (abs(abs(self.product) - 1) < 1e-12 and abs(self.alpha) < bound
                and abs(self.beta) < bound)


@dataclass
class SigmaResult:
    """A geometric-side value with its error budget and truncation bookkeeping."""
    name: str
    value: float
    error_budget: float = 0.0
    flagged: bool = False
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "value": self.value, "error_budget": self.error_budget,
                "flagged": self.flagged, "details": self.details}
