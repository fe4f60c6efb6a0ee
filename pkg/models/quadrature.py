"""
Quadrature specifications and results.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Any


class QuadratureMethod(Enum):
    """Integration strategy for archimedean integrals."""
    ADAPTIVE_1D = ("adaptive_1d", "Adaptive one-dimensional (QUADPACK)")
    TENSOR_PRODUCT = ("tensor_product", "Product of one-dimensional transforms")
    LOW_DISCREPANCY = ("low_discrepancy", "Scrambled Sobol replicates")

    def __init__(self, code: str, display_name: str):
        self.code = code
        self.display_name = display_name

    @classmethod
    def from_code(cls, code: str) -> "QuadratureMethod":
        for method in cls:
            if method.code == code:
                return method
        raise ValueError(f"Unknown quadrature method: {code}")


@dataclass(frozen=True)
class QuadratureSpec:
    """Method, point budget and seed; results are deterministic for a fixed QuadratureSpec."""
    method: QuadratureMethod = QuadratureMethod.ADAPTIVE_1D
    log2_points: int = 14
    n_estimates: int = 8
    seed: int = 20240611
    epsabs: float = 1e-13
    epsrel: float = 1e-12
    limit: int = 400

    @property
    def points(self) -> int:
        return 2 ** self.log2_points

    def doubled(self) -> "QuadratureSpec":
        return QuadratureSpec(self.method, self.log2_points + 1, self.n_estimates, self.seed,
                              self.epsabs, self.epsrel, self.limit)

    def with_method(self, method: QuadratureMethod) -> "QuadratureSpec":
        return QuadratureSpec(method, self.log2_points, self.n_estimates, self.seed,
                              self.epsabs, self.epsrel, self.limit)

    def to_dict(self) -> Dict[str, Any]:
        return {"method": self.method.code, "log2_points": self.log2_points,
                "n_estimates": self.n_estimates, "seed": self.seed,
                "epsabs": self.epsabs, "epsrel": self.epsrel, "limit": self.limit}


@dataclass(frozen=True)
class QuadratureResult:
    """A value with its error estimate; flagged when the tolerance was not met."""
    value: complex
    error: float
    method: QuadratureMethod
    flagged: bool = False

    @property
    def relative_error(self) -> float:
        return self.error / abs(self.value) if self.value != 0 else float("inf") if self.error else 0.0

    def __add__(self, other: "QuadratureResult") -> "QuadratureResult":
        return QuadratureResult(self.value + other.value, self.error + other.error,
                                self.method, self.flagged or other.flagged)

    def scaled(self, factor: complex) -> "QuadratureResult":
        return QuadratureResult(self.value * factor, self.error * abs(factor), self.method, self.flagged)

    def to_dict(self) -> Dict[str, Any]:
        return {"value": [complex(self.value).real, complex(self.value).imag],
                "error": self.error, "method": self.method.code, "flagged": self.flagged}


class OscillatoryVariant(Enum):
    """Which factor of h(t, P) carries the weight in the archimedean integral."""
    W_OF_T = ("w_t", "W(t) times the T-integral")
    W_OF_P_OVER_T = ("w_p_over_t", "W(P(b,T)/t) inside the T-integral")

    def __init__(self, code: str, display_name: str):
        self.code = code
        self.display_name = display_name

    @classmethod
    def from_code(cls, code: str) -> "OscillatoryVariant":
        for variant in cls:
            if variant.code == code:
                return variant
        raise ValueError(f"Unknown oscillatory variant: {code}")
