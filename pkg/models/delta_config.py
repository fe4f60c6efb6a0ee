"""
Configuration of the delta-symbol expansion over Q.
"""
import math
import os
import sys
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Dict, List, Tuple

project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from models.smooth_weight import SmoothWeight
from services.error_handler import PreconditionError


class PlaceSet(Enum):
    """The set S of places; the dyadic place contributes the weight 1 on Z_2^x."""
    INF = ("inf", "S = {inf}", (), 1.0)
    INF_2 = ("inf,2", "S = {inf, 2}", (2,), 0.5)

    def __init__(self, code: str, display_name: str, finite_primes: Tuple[int, ...],
                 unit_volume: float):
        self.code = code
        self.display_name = display_name
        self.finite_primes = finite_primes
        # product over finite v in S of vol(Z_v^x)
        self.unit_volume = unit_volume

    @classmethod
    def from_code(cls, code: str) -> "PlaceSet":
        normalized = ",".join(part.strip() for part in str(code).split(","))
        for places in cls:
            if places.code == normalized:
                return places
        raise PreconditionError(f"Unsupported place set: {code}")

    @property
    def contains_two(self) -> bool:
        return 2 in self.finite_primes


@dataclass(frozen=True)
class DeltaConfig:
    """Weight W = W_inf * prod 1_{Z_v^x}, modulus Q and place set S."""
    W: SmoothWeight
    Q: float
    places: PlaceSet = PlaceSet.INF

    def __post_init__(self):
        valid, errors = self.validate()
        if not valid:
            raise PreconditionError("; ".join(errors))

    def validate(self) -> Tuple[bool, List[str]]:
        errors = []
        if self.W.lo <= 0:
            errors.append("the weight must be supported in (0, inf)")
        if self.Q <= 0:
            errors.append("Q must be positive")
        return len(errors) == 0, errors

    @classmethod
    def create(cls, Q: float, places: PlaceSet = PlaceSet.INF, center: float = 2.5,
               radius: float = 1.5) -> "DeltaConfig":
        """Bump W_inf normalised so that the integral of W over F_S is 1."""
        W = SmoothWeight.bump(center, radius).normalized(1.0 / places.unit_volume)
        return cls(W, float(Q), places)

    def with_Q(self, Q: float) -> "DeltaConfig":
        return replace(self, Q=float(Q))

    @property
    def target_integral(self) -> float:
        """Integral of W_inf required by the normalisation."""
        return 1.0 / self.places.unit_volume

    def window(self) -> Tuple[int, int]:
        """Integer range [first, last] of d with d/Q inside the support of W_inf."""
        first = math.floor(self.Q * self.W.lo) + 1
        last = math.ceil(self.Q * self.W.hi) - 1
        return first, last

    def to_dict(self) -> Dict[str, Any]:
        return {"W": self.W.to_dict(), "Q": self.Q, "places": self.places.code}
