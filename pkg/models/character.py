"""
Multiplicative characters of Q_p^x used by the local zeta integrals.
"""
import os
import sys
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Any

project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from sympy import primitive_root

from models.padic import PAdicContext
from models.cyclotomic import CyclotomicNumber
from services.error_handler import PreconditionError


class CharacterKind(Enum):
    """How the character is represented."""
    UNRAMIFIED_FORMAL = ("unramified_formal", "Unramified, chi(p) kept as a formal variable", 0)
    UNRAMIFIED_NUMERIC = ("unramified_numeric", "Unramified with a fixed value chi(p)", 0)
    RAMIFIED = ("ramified", "Conductor p, trivial on 1 + pZ_p", 1)

    def __init__(self, code: str, display_name: str, conductor_exponent: int):
        self.code = code
        self.display_name = display_name
        self.conductor_exponent = conductor_exponent

    @classmethod
    def from_code(cls, code: str) -> "CharacterKind":
        for kind in cls:
            if kind.code == code:
                return kind
        raise PreconditionError(f"Unknown character kind: {code}")


@dataclass(frozen=True, eq=False)
class FiniteCharacter:
    """A character chi of Q_p^x, determined by chi(p) and its values on units."""
    ctx: PAdicContext
    kind: CharacterKind
    omega: Optional[CyclotomicNumber] = None
    unit_values: Dict[int, CyclotomicNumber] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind is CharacterKind.UNRAMIFIED_NUMERIC and self.omega is None:
            raise PreconditionError("numeric unramified characters need chi(p)")
        if self.kind is CharacterKind.RAMIFIED and len(self.unit_values) != self.ctx.p - 1:
            raise PreconditionError("ramified characters need a value on every class of (Z/p)^x")

    @classmethod
    def unramified_formal(cls, ctx: PAdicContext) -> "FiniteCharacter":
        return cls(ctx, CharacterKind.UNRAMIFIED_FORMAL)

    @classmethod
    def unramified(cls, ctx: PAdicContext, omega: CyclotomicNumber) -> "FiniteCharacter":
        return cls(ctx, CharacterKind.UNRAMIFIED_NUMERIC, omega=omega)

    @classmethod
    def ramified(cls, ctx: PAdicContext, power: int = 1) -> "FiniteCharacter":
        """chi(g^a) = zeta_{p-1}^(power * a) for the least primitive root g; chi(p) = 1."""
        p = ctx.p
        if power % (p - 1) == 0:
            raise PreconditionError("power must give a nontrivial character on (Z/p)^x")
        g = int(primitive_root(p))
        values: Dict[int, CyclotomicNumber] = {}
        x = 1
        for a in range(p - 1):
            values[x] = CyclotomicNumber.root(p - 1, power * a)
            x = (x * g) % p
        return cls(ctx, CharacterKind.RAMIFIED, omega=CyclotomicNumber.rational(1), unit_values=values)

    @property
    def conductor_exponent(self) -> int:
        return self.kind.conductor_exponent

    @property
    def is_formal(self) -> bool:
        return self.kind is CharacterKind.UNRAMIFIED_FORMAL

    def __call__(self, u: int) -> CyclotomicNumber:
        """Value on a unit u (an integer prime to p)."""
        if not self.ctx.is_unit(u):
            raise PreconditionError(f"{u} is not a unit at p={self.ctx.p}")
        if self.kind is CharacterKind.RAMIFIED:
            return self.unit_values[int(u) % self.ctx.p]
        return CyclotomicNumber.rational(1)

    def at_uniformizer(self) -> CyclotomicNumber:
        if self.omega is None:
            raise PreconditionError("chi(p) is formal for this character")
        return self.omega

    def to_dict(self) -> Dict[str, Any]:
        return {
            "ctx": self.ctx.to_dict(),
            "kind": self.kind.code,
            "omega": self.omega.to_dict() if self.omega is not None else None,
        }
