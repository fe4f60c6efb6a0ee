"""
Inputs and truncated power series of the local zeta identity.

A LocalSeries is a polynomial in u = q^-s and omega = chi(p) with exact cyclotomic
coefficients, stored as {order n: {omega power: coefficient}}.
"""
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from models.padic import PAdicContext, ResidueMat2, valuation
from models.cyclotomic import CyclotomicNumber
from services.error_handler import PreconditionError

IntMat = Tuple[int, int, int, int]


def int_det(m: IntMat) -> int:
    a, b, c, d = m
    return a * d - b * c


@dataclass(frozen=True)
class LocalInput:
    """Units b = (b1, b2) and an integral pair gamma = (gamma1, gamma2), stored as integer lifts."""
    ctx: PAdicContext
    b: Tuple[int, int]
    gamma: Tuple[IntMat, IntMat]
    allow_zero: bool = False

    def __post_init__(self):
        object.__setattr__(self, "b", tuple(int(x) for x in self.b))
        object.__setattr__(self, "gamma", tuple(tuple(int(x) for x in g) for g in self.gamma))
        valid, errors = self.validate()
        if not valid:
            raise PreconditionError("; ".join(errors))

    def validate(self) -> Tuple[bool, List[str]]:
        errors = []
        if len(self.b) != 2 or len(self.gamma) != 2:
            errors.append("b and gamma must be pairs")
            return False, errors
        for i, b in enumerate(self.b):
            if not self.ctx.is_unit(b):
                errors.append(f"b{i + 1}={b} is not a unit at p={self.ctx.p}")
        if any(len(g) != 4 for g in self.gamma):
            errors.append("each gamma_i needs four entries")
        elif self.is_zero and not self.allow_zero:
            errors.append("gamma = (0, 0) is excluded")
        return len(errors) == 0, errors

    @classmethod
    def from_residues(cls, b: Tuple[int, int], gamma: Tuple[ResidueMat2, ResidueMat2],
                      allow_zero: bool = False) -> "LocalInput":
        return cls(gamma[0].ctx, b, (gamma[0].entries, gamma[1].entries), allow_zero)

    @property
    def is_zero(self) -> bool:
        return all(x == 0 for g in self.gamma for x in g)

    @property
    def residues(self) -> Tuple[ResidueMat2, ResidueMat2]:
        return ResidueMat2(self.ctx, self.gamma[0]), ResidueMat2(self.ctx, self.gamma[1])

    @property
    def min_valuation(self) -> int:
        """Smallest p-adic valuation of the eight entries."""
        return min(valuation(x, self.ctx.p) for g in self.gamma for x in g)

    def obstruction(self) -> int:
        """b2 det gamma1 - b1 det gamma2, a unit multiple of P(b^-1, gamma)."""
        return self.b[1] * int_det(self.gamma[0]) - self.b[0] * int_det(self.gamma[1])

    def obstruction_valuation(self) -> int:
        return valuation(self.obstruction(), self.ctx.p)

    def scaled(self, power: int) -> "LocalInput":
        """gamma multiplied by p^power."""
        f = self.ctx.p ** power
        return LocalInput(self.ctx, self.b,
                          tuple(tuple(f * x for x in g) for g in self.gamma), self.allow_zero)

    def to_dict(self) -> Dict[str, Any]:
        return {"p": self.ctx.p, "n": self.ctx.n, "b": list(self.b),
                "gamma": [list(g) for g in self.gamma]}


@dataclass(frozen=True)
class SupportData:
    """Test function 1 on p^-m beta + p^k gl2(Z_p)^2; the default is gl2(Z_p)^2 itself."""
    beta: Tuple[IntMat, IntMat] = ((0, 0, 0, 0), (0, 0, 0, 0))
    m: int = 0
    k: int = 0

    def __post_init__(self):
        if self.m < 0 or self.k < 0:
            raise PreconditionError("support exponents m, k must be nonnegative")

    @property
    def is_spherical(self) -> bool:
        return self.m == 0 and self.k == 0

    def to_dict(self) -> Dict[str, Any]:
        return {"beta": [list(g) for g in self.beta], "m": self.m, "k": self.k}


@dataclass
class LocalSeries:
    """Truncated series sum_n sum_j c[n][j] omega^j u^n."""
    ctx: PAdicContext
    max_order: int
    coeffs: Dict[int, Dict[int, CyclotomicNumber]] = field(default_factory=dict)
    label: str = ""

    def add_term(self, n: int, omega_power: int, value: CyclotomicNumber) -> None:
        """Add value * omega^power * u^n, ignoring terms beyond the truncation order."""
        if n > self.max_order or n < 0:
            return
        row = self.coeffs.setdefault(n, {})
        if omega_power in row:
            row[omega_power] = row[omega_power] + value
        else:
            row[omega_power] = value

    def coefficient(self, n: int, omega_power: Optional[int] = None) -> CyclotomicNumber:
        """Coefficient of omega^power u^n; omega_power defaults to n."""
        power = n if omega_power is None else omega_power
        return self.coeffs.get(n, {}).get(power, CyclotomicNumber.zero())

    def monomials(self) -> List[Tuple[int, int]]:
        return sorted((n, j) for n, row in self.coeffs.items() for j in row)

    def mismatches(self, other: "LocalSeries") -> List[Dict[str, Any]]:
        """Every monomial where the two series differ, with both values."""
        keys = sorted(set(self.monomials()) | set(other.monomials()))
        out = []
        for n, j in keys:
            if n > min(self.max_order, other.max_order):
                continue
            a, b = self.coefficient(n, j), other.coefficient(n, j)
            if a != b:
                out.append({"n": n, "monomial": f"omega^{j} u^{n}", "lhs": a.to_dict(), "rhs": b.to_dict()})
        return out

    def is_zero(self) -> bool:
        return all(v.is_zero() for row in self.coeffs.values() for v in row.values())

    def evaluate(self, omega: complex, u: complex) -> complex:
        total = 0j
        for n, row in self.coeffs.items():
            for j, value in row.items():
                total += value.to_complex() * omega ** j * u ** n
        return total

    def to_rows(self) -> List[Dict[str, Any]]:
        """Flat coefficient table for CSV export."""
        rows = []
        for n, j in self.monomials():
            value = self.coefficient(n, j)
            z = value.to_complex()
            exact = str(value.rational_value()) if value.is_rational() else repr(value)
            rows.append({"series": self.label, "p": self.ctx.p, "n": n, "omega_power": j,
                         "exact": exact, "real": z.real, "imag": z.imag})
        return rows

    def to_dict(self) -> Dict[str, Any]:
        return {"label": self.label, "p": self.ctx.p, "max_order": self.max_order,
                "coefficients": self.to_rows()}
