"""
Residue rings Z/p^n and 2x2 matrices over them.
"""
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Tuple, List, Union, Dict, Any

project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from sympy import isprime

from services.error_handler import PreconditionError, PrecisionExceededError

Rational = Union[int, Fraction]

INFINITE_VALUATION = 10 ** 9


def valuation(a: Rational, p: int) -> int:
    """p-adic valuation of a nonzero rational; INFINITE_VALUATION for 0."""
    a = Fraction(a)
    if a == 0:
        return INFINITE_VALUATION
    v = 0
    num, den = a.numerator, a.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def padic_integer_lift(a: Rational, p: int, modulus: int) -> int:
    """Integer congruent to a modulo `modulus` (a power of p); a must be p-integral."""
    a = Fraction(a)
    if a.denominator % p == 0:
        raise PrecisionExceededError(f"{a} is not {p}-integral")
    return (a.numerator * pow(a.denominator, -1, modulus)) % modulus if modulus > 1 else 0


def odd_part(m: int) -> int:
    """|m| with every factor of 2 removed; 0 stays 0."""
    m = abs(int(m))
    if m == 0:
        return 0
    while m % 2 == 0:
        m //= 2
    return m


@dataclass(frozen=True)
class PAdicContext:
    """Residue ring Z/p^n for an odd prime p."""
    p: int
    n: int

    def __post_init__(self):
        valid, errors = self.validate()
        if not valid:
            raise PreconditionError("; ".join(errors))

    def validate(self) -> Tuple[bool, List[str]]:
        """Check the context parameters."""
        errors = []
        if not isinstance(self.p, int) or not isprime(self.p):
            errors.append(f"p={self.p} is not prime")
        elif self.p == 2:
            errors.append("the dyadic place lies in S; use an odd prime")
        if not isinstance(self.n, int) or self.n < 1:
            errors.append(f"precision n={self.n} must be a positive integer")
        return len(errors) == 0, errors

    @property
    def q(self) -> int:
        """Residue field cardinality."""
        return self.p

    @property
    def modulus(self) -> int:
        return self.p ** self.n

    def is_unit(self, x: int) -> bool:
        return int(x) % self.p != 0

    def inverse(self, x: int) -> int:
        if not self.is_unit(x):
            raise PreconditionError(f"{x} is not a unit modulo {self.p}")
        return pow(int(x), -1, self.modulus)

    def reduce(self, x: Rational) -> int:
        return padic_integer_lift(x, self.p, self.modulus)

    def to_dict(self) -> Dict[str, Any]:
        return {"p": self.p, "n": self.n}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PAdicContext":
        return cls(p=int(data["p"]), n=int(data["n"]))


@dataclass(frozen=True)
class ResidueMat2:
    """2x2 matrix ((a, b), (c, d)) over Z/p^n, entries stored reduced."""
    ctx: PAdicContext
    entries: Tuple[int, int, int, int] = field(default=(0, 0, 0, 0))

    def __post_init__(self):
        if len(self.entries) != 4:
            raise PreconditionError("ResidueMat2 needs exactly four entries")
        reduced = tuple(self.ctx.reduce(e) for e in self.entries)
        object.__setattr__(self, "entries", reduced)

    @classmethod
    def identity(cls, ctx: PAdicContext) -> "ResidueMat2":
        return cls(ctx, (1, 0, 0, 1))

    @classmethod
    def zero(cls, ctx: PAdicContext) -> "ResidueMat2":
        return cls(ctx, (0, 0, 0, 0))

    @classmethod
    def scalar(cls, ctx: PAdicContext, s: Rational) -> "ResidueMat2":
        return cls(ctx, (s, 0, 0, s))

    @property
    def det(self) -> int:
        a, b, c, d = self.entries
        return (a * d - b * c) % self.ctx.modulus

    @property
    def trace(self) -> int:
        a, _, _, d = self.entries
        return (a + d) % self.ctx.modulus

    def _check(self, other: "ResidueMat2") -> None:
        if other.ctx != self.ctx:
            raise PreconditionError("matrices live over different residue rings")

    def __add__(self, other: "ResidueMat2") -> "ResidueMat2":
        self._check(other)
        return ResidueMat2(self.ctx, tuple(x + y for x, y in zip(self.entries, other.entries)))

    def __sub__(self, other: "ResidueMat2") -> "ResidueMat2":
        self._check(other)
        return ResidueMat2(self.ctx, tuple(x - y for x, y in zip(self.entries, other.entries)))

    def __neg__(self) -> "ResidueMat2":
        return ResidueMat2(self.ctx, tuple(-x for x in self.entries))

    def __mul__(self, other: "ResidueMat2") -> "ResidueMat2":
        self._check(other)
        a, b, c, d = self.entries
        e, f, g, h = other.entries
        return ResidueMat2(self.ctx, (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h))

    def scale(self, u: Rational) -> "ResidueMat2":
        s = self.ctx.reduce(u)
        return ResidueMat2(self.ctx, tuple(s * x for x in self.entries))

    def adjugate(self) -> "ResidueMat2":
        """The flip map (x1 x2; x3 x4) -> (x4 -x2; -x3 x1)."""
        a, b, c, d = self.entries
        return ResidueMat2(self.ctx, (d, -b, -c, a))

    def trace_pairing(self, other: "ResidueMat2") -> int:
        """tr(self * other) mod p^n."""
        return (self * other).trace

    def min_valuation(self) -> int:
        """Smallest p-adic valuation among entries (capped at n for zero residues)."""
        vals = [min(valuation(e, self.ctx.p), self.ctx.n) for e in self.entries]
        return min(vals)

    def lifted(self) -> Tuple[int, int, int, int]:
        return self.entries

    def to_dict(self) -> Dict[str, Any]:
        return {"ctx": self.ctx.to_dict(), "entries": list(self.entries)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ResidueMat2":
        return cls(PAdicContext.from_dict(data["ctx"]), tuple(data["entries"]))
