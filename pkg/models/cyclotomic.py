"""
Exact elements of Q(zeta_N) in the power basis 1, z, ..., z^(phi(N)-1).
"""
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import List, Sequence, Tuple, Union, Dict, Any

project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

import numpy as np
from sympy import cyclotomic_poly, factorint, totient
from sympy.abc import x as _x

from services.error_handler import PreconditionError

Scalar = Union[int, Fraction]


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


@lru_cache(maxsize=None)
def _prime_power(order: int) -> Tuple[int, int]:
    """(p, k) when order = p^k with k >= 1, otherwise (0, 0)."""
    factors = factorint(order)
    if len(factors) == 1:
        (p, k), = factors.items()
        return p, k
    return 0, 0


@lru_cache(maxsize=None)
def _phi(order: int) -> int:
    return int(totient(order))


@lru_cache(maxsize=None)
def _cyclotomic_tail(order: int) -> Tuple[int, ...]:
    """Coefficients c_0..c_{phi-1} with z^phi = -(c_0 + c_1 z + ... )."""
    coeffs = [int(c) for c in reversed(cyclotomic_poly(order, _x, polys=True).all_coeffs())]
    return tuple(coeffs[:-1])


def _reduce(vec: List, order: int) -> List:
    """Reduce a length-`order` coefficient list modulo Phi_order, in place."""
    phi = _phi(order)
    p, k = _prime_power(order)
    if p:
        step = order // p
        # Phi_{p^k}(z) = sum_{j<p} z^(j p^(k-1)), so z^phi = -sum_{j<p-1} z^(j p^(k-1))
        for i in range(order - 1, phi - 1, -1):
            c = vec[i]
            if c:
                vec[i] = 0
                base = i - phi
                for j in range(p - 1):
                    vec[base + j * step] -= c
    elif order > 1:
        tail = _cyclotomic_tail(order)
        for i in range(order - 1, phi - 1, -1):
            c = vec[i]
            if c:
                vec[i] = 0
                base = i - phi
                for j, t in enumerate(tail):
                    if t:
                        vec[base + j] -= c * t
    else:
        # order 1: z = 1
        return [sum(vec)]
    return vec[:phi]


@dataclass(frozen=True, eq=False)
class CyclotomicNumber:
    """Exact element sum_i coeffs[i] * zeta_order^i with rational coefficients."""
    order: int
    coeffs: Tuple[Fraction, ...]

    def __post_init__(self):
        if self.order < 1:
            raise PreconditionError(f"cyclotomic order must be positive, got {self.order}")
        if len(self.coeffs) != _phi(self.order):
            raise PreconditionError(
                f"order {self.order} needs {_phi(self.order)} coefficients, got {len(self.coeffs)}")

    # Constructors ------------------------------------------------------
    @classmethod
    def from_exponents(cls, order: int, counts: Sequence[Scalar], scale: Scalar = 1) -> "CyclotomicNumber":
        """sum_k counts[k] * zeta^k * scale, for a length-`order` sequence."""
        if len(counts) != order:
            raise PreconditionError("exponent table length must equal the order")
        vec = [int(c) if isinstance(c, (int, np.integer)) else Fraction(c) for c in counts]
        reduced = _reduce(vec, order)
        s = Fraction(scale)
        return cls(order, tuple(Fraction(c) * s for c in reduced))

    @classmethod
    def from_histogram(cls, order: int, counts: Sequence[int], scale: Scalar = 1) -> "CyclotomicNumber":
        """sum_k counts[k] * zeta^(-k) * scale; phase histograms are stored this way."""
        counts = list(counts)
        flipped = [counts[(-k) % order] for k in range(order)]
        return cls.from_exponents(order, flipped, scale)

    @classmethod
    def rational(cls, value: Scalar) -> "CyclotomicNumber":
        return cls(1, (Fraction(value),))

    @classmethod
    def zero(cls, order: int = 1) -> "CyclotomicNumber":
        return cls(order, tuple(Fraction(0) for _ in range(_phi(order))))

    @classmethod
    def root(cls, order: int, exponent: int = 1) -> "CyclotomicNumber":
        """zeta_order^exponent."""
        vec = [0] * order
        vec[exponent % order] = 1
        return cls.from_exponents(order, vec)

    # Structure ---------------------------------------------------------
    def lift(self, new_order: int) -> "CyclotomicNumber":
        """Same number written in Q(zeta_new_order); order must divide new_order."""
        if new_order == self.order:
            return self
        if new_order % self.order:
            raise PreconditionError(f"cannot lift order {self.order} to {new_order}")
        factor = new_order // self.order
        vec: List = [0] * new_order
        for i, c in enumerate(self.coeffs):
            if c:
                vec[i * factor] = c
        return CyclotomicNumber(new_order, tuple(Fraction(c) for c in _reduce(vec, new_order)))

    def _common(self, other: "CyclotomicNumber") -> Tuple["CyclotomicNumber", "CyclotomicNumber"]:
        order = _lcm(self.order, other.order)
        return self.lift(order), other.lift(order)

    @staticmethod
    def _coerce(other) -> "CyclotomicNumber":
        if isinstance(other, CyclotomicNumber):
            return other
        if isinstance(other, (int, Fraction, np.integer)):
            return CyclotomicNumber.rational(Fraction(int(other)) if isinstance(other, np.integer) else other)
        return NotImplemented

    # Arithmetic --------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self._common(other)
        return CyclotomicNumber(a.order, tuple(x + y for x, y in zip(a.coeffs, b.coeffs)))

    __radd__ = __add__

    def __neg__(self) -> "CyclotomicNumber":
        return CyclotomicNumber(self.order, tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, np.integer)):
            s = Fraction(int(other)) if isinstance(other, np.integer) else Fraction(other)
            return CyclotomicNumber(self.order, tuple(c * s for c in self.coeffs))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.order == 1:
            return self * other.coeffs[0]
        if self.order == 1:
            return other * self.coeffs[0]
        a, b = self._common(other)
        n = a.order
        vec: List = [Fraction(0)] * n
        for i, x in enumerate(a.coeffs):
            if x:
                for j, y in enumerate(b.coeffs):
                    if y:
                        vec[(i + j) % n] += x * y
        return CyclotomicNumber(n, tuple(_reduce(vec, n)))

    __rmul__ = __mul__

    def __truediv__(self, other: Scalar) -> "CyclotomicNumber":
        if not isinstance(other, (int, Fraction)):
            return NotImplemented
        return self * (Fraction(1) / Fraction(other))

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return (self - other).is_zero()

    def __ne__(self, other) -> bool:
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    __hash__ = None

    # Queries -----------------------------------------------------------
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise PreconditionError("number is not rational")
        return self.coeffs[0]

    def conjugate(self) -> "CyclotomicNumber":
        """Complex conjugate (zeta -> zeta^-1)."""
        vec: List = [Fraction(0)] * self.order
        for i, c in enumerate(self.coeffs):
            vec[(-i) % self.order] += c
        if self.order == 1:
            return self
        return CyclotomicNumber(self.order, tuple(_reduce(vec, self.order)))

    def minimal_order(self) -> "CyclotomicNumber":
        """Drop to order 1 when the value is rational; any other value keeps its order."""
        if self.is_rational():
            return CyclotomicNumber.rational(self.coeffs[0])
        return self

    def to_complex(self) -> complex:
        """Principal embedding zeta -> exp(2 pi i / order)."""
        if self.order == 1:
            return complex(float(self.coeffs[0]))
        k = np.arange(len(self.coeffs))
        weights = np.array([float(c) for c in self.coeffs])
        return complex(np.sum(weights * np.exp(2j * np.pi * k / self.order)))

    def __abs__(self) -> float:
        return abs(self.to_complex())

    def __repr__(self) -> str:
        if self.is_rational():
            return f"CyclotomicNumber({self.coeffs[0]})"
        terms = [f"{c}*z^{i}" for i, c in enumerate(self.coeffs) if c]
        return f"CyclotomicNumber(order={self.order}: {' + '.join(terms)})"

    def to_dict(self) -> Dict[str, Any]:
        return {"order": self.order, "coeffs": [str(c) for c in self.coeffs],
                "complex": [self.to_complex().real, self.to_complex().imag]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CyclotomicNumber":
        return cls(int(data["order"]), tuple(Fraction(c) for c in data["coeffs"]))
