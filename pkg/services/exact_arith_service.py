"""
Exact arithmetic operations: p-adic fractional parts, the additive character,
matrix invariants and character multiplicativity.
"""
# Standard libraries
import os
import sys
from fractions import Fraction
from typing import Tuple, Union

# Path resolution
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

# Third-party libraries
import numpy as np

# Local imports
from models.padic import PAdicContext, ResidueMat2, valuation
from models.cyclotomic import CyclotomicNumber
from models.character import FiniteCharacter, CharacterKind
from models.report import CheckResult
from services.error_handler import PrecisionExceededError, PreconditionError
from utils.logger import get_logger

logger = get_logger(__name__)

Rational = Union[int, Fraction]


class ExactArithService:
    """Service wrapping the residue ring and cyclotomic substrate."""

    def __init__(self):
        logger.info("ExactArithService initialized")

    def padic_fractional_part(self, a: Rational, ctx: PAdicContext) -> Fraction:
        """Return r in [0, 1) with denominator dividing p^n and a - r in Z_p."""
        a = Fraction(a)
        p = ctx.p
        den = a.denominator
        e = 0
        while den % p == 0:
            den //= p
            e += 1
        if e > ctx.n:
            raise PrecisionExceededError(
                f"{a} has denominator p^{e} beyond the precision p^{ctx.n}")
        if e == 0:
            return Fraction(0)
        modulus = p ** e
        # a = num / (p^e * u) with u prime to p; num * u^-1 mod p^e is the numerator
        k = (a.numerator * pow(den, -1, modulus)) % modulus
        return Fraction(k, modulus)

    def additive_character(self, a: Rational, ctx: PAdicContext) -> CyclotomicNumber:
        """psi_p(a) = exp(-2 pi i {a}_p), as zeta_{p^n}^(-k)."""
        r = self.padic_fractional_part(a, ctx)
        k = (r * ctx.modulus).numerator
        return CyclotomicNumber.root(ctx.modulus, -k)

    def psi_exponent(self, a: Rational, ctx: PAdicContext) -> int:
        """k with psi_p(a) = zeta_{p^n}^(-k)."""
        return (self.padic_fractional_part(a, ctx) * ctx.modulus).numerator

    def mat_det_trace(self, m: ResidueMat2) -> Tuple[int, int]:
        return m.det, m.trace

    def unit_inverse(self, u: int, ctx: PAdicContext) -> int:
        return ctx.inverse(u)

    def valuation(self, a: Rational, p: int) -> int:
        return valuation(a, p)

    def character_sum_vanishes(self, ctx: PAdicContext) -> bool:
        """sum over a mod p^n of psi(a / p^n) is exactly zero."""
        total = CyclotomicNumber.zero(ctx.modulus)
        counts = np.ones(ctx.modulus, dtype=np.int64)
        total = total + CyclotomicNumber.from_histogram(ctx.modulus, counts)
        return total.is_zero()

    def det_multiplicativity_check(self, p: int) -> CheckResult:
        """det(AB) = det(A)det(B) and tr(A+B) = tr(A)+tr(B) for every pair mod p."""
        ctx = PAdicContext(p, 1)
        grid = np.array(np.meshgrid(*[np.arange(p)] * 4, indexing="ij")).reshape(4, -1).T
        a, b, c, d = grid.T
        det = (a * d - b * c) % p
        bad = 0
        for row in grid:
            e, f, g, h = row
            prod = np.stack([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h])
            det_prod = (prod[0] * prod[3] - prod[1] * prod[2]) % p
            det_row = (e * h - f * g) % p
            bad += int(np.count_nonzero(det_prod != (det * det_row) % p))
            tr_sum = (a + e + d + h) % p
            bad += int(np.count_nonzero(tr_sum != ((a + d) + (e + h)) % p))
        logger.info(f"det/trace multiplicativity over (Z/{p})^4 x (Z/{p})^4: {bad} violations")
        return CheckResult(
            name=f"det_multiplicativity_p{p}",
            passed=bad == 0,
            statement="det(AB) = det(A)det(B), tr(A+B) = tr(A)+tr(B)",
            details={"p": ctx.p, "pairs": len(grid) ** 2, "violations": bad},
        )

    def multiplicativity_check(self, chi: FiniteCharacter) -> CheckResult:
        """chi(ab) = chi(a)chi(b) on (Z/p)^x, exhaustively."""
        p = chi.ctx.p
        failures = []
        for a in range(1, p):
            for b in range(1, p):
                if chi(a * b % p) != chi(a) * chi(b):
                    failures.append((a, b))
        return CheckResult(
            name=f"character_multiplicativity_{chi.kind.code}_p{p}",
            passed=not failures,
            statement="chi(ab) = chi(a)chi(b) on units",
            details={"p": p, "failures": failures[:10]},
        )

    def make_character(self, ctx: PAdicContext, kind: str, power: int = 1) -> FiniteCharacter:
        kind_enum = CharacterKind.from_code(kind)
        if kind_enum is CharacterKind.RAMIFIED:
            return FiniteCharacter.ramified(ctx, power)
        if kind_enum is CharacterKind.UNRAMIFIED_FORMAL:
            return FiniteCharacter.unramified_formal(ctx)
        raise PreconditionError("numeric unramified characters need an explicit chi(p)")
