"""
Tests for the exact arithmetic substrate: cyclotomic numbers, residue rings,
p-adic fractional parts and finite characters.
"""
import cmath
import os
import sys
from fractions import Fraction

import numpy as np
import pytest

# Add project root to path
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from models.character import CharacterKind, FiniteCharacter
from models.cyclotomic import CyclotomicNumber
from models.geometric import HeckeFunction, SCtx
from models.padic import (INFINITE_VALUATION, PAdicContext, ResidueMat2, odd_part,
                          padic_integer_lift, valuation)
from services.error_handler import PrecisionExceededError, PreconditionError
from services.exact_arith_service import ExactArithService


class TestCyclotomicNumber:
    """Exact arithmetic in Q(zeta_N)."""

    def test_root_sum_vanishes(self):
        """1 + zeta_3 + zeta_3^2 = 0."""
        total = CyclotomicNumber.rational(1) + CyclotomicNumber.root(3, 1) + CyclotomicNumber.root(3, 2)
        assert total.is_zero()

    def test_square_of_i(self):
        """zeta_4^2 = -1."""
        i = CyclotomicNumber.root(4, 1)
        assert i * i == -1

    def test_mixed_orders_multiply_in_the_lcm(self):
        """zeta_3 * zeta_4 = zeta_12^7."""
        product = CyclotomicNumber.root(3, 1) * CyclotomicNumber.root(4, 1)
        assert product == CyclotomicNumber.root(12, 7)
        assert product.order == 12

    def test_lift(self):
        assert CyclotomicNumber.root(3, 1).lift(9) == CyclotomicNumber.root(9, 3)
        with pytest.raises(PreconditionError):
            CyclotomicNumber.root(3, 1).lift(8)

    def test_conjugate(self):
        """Conjugation sends zeta to zeta^-1."""
        z = CyclotomicNumber.root(5, 1) * 3 + Fraction(1, 2)
        assert z.conjugate() == CyclotomicNumber.root(5, 4) * 3 + Fraction(1, 2)
        assert abs(z.conjugate().to_complex() - z.to_complex().conjugate()) < 1e-12

    def test_histogram_uses_negative_exponents(self):
        """A phase histogram count at k contributes zeta^-k."""
        z = CyclotomicNumber.from_histogram(3, [0, 1, 0])
        assert z == CyclotomicNumber.root(3, 2)

    def test_rational_value(self):
        """zeta_3 + zeta_3^2 is the rational -1."""
        z = CyclotomicNumber.root(3, 1) + CyclotomicNumber.root(3, 2)
        assert z.is_rational()
        assert z.rational_value() == -1
        with pytest.raises(PreconditionError):
            CyclotomicNumber.root(3, 1).rational_value()

    def test_minimal_order(self):
        z = CyclotomicNumber.root(3, 1) + CyclotomicNumber.root(3, 2)
        assert z.minimal_order().order == 1
        assert z.minimal_order() == CyclotomicNumber.rational(-1)
        root = CyclotomicNumber.root(9, 3)
        assert root.minimal_order().order == 9

    def test_principal_embedding(self):
        z = CyclotomicNumber.root(8, 1)
        assert abs(z.to_complex() - cmath.exp(2j * cmath.pi / 8)) < 1e-14

    def test_serialisation(self):
        z = CyclotomicNumber.root(9, 2) * Fraction(3, 7)
        assert CyclotomicNumber.from_dict(z.to_dict()) == z

    def test_wrong_coefficient_count(self):
        with pytest.raises(PreconditionError):
            CyclotomicNumber(3, (Fraction(1),))


class TestResidueRing:
    """Valuations, lifts and 2x2 matrices mod p^n."""

    def test_valuation(self):
        assert valuation(Fraction(12, 5), 2) == 2
        assert valuation(Fraction(5, 12), 2) == -2
        assert valuation(0, 3) == INFINITE_VALUATION

    def test_odd_part(self):
        assert odd_part(-40) == 5
        assert odd_part(0) == 0

    def test_integer_lift(self):
        """1/2 mod 9 is 5."""
        assert padic_integer_lift(Fraction(1, 2), 3, 9) == 5
        with pytest.raises(PrecisionExceededError):
            padic_integer_lift(Fraction(1, 3), 3, 9)

    def test_context_rejects_dyadic_and_composite(self):
        with pytest.raises(PreconditionError):
            PAdicContext(2, 1)
        with pytest.raises(PreconditionError):
            PAdicContext(9, 1)
        with pytest.raises(PreconditionError):
            PAdicContext(3, 0)

    def test_matrix_invariants(self):
        ctx = PAdicContext(3, 2)
        m = ResidueMat2(ctx, (2, 5, 7, 11))
        assert m.det == (2 * 11 - 5 * 7) % 9
        assert m.trace == 13 % 9
        assert m.adjugate().entries == (11 % 9, -5 % 9, -7 % 9, 2)
        assert (m * m.adjugate()).entries == (m.det, 0, 0, m.det)

    def test_entries_are_reduced(self):
        ctx = PAdicContext(5, 1)
        assert ResidueMat2(ctx, (6, -1, Fraction(1, 2), 10)).entries == (1, 4, 3, 0)

    def test_mixed_rings_rejected(self):
        a = ResidueMat2.identity(PAdicContext(3, 1))
        b = ResidueMat2.identity(PAdicContext(3, 2))
        with pytest.raises(PreconditionError):
            a + b


class TestExactArithService:
    """Fractional parts, the additive character and multiplicativity checks."""

    def setup_method(self):
        self.service = ExactArithService()
        self.ctx = PAdicContext(3, 2)

    def test_fractional_part(self):
        """{a}_p is in [0, 1) with a - {a}_p p-integral."""
        assert self.service.padic_fractional_part(Fraction(5, 9), self.ctx) == Fraction(5, 9)
        assert self.service.padic_fractional_part(Fraction(5, 3), self.ctx) == Fraction(2, 3)
        assert self.service.padic_fractional_part(Fraction(1, 6), self.ctx) == Fraction(2, 3)
        assert self.service.padic_fractional_part(7, self.ctx) == 0

    def test_fractional_part_precision(self):
        with pytest.raises(PrecisionExceededError):
            self.service.padic_fractional_part(Fraction(1, 27), self.ctx)

    def test_additive_character_sign(self):
        """psi_p(1/3) = exp(-2 pi i / 3)."""
        value = self.service.additive_character(Fraction(1, 3), self.ctx)
        assert abs(value.to_complex() - cmath.exp(-2j * cmath.pi / 3)) < 1e-14
        assert self.service.additive_character(4, self.ctx) == 1

    def test_character_sum_vanishes(self):
        assert self.service.character_sum_vanishes(self.ctx)

    def test_det_multiplicativity(self):
        assert self.service.det_multiplicativity_check(3).passed

    def test_ramified_character(self):
        """A conductor-p character is multiplicative and nontrivial."""
        chi = self.service.make_character(PAdicContext(5, 1), "ramified")
        assert chi.kind is CharacterKind.RAMIFIED
        assert self.service.multiplicativity_check(chi).passed
        assert any(chi(u) != 1 for u in range(1, 5))
        with pytest.raises(PreconditionError):
            chi(5)

    def test_trivial_power_rejected(self):
        with pytest.raises(PreconditionError):
            FiniteCharacter.ramified(PAdicContext(5, 1), 4)

    def test_numeric_unramified_needs_value(self):
        with pytest.raises(PreconditionError):
            self.service.make_character(PAdicContext(3, 1), "unramified_numeric")


class TestSContext:
    """S = {inf, 2}: S-norms, S-units and the fundamental domain."""

    def setup_method(self):
        self.sctx = SCtx()

    def test_s_norm(self):
        assert self.sctx.s_norm(12) == 3
        assert self.sctx.s_norm(Fraction(3, 8)) == 3
        assert self.sctx.s_norm(-5) == 5
        with pytest.raises(PreconditionError):
            self.sctx.s_norm(0)

    def test_fundamental_domain(self):
        assert self.sctx.in_fundamental_domain(3)
        assert not self.sctx.in_fundamental_domain(6)
        assert not self.sctx.in_fundamental_domain(-3)

    def test_unit_translate(self):
        u, x = self.sctx.unit_translate(-12)
        assert u == Fraction(-1, 4)
        assert x == 3

    def test_unique_translate(self):
        """Exactly one +-2^j x lies in the fundamental domain."""
        for x in (12, Fraction(-5, 16), 7):
            assert self.sctx.translates_in_domain(x) == 1

    def test_indicator(self):
        assert self.sctx.indicator_F((1, 4))
        assert self.sctx.indicator_F((1, Fraction(-1, 2)))
        assert not self.sctx.indicator_F((2, 4))
        assert not self.sctx.indicator_F((1, 3))


class TestHeckeFunctionModel:
    """Values of Phi on integer matrices."""

    def test_values(self):
        phi = HeckeFunction(2)
        a, b, c, d = (np.array(v) for v in ([2, 4, 1, 2], [0, 0, 0, 0], [0, 0, 0, 0], [2, 1, 1, 4]))
        # 2I is scalar on the shell, diag(4, 1) is on the shell, I and diag(2, 4) are off it
        assert phi(a, b, c, d).tolist() == [-6, 1, 0, 0]

    def test_rejects_non_prime_and_other_valuations(self):
        with pytest.raises(PreconditionError):
            HeckeFunction(4)
        with pytest.raises(PreconditionError):
            HeckeFunction(2, 3)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
