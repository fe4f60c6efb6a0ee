"""
Tests for the p-adic stationary phase integrals over gl2(Z_p).
"""
import os
import sys
from fractions import Fraction

import pytest

# Add project root to path
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from models.cyclotomic import CyclotomicNumber
from models.padic import PAdicContext, ResidueMat2
from models.phase_data import PhaseData
from services.error_handler import BudgetExceededError, PreconditionError
from services.padic_oscillatory_service import PadicOscillatoryService


class TestPhaseData:
    """Validation of the phase inputs."""

    def test_x_must_be_a_unit(self):
        ctx = PAdicContext(3, 1)
        with pytest.raises(PreconditionError):
            PhaseData(ctx, ResidueMat2.zero(ctx), 3, 1)

    def test_scale_within_precision(self):
        ctx = PAdicContext(3, 1)
        with pytest.raises(PreconditionError):
            PhaseData(ctx, ResidueMat2.zero(ctx), 1, 2)
        with pytest.raises(PreconditionError):
            PhaseData(ctx, ResidueMat2.zero(ctx), 1, 0)

    def test_with_scale(self):
        ctx = PAdicContext(5, 1)
        ph = PhaseData(ctx, ResidueMat2(ctx, (1, 2, 3, 4)), 2, 1)
        scaled = ph.with_scale(3)
        assert scaled.x == 1
        assert scaled.gamma0.entries == (3, 1, 4, 2)


class TestStationaryPhase:
    """Brute force against the closed form."""

    def setup_method(self):
        self.service = PadicOscillatoryService(budget=1e8)

    def test_oracle_t1(self):
        result = self.service.oracle_equivalence(3, 1, cases=10, seed=0)
        assert result.passed, result.details["mismatches"]
        assert result.details["cases"] == 10

    def test_oracle_t2(self):
        assert self.service.oracle_equivalence(3, 2, cases=3, seed=1).passed

    def test_oracle_p5(self):
        assert self.service.oracle_equivalence(5, 1, cases=5, seed=2).passed

    def test_oracle_with_higher_precision(self):
        """A context of precision n > t only changes how g0 is reduced."""
        assert self.service.oracle_equivalence(3, 1, cases=4, seed=3, n=2).passed

    def test_zero_linear_term(self):
        """g0 = 0 gives the bare volume factor p^-2t."""
        ctx = PAdicContext(3, 1)
        ph = PhaseData(ctx, ResidueMat2.zero(ctx), 1, 1)
        assert self.service.closed_form_integral(ph) == Fraction(1, 9)
        assert self.service.brute_force_integral(ph) == Fraction(1, 9)

    def test_stationary_point(self):
        """The phase gradient vanishes at the critical point."""
        ctx = PAdicContext(5, 2)
        ph = PhaseData(ctx, ResidueMat2(ctx, (1, 7, 3, 11)), 2, 2)
        point = self.service.stationary_point(ph)
        assert all(g % 25 == 0 for g in self.service.phase_gradient(ph, point))

    def test_budget(self):
        ctx = PAdicContext(3, 2)
        ph = PhaseData(ctx, ResidueMat2.identity(ctx), 1, 2)
        with pytest.raises(BudgetExceededError):
            PadicOscillatoryService(budget=100).brute_force_integral(ph)


class TestLocalIdentities:
    """Gauss factor, singular counts and the flip identity."""

    def setup_method(self):
        self.service = PadicOscillatoryService()

    @pytest.mark.parametrize("p", [3, 5])
    def test_gauss_factor(self, p):
        assert self.service.gauss_factor_check(p).passed

    def test_gauss_factor_value(self):
        ctx = PAdicContext(7, 1)
        ph = PhaseData(ctx, ResidueMat2.identity(ctx), 3, 1)
        assert self.service.gauss_factor(ph) == CyclotomicNumber.rational(1)
        assert self.service.gauss_factor(ph, b=5) == CyclotomicNumber.rational(1)
        assert self.service.gauss_factor(ph).order == 1

    def test_gauss_factor_at_higher_precision(self):
        """Only x mod p enters the Hessian form."""
        ctx = PAdicContext(5, 2)
        ph = PhaseData(ctx, ResidueMat2.zero(ctx), 7, 2)
        assert self.service.gauss_factor(ph, b=2) == CyclotomicNumber.rational(1)

    def test_gauss_factor_needs_unit(self):
        ctx = PAdicContext(3, 1)
        ph = PhaseData(ctx, ResidueMat2.zero(ctx), 1, 1)
        with pytest.raises(PreconditionError):
            self.service.gauss_factor(ph, b=3)

    def test_singular_count(self):
        """q^4 - (q^2 - 1)(q^2 - q) singular matrices over F_q."""
        assert self.service.singular_count(3) == 33
        assert self.service.singular_count(2) == 10
        assert self.service.singular_count_check(5).passed

    def test_flip_identity(self):
        assert self.service.flip_identity_check(3).passed

    def test_unit_scaling(self):
        ctx = PAdicContext(3, 2)
        ph = PhaseData(ctx, ResidueMat2(ctx, (4, 1, 0, 7)), 2, 2)
        assert self.service.unit_scaling_check(ph, 5).passed


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
