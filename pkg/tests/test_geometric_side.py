"""
Tests for Sigma(X), the S-adic integral I(b, gamma) and the main-theorem sum.
"""
import math
import os
import sys
from fractions import Fraction

import numpy as np
import pytest

# Add project root to path
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from models.geometric import GlobalTestFunction, SigmaParams, TruncationSpec
from models.quadrature import QuadratureSpec
from models.smooth_weight import SmoothWeight
from services.error_handler import PreconditionError
from services.geometric_side_service import GeometricSideService


@pytest.fixture
def service():
    return GeometricSideService()


@pytest.fixture
def gtf():
    return GlobalTestFunction.default()


@pytest.fixture
def small_truncation():
    return TruncationSpec(gamma_radius=1, e_max=3, t_nodes=8,
                          quadrature=QuadratureSpec(log2_points=8, n_estimates=4))


class TestSigmaParams:
    def test_defaults_are_valid(self):
        params = SigmaParams.default(8)
        assert params.Q == pytest.approx(math.sqrt(8))
        assert params.V2.equals_one_on(params.V1.lo, params.V1.hi)

    def test_V2_must_cover_V1(self):
        default = SigmaParams.default()
        with pytest.raises(PreconditionError):
            SigmaParams(8.0, SmoothWeight.bump(2.0, 1.5), SmoothWeight.plateau(0.25, 1.0, 3.5, 5.0),
                        default.V3)

    def test_serialisation(self):
        params = SigmaParams.default(12)
        assert SigmaParams.from_dict(params.to_dict()) == params


class TestSigma:
    """Sigma(X) by direct enumeration and with the delta-symbol inserted."""

    def test_direct_value_at_small_X(self, service, gtf):
        """
        At X = 8 the lattice has gamma1 = diag(a, d), a, d in {5, 6, 7}, and gamma2 = diag(3 or 4, 3 or 4).
        Only gamma1 = 6 I (Phi = -6, scalar) and gamma2 = 3 I (odd det) survive, with b2 = 4.
        """
        params = SigmaParams.default(8)
        arch = gtf.arch(np.array([6, 0, 0, 6, 3, 0, 0, 3]) / math.sqrt(8))
        expected = float(arch) * -6 * params.V1(9 / 8) * params.V2(9 / 8) * params.V3(1.0) / 72
        result = service.direct_sigma(params, gtf)
        assert result.value == pytest.approx(expected, rel=1e-12)
        assert result.details["b2_values"] == ["4"]
        assert result.details["terms"] == 1

    def test_delta_inserted_matches_direct(self, service, gtf):
        params = SigmaParams.default(8)
        direct = service.direct_sigma(params, gtf)
        inserted = service.delta_inserted_sigma(params, gtf)
        assert inserted.value == pytest.approx(direct.value, abs=1e-9 * (1 + abs(direct.value)))

    def test_empty_support(self, service, gtf, small_truncation):
        """V1 away from the S-norms of the lattice kills every term."""
        default = SigmaParams.default()
        params = SigmaParams(8.0, SmoothWeight.bump(6.5, 1.5), SmoothWeight.plateau(3.0, 4.5, 8.5, 10.0),
                             default.V3)
        assert service.direct_sigma(params, gtf).value == 0
        assert service.delta_inserted_sigma(params, gtf).value == 0
        assert service.poisson_side_sigma(params, gtf, small_truncation).value == 0

    def test_linear_in_test_function(self, service, gtf):
        params = SigmaParams.default(8)
        single = service.direct_sigma(params, gtf).value
        assert service.direct_sigma(params, gtf.scaled(2.0)).value == pytest.approx(2 * single)

    def test_zero_radius(self, service, gtf):
        params = SigmaParams.default(8)
        truncation = TruncationSpec(gamma_radius=0)
        for result in (service.poisson_side_sigma(params, gtf, truncation),
                       service.main_theorem_rhs(params, gtf, truncation)):
            assert result.value == 0
            assert result.error_budget == math.inf
            assert result.flagged
            assert result.details["converged"] is False

    @pytest.mark.slow
    def test_compare_sigma(self, service, gtf, small_truncation):
        """Radius 1 is far short of the dual cutoff: the Poisson check fails and so does the summary."""
        checks, summary = service.compare_sigma(SigmaParams.default(8), gtf, small_truncation)
        assert all(check.asserted for check in checks)
        assert checks[0].passed, checks[0].details
        poisson = checks[1]
        assert not poisson.passed
        assert poisson.details["converged"] is False
        assert poisson.details["radius_needed"] > poisson.details["gamma_radius"]
        assert summary["error_budget"] == math.inf
        assert summary["truncation_report"]["converged"] is False
        modulus_checks = [check for check in checks if check.name.startswith("poisson_modulus_")]
        assert len(modulus_checks) == 2
        assert all(check.passed for check in modulus_checks), [c.details for c in modulus_checks]
        assert summary["pass"] is False
        assert "c_Q_ablation" in summary

    @pytest.mark.slow
    def test_x_stability_needs_convergence(self, service, gtf, small_truncation):
        check = service.x_stability(SigmaParams.default(8), gtf, small_truncation)
        assert check.asserted
        assert check.details["converged"] == [False, False]
        assert check.details["allowed"] == math.inf
        assert not check.passed

    @pytest.mark.slow
    def test_main_theorem_unconverged_budget(self, service, gtf):
        truncation = TruncationSpec(gamma_radius=1, c_max=1, e_max=2, t_nodes=4,
                                    quadrature=QuadratureSpec(log2_points=6, n_estimates=2))
        result = service.main_theorem_rhs(SigmaParams.default(8), gtf, truncation)
        assert result.details["terms"] > 0
        assert result.details["radius_needed"] > 1
        assert result.details["converged"] is False
        assert result.error_budget == math.inf
        assert result.flagged


class TestDualConvergence:
    """Where the dual sums start to decay, and the single-modulus identity behind them."""

    def test_cutoff_is_finite(self, service, gtf):
        cutoff = service.dual_frequency_cutoff(gtf)
        assert 1.0 < cutoff < 4096.0

    def test_radius_doubles_with_X_halving_the_spacing(self, service, gtf):
        """The dual spacing sqrt(X)/N halves when N doubles, so the needed gamma-radius doubles."""
        cutoff = service.dual_frequency_cutoff(gtf)
        scale = math.sqrt(50.0) / (8 * 9)
        needed = service.dual_radius_needed(gtf, scale)
        doubled = service.dual_radius_needed(gtf, scale / 2)
        assert needed == math.ceil(cutoff / scale)
        assert doubled == math.ceil(2 * cutoff / scale)
        assert 2 * needed - 1 <= doubled <= 2 * needed

    def test_default_radius_falls_short(self, service, gtf):
        """The default truncation cannot converge at X = 50: the largest modulus is 27."""
        assert service.dual_radius_needed(gtf, math.sqrt(50.0) / (8 * 27)) > TruncationSpec().gamma_radius

    def test_modulus_identity_small(self, service, gtf):
        result = service.poisson_modulus_check(gtf, 4, 3, 8.0)
        assert result.passed, result.details
        assert result.details["allowed"] > 0
        assert abs(result.details["dual_imaginary"]) <= result.details["allowed"]

    @pytest.mark.slow
    @pytest.mark.parametrize("X, d", [(50.0, 9), (50.0, 11), (100.0, 11)])
    def test_modulus_identity(self, service, gtf, X, d):
        result = service.poisson_modulus_check(gtf, 4, d, X)
        assert result.passed, result.details
        assert result.details["modulus"] == 8 * d
        assert result.details["gap"] <= result.details["allowed"]


class TestDualTables:
    def test_odd_dual_closed_form(self, service):
        result = service.odd_dual_check(3, 1, 4)
        assert result.passed, result.details

    def test_b2_forced(self, service, gtf):
        """Both determinants are positive on the support box, so b2 = +4."""
        assert service._b2_values(gtf) == [4]


class TestIIntegral:
    """I(b, gamma)."""

    def test_gamma_zero_rejected(self, service, gtf):
        with pytest.raises(PreconditionError):
            service.I_integral((1, 4), ((0, 0, 0, 0), (0, 0, 0, 0)), gtf, SigmaParams.default(8))

    @pytest.mark.parametrize("b", [(-1, 4), (1, 3), (1, 2)])
    def test_vanishing_b(self, service, gtf, b):
        """1_F(b) = 0 for the first two, and v(b2) != 2 for the last."""
        result = service.I_integral(b, ((1, 0, 0, 1), (1, 0, 0, 1)), gtf, SigmaParams.default(8))
        assert result.value == 0
        assert "reason" in result.details

    def test_conjugation(self, service, gtf):
        """I(b, -gamma) is the complex conjugate of I(b, gamma)."""
        truncation = TruncationSpec(e_max=2, t_nodes=8, quadrature=QuadratureSpec(log2_points=8, n_estimates=4))
        half = Fraction(1, 2)
        gamma = ((half, 0, 0, half), (1, 0, 0, 1))
        minus = tuple(tuple(-x for x in g) for g in gamma)
        params = SigmaParams.default(8)
        plus_value = service.I_value((1, 4), gamma, gtf, params, truncation)
        minus_value = service.I_value((1, 4), minus, gtf, params, truncation)
        assert abs(minus_value - plus_value.conjugate()) <= 1e-9 * (1 + abs(plus_value))

    def test_zeta_S(self, service):
        """zeta(2) (1 - 1/4) = pi^2 / 8."""
        assert service.zeta_S_2() == pytest.approx(math.pi ** 2 / 8)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
