"""
Tests for the dyadic Hecke function, Satake eigenvalues and the vanishing of Sigma_0.
"""
import os
import sys
from fractions import Fraction

import pytest

# Add project root to path
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from models.geometric import GlobalTestFunction, HeckeFunction, SatakePair
from services.error_handler import BudgetExceededError
from services.hecke_service import HeckeService


@pytest.fixture
def service():
    return HeckeService()


class TestHeckeFunction:
    """Assumption (A) for Phi at p = 2 and p = 3."""

    def test_masses_p2(self, service):
        masses = service.masses(HeckeFunction(2))
        assert masses["mass_pos"] == 7
        assert masses["mass_neg"] == 7
        assert masses["total"] == 0
        assert isinstance(masses["mass_pos"], Fraction)

    def test_masses_p3(self, service):
        masses = service.masses(HeckeFunction(3))
        assert masses["mass_pos"] == 13
        assert masses["total"] == 0

    def test_coset_representatives(self, service):
        reps = service.coset_representatives(2)
        assert len(reps) == 7
        assert (4, 3, 0, 1) in reps
        assert (1, 0, 0, 4) in reps

    def test_assumption_A(self, service):
        checks = service.assumption_A_check(HeckeFunction(2))
        assert len(checks) == 4
        for check in checks:
            assert check.passed, (check.name, check.details)

    def test_coset_decomposition_p3(self, service):
        assert service.coset_decomposition_check(HeckeFunction(3)).passed

    def test_budget(self):
        with pytest.raises(BudgetExceededError):
            HeckeService(budget=1000).masses(HeckeFunction(2))


class TestSatakeEigenvalues:
    """pi(Phi) on unramified representations."""

    def test_trivial_parameters(self):
        """alpha = beta = 1: 3q - (q^2 + q + 1) = -4 at q = 3."""
        assert HeckeService.hecke_eigenvalue(SatakePair(1, 1), 3) == pytest.approx(-4)

    def test_opposite_parameters(self):
        """alpha = i, beta = -i gives -(q + 1)^2."""
        assert HeckeService.hecke_eigenvalue(SatakePair(1j, -1j), 3) == pytest.approx(-16)

    def test_vanishes_at_ratio_q(self):
        value = HeckeService.hecke_eigenvalue(SatakePair.from_ratio(3.0), 3)
        assert abs(value) < 1e-12

    def test_from_ratio(self):
        sp = SatakePair.from_ratio(2.0, phase=0.5)
        assert sp.alpha / sp.beta == pytest.approx(2.0)
        assert abs(sp.product) == pytest.approx(1.0)
        assert sp.is_generic_unitary(9.0)
        assert not sp.is_generic_unitary(3.0, delta=0.4)

    def test_nonvanishing_scan(self, service):
        result = service.eigenvalue_nonvanishing_scan(3, n_radius=40, n_angle=40)
        assert result.passed
        assert result.details["grid_points"] == 1600

    def test_boundary_ray(self, service):
        witness = service.boundary_ray_witness(3, steps=6)
        values = witness["abs_eigenvalue"]
        assert len(values) == 6
        assert all(later < earlier for earlier, later in zip(values, values[1:]))
        assert witness["ratio"][-1] < 3

    def test_tempered_sweep(self, service):
        """min |q(2 cos theta + 1) - (q^2 + q + 1)| = (q - 1)^2."""
        assert service.tempered_sweep(3) == pytest.approx(4.0)
        assert service.tempered_sweep(5) == pytest.approx(16.0)


class TestSigmaZero:
    def test_vanishing(self, service):
        result = service.sigma0_vanishing_check(GlobalTestFunction.default(), b_exponents=(0, 2),
                                                t_exponents=(0, 1, 2, 3))
        assert result.passed, [r for r in result.details["rows"] if r["value"]]
        # plain integral and 2 exponents x 2 signs x 4 valuations
        assert len(result.details["rows"]) == 17


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
