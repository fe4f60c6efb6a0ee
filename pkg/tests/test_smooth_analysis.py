"""
Tests for smooth weights and the archimedean integrals.
"""
import os
import sys

import numpy as np
import pytest

# Add project root to path
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from models.geometric import GlobalTestFunction
from models.quadrature import OscillatoryVariant, QuadratureMethod, QuadratureSpec
from models.smooth_weight import MatrixBump, SmoothWeight, WeightShape
from services.error_handler import PreconditionError
from services.smooth_analysis_service import SmoothAnalysisService, trace_coefficients


class TestSmoothWeight:
    """Bump and plateau profiles."""

    def test_bump_support(self):
        w = SmoothWeight.bump(2.0, 1.0)
        assert w(1.0) == 0.0
        assert w(3.0) == 0.0
        assert w(2.0) == pytest.approx(np.exp(-1.0))

    def test_plateau_is_one_inside(self):
        w = SmoothWeight.plateau(0.25, 0.5, 3.5, 5.0)
        assert np.all(w(np.linspace(0.5, 3.5, 11)) == 1.0)
        assert w(0.25) == 0.0
        assert w.equals_one_on(1.0, 3.0)
        assert not w.equals_one_on(0.3, 3.0)

    def test_plateau_bounds_validated(self):
        with pytest.raises(PreconditionError):
            SmoothWeight.plateau(1.0, 0.5, 3.0, 4.0)

    def test_normalized(self):
        w = SmoothWeight.bump(2.5, 1.5).normalized(1.0)
        assert w.integral() == pytest.approx(1.0, rel=1e-10)

    def test_shape_codes(self):
        assert WeightShape.from_code("plateau") is WeightShape.PLATEAU
        with pytest.raises(ValueError):
            WeightShape.from_code("triangle")

    def test_matrix_bump_rejects_singular_boxes(self):
        with pytest.raises(PreconditionError):
            MatrixBump.from_boxes([(-0.5, 0.5), (1.0, 2.0)], [(-0.2, 0.2), (-0.2, 0.2)])

    def test_trace_coefficients_order(self):
        """tr(gamma T) pairs gamma_12 with T_21 and gamma_21 with T_12."""
        coeffs = trace_coefficients([[1, 2, 3, 4], [5, 6, 7, 8]])
        assert coeffs.tolist() == [1, 3, 2, 4, 5, 7, 6, 8]


class TestOneDimensional:
    """Fourier and Mellin transforms and one-dimensional Poisson summation."""

    def setup_method(self):
        self.service = SmoothAnalysisService()
        self.bump = SmoothWeight.bump(2.5, 1.5)

    def test_fourier_at_zero_is_integral(self):
        assert self.service.fourier_1d(self.bump, 0.0).value.real == pytest.approx(self.bump.integral(), rel=1e-10)

    def test_fourier_symmetry(self):
        plus = self.service.fourier_1d(self.bump, 0.7).value
        minus = self.service.fourier_1d(self.bump, -0.7).value
        assert abs(minus - plus.conjugate()) < 1e-14

    def test_mellin_at_one_and_two(self):
        """int V dx/x * x^s at s = 1 is the integral; at s = 2 the centre of mass times it."""
        V = SmoothWeight.bump(2.0, 1.5)
        total = V.integral()
        assert self.service.mellin_transform(V, 1.0).value.real == pytest.approx(total, rel=1e-9)
        assert self.service.mellin_transform(V, 2.0).value.real == pytest.approx(2.0 * total, rel=1e-9)

    def test_mellin_needs_positive_support(self):
        with pytest.raises(PreconditionError):
            self.service.mellin_transform(SmoothWeight.bump(0.0, 1.0), 1.0)

    def test_poisson(self):
        result = self.service.poisson_1d_check(self.bump, 20.0, 3)
        assert result.passed, result.details

    def test_poisson_needs_positive_q(self):
        with pytest.raises(PreconditionError):
            self.service.poisson_1d_check(self.bump, 0.0, 3)


class TestMatrixIntegrals:
    """Oscillatory integrals over gl2(R)^2."""

    def setup_method(self):
        self.service = SmoothAnalysisService(QuadratureSpec(log2_points=10, n_estimates=4))
        self.f = GlobalTestFunction.default().arch
        self.h = SmoothWeight.bump(2.5, 1.5)
        self.gamma = [[1.0, 0.5, -0.5, 2.0], [0.0, 1.0, 0.0, -1.0]]

    def test_conjugation(self):
        result = self.service.conjugation_check(self.f, OscillatoryVariant.W_OF_T, (1.0, 1.0),
                                                self.gamma, 2.0, self.h)
        assert result.passed, result.details

    def test_linearity(self):
        other = MatrixBump.from_boxes([(1.0, 2.0), (1.0, 1.5)], [(-0.2, 0.2), (-0.1, 0.1)])
        assert self.service.linearity_check(self.f, other, OscillatoryVariant.W_OF_T, (1.0, 1.0),
                                            self.gamma, 2.0, self.h).passed

    def test_vanishing_beyond_support(self):
        """W(P(b,T)/t) is identically 0 once |t| exceeds the support radius."""
        t = 2.0 * self.service.large_t_threshold(self.f, (1.0, 1.0), self.h)
        result = self.service.arch_osc_integral(self.f, OscillatoryVariant.W_OF_P_OVER_T, (1.0, 1.0),
                                                self.gamma, t, self.h)
        assert result.value == 0

    def test_b_range(self):
        with pytest.raises(PreconditionError):
            self.service.arch_osc_integral(self.f, OscillatoryVariant.W_OF_T, (3.0, 1.0),
                                           self.gamma, 1.0, self.h)

    def test_zero_t_rejected(self):
        with pytest.raises(PreconditionError):
            self.service.arch_osc_integral(self.f, OscillatoryVariant.W_OF_T, (1.0, 1.0),
                                           self.gamma, 0.0, self.h)

    def test_replicates_are_reproducible(self):
        lo, hi = self.f.box
        first = self.service.sobol_replicates(lo, hi)
        second = self.service.sobol_replicates(lo, hi)
        assert len(first) == 4
        assert all(np.array_equal(a, b) for a, b in zip(first, second))

    def test_box_integral_of_constant(self):
        lo, hi = np.zeros(3), np.array([1.0, 2.0, 0.5])
        result = self.service.box_integral(lambda x: np.ones(len(x)), lo, hi)
        assert result.value == pytest.approx(1.0)
        assert result.method is QuadratureMethod.LOW_DISCREPANCY

    def test_replicate_statistics(self):
        value, error = SmoothAnalysisService.replicate_statistics([1.0, 1.0, 1.0])
        assert value == 1.0
        assert error == 0.0
        assert SmoothAnalysisService.replicate_statistics([2.0])[1] == float("inf")

    def test_fit_decay_exponent(self):
        xs = [1.0, 2.0, 4.0, 8.0]
        fit = SmoothAnalysisService.fit_decay_exponent(xs, [x ** -3 for x in xs])
        assert fit["slope"] == pytest.approx(-3.0)
        assert fit["excluded"] == []

    def test_fourier_cutoff(self):
        wide = self.service.fourier_cutoff(SmoothWeight.bump(0.0, 1.0))
        narrow = self.service.fourier_cutoff(SmoothWeight.bump(0.0, 0.25))
        assert 1.0 < wide < narrow < 4096.0
        assert self.service.fourier_cutoff(SmoothWeight.bump(0.0, 1.0)) == wide


class TestBumpIntegrals:
    """The W(P/t) variant of a matrix bump by Fourier inversion of W."""

    def setup_method(self):
        self.service = SmoothAnalysisService()
        self.W = SmoothWeight.bump(2.5, 1.5)

    @staticmethod
    def _tensor_block(g, h, lam, alpha, beta, n=800):
        x, wx = np.polynomial.legendre.leggauss(n)
        y, wy = x.copy(), wx.copy()
        x = g.lo + 0.5 * (x + 1) * (g.hi - g.lo)
        y = h.lo + 0.5 * (y + 1) * (h.hi - h.lo)
        u = 0.5 * (g.hi - g.lo) * wx * g(x) * np.exp(2j * np.pi * alpha * x)
        v = 0.5 * (h.hi - h.lo) * wy * h(y) * np.exp(2j * np.pi * beta * y)
        return complex(u @ np.exp(2j * np.pi * lam * np.outer(x, y)) @ v)

    @pytest.mark.parametrize("lam", [10.0, -12.0])
    def test_block_by_spectrum(self, lam):
        """At |lam| radius >= 4 the block goes through the spectrum of g; it matches the tensor rule."""
        g, h = SmoothWeight.bump(2.0, 0.5), SmoothWeight.bump(-2.0, 0.5)
        value = self.service.block_integral(g, h, lam, 0.3, -0.7)
        reference = self._tensor_block(g, h, lam, 0.3, -0.7)
        assert abs(value - reference) <= 1e-7 * g.integral() * h.integral()

    def test_block_at_small_lambda(self):
        g, h = SmoothWeight.bump(2.0, 0.5), SmoothWeight.bump(0.0, 0.5)
        value = self.service.block_integral(g, h, 0.5, 0.3, -0.7)
        assert value == pytest.approx(self._tensor_block(g, h, 0.5, 0.3, -0.7), abs=1e-10)

    def test_block_without_oscillation(self):
        g, h = SmoothWeight.bump(2.0, 0.5), SmoothWeight.bump(0.0, 0.5)
        assert self.service.block_integral(g, h, 0.0, 0.0, 0.0) == pytest.approx(g.integral() * h.integral())

    @pytest.mark.slow
    def test_matches_low_discrepancy(self):
        f = GlobalTestFunction.default().arch
        gamma = [[1.0, 0.5, -0.5, 2.0], [0.0, 1.0, 0.0, -1.0]]
        exact = self.service.arch_osc_integral(f, OscillatoryVariant.W_OF_P_OVER_T, (1.0, 1.0), gamma, 0.5, self.W)
        qmc = self.service.arch_osc_integral(
            f, OscillatoryVariant.W_OF_P_OVER_T, (1.0, 1.0), gamma, 0.5, self.W,
            spec=QuadratureSpec(QuadratureMethod.LOW_DISCREPANCY, log2_points=15, n_estimates=8))
        assert exact.method is QuadratureMethod.ADAPTIVE_1D
        assert abs(exact.value) > 0
        assert abs(exact.value - qmc.value) <= 6 * qmc.error + 1e-3 * abs(qmc.value)

    @pytest.mark.slow
    def test_decay_report(self):
        """Around the stationary set T1 = 2I, T2 = -2I of the identity ray the small-t law is t^4."""
        f = MatrixBump.from_boxes([(1.5, 2.5), (-2.5, -1.5)], [(-0.5, 0.5), (-0.5, 0.5)])
        gamma0 = [[1.0, 0.0, 0.0, 1.0], [1.0, 0.0, 0.0, 1.0]]
        t_grid = [0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625]
        checks, tables = self.service.decay_report(f, (1.0, 1.0), gamma0, t_grid, [2.0, 4.0, 8.0, 16.0, 32.0],
                                                   self.W)
        by_name = {check.name: check for check in checks}
        small = by_name["small_t_decay"]
        assert small.details["fit"]["slope"] >= 3.5, small.details
        assert small.passed
        assert by_name["large_gamma_decay"].details["exponent"] >= 6
        assert by_name["large_gamma_decay"].passed
        assert by_name["large_t_vanishing"].passed
        assert [row["t"] for row in tables["small_t"]] == t_grid
        assert all(row["abs_value"] > 0 for row in tables["small_t"])

    def test_decay_report_needs_gamma(self):
        f = GlobalTestFunction.default().arch
        with pytest.raises(PreconditionError):
            self.service.decay_report(f, (1.0, 1.0), [[0, 0, 0, 0], [0, 0, 0, 0]], [0.5], [2.0], self.W)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
