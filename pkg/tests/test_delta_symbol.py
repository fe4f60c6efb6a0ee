"""
Tests for the delta-symbol expansion over Q and Z[1/2].
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

from models.delta_config import DeltaConfig, PlaceSet
from services.delta_symbol_service import DeltaSymbolService
from services.error_handler import PreconditionError, QTooSmallError


class TestPlaceSet:
    def test_from_code(self):
        assert PlaceSet.from_code("inf, 2") is PlaceSet.INF_2
        assert PlaceSet.from_code("inf") is PlaceSet.INF
        assert PlaceSet.INF_2.contains_two
        with pytest.raises(PreconditionError):
            PlaceSet.from_code("inf,3")


class TestDeltaConfig:
    def test_normalisation(self):
        """The weight integrates to 1 / vol(Z_2^x) when 2 is in S."""
        cfg = DeltaConfig.create(30, PlaceSet.INF_2)
        assert cfg.W.integral() == pytest.approx(2.0, rel=1e-10)
        assert DeltaConfig.create(30).W.integral() == pytest.approx(1.0, rel=1e-10)

    def test_window(self):
        """d/Q in (1, 4) for the bump centred at 2.5 with radius 1.5."""
        assert DeltaConfig.create(10).window() == (11, 39)

    def test_rejects_bad_modulus(self):
        with pytest.raises(PreconditionError):
            DeltaConfig.create(-1)


class TestDeltaExpansion:
    """Exactness, c_Q and the telescoping structure."""

    def setup_method(self):
        self.service = DeltaSymbolService()
        self.cfg = DeltaConfig.create(30)
        self.cfg_s = DeltaConfig.create(30, PlaceSet.INF_2)

    def test_value_at_zero(self):
        assert self.service.delta_expansion(self.cfg, 0) == pytest.approx(1.0, abs=1e-12)
        assert self.service.delta_expansion(self.cfg_s, 0) == pytest.approx(1.0, abs=1e-12)

    def test_exactness(self):
        for cfg in (self.cfg, self.cfg_s):
            result = self.service.exactness_check(cfg, 200)
            assert result.passed, result.details

    def test_half_integer(self):
        """Over Z[1/2] the expansion also vanishes at non-integral S-integers."""
        assert abs(self.service.delta_expansion(self.cfg_s, Fraction(3, 2))) <= 1e-12

    def test_non_s_integers_rejected(self):
        with pytest.raises(PreconditionError):
            self.service.delta_expansion(self.cfg, Fraction(1, 2))
        with pytest.raises(PreconditionError):
            self.service.delta_expansion(self.cfg_s, Fraction(1, 3))

    def test_odd_moduli_over_z_half(self):
        d, _ = self.service.moduli(self.cfg_s)
        assert all(x % 2 == 1 for x in d.tolist())

    def test_c_q_close_to_one(self):
        assert self.service.c_q(self.cfg) == pytest.approx(1.0, abs=1e-4)

    def test_c_q_convergence(self):
        result = self.service.c_q_convergence_check(self.cfg, [40, 80])
        assert result.passed, result.details["rows"]

    def test_c_q_sequence(self):
        rows = self.service.c_q_sequence(self.cfg, base=20.0, steps=3)
        assert [row["Q"] for row in rows] == [40.0, 80.0, 160.0]

    def test_telescoping_witness(self):
        for m in (12, 360, -210):
            assert self.service.telescoping_witness(self.cfg, m).passed
        assert self.service.telescoping_witness(self.cfg_s, 360).passed

    def test_q_too_small(self):
        with pytest.raises(QTooSmallError):
            self.service.c_q(DeltaConfig.create(0.2))

    def test_h_needs_nonzero_x(self):
        with pytest.raises(PreconditionError):
            self.service.h_eval(self.cfg, 0.0, 1.0)
        with pytest.raises(PreconditionError):
            self.service.h_eval(self.cfg, [1.0, 0.0], [1.0, 1.0])

    def test_expansion_is_sum_of_h(self):
        """For m > 0 over Z the expansion is (c_Q/Q) sum_{d | m} h(d/Q, m/Q^2)."""
        Q = self.cfg.Q
        for m in (360, 2520):
            divisors = np.array([d for d in range(1, m + 1) if m % d == 0], dtype=float)
            terms = self.service.h_eval(self.cfg, divisors / Q, m / Q ** 2)
            assert np.any(np.abs(terms) > 0.1)
            total = self.service.c_q(self.cfg) * math.fsum(terms) / Q
            assert total == pytest.approx(self.service.delta_expansion(self.cfg, m), abs=1e-12)
        assert self.service.h_eval(self.cfg, 2.0, 0.5) == pytest.approx(self.cfg.W(2.0) - self.cfg.W(0.25))

    def test_verify_delta(self):
        checks = self.service.verify_delta([30], 100, PlaceSet.INF_2, q_convergence=[40])
        names = [c.name for c in checks]
        assert "delta_half_integer" in names
        assert all(c.passed for c in checks)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
