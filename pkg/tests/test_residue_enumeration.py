"""
Tests for residue-matrix enumeration and the block map-reduce helpers.
"""
import os
import sys

import numpy as np
import pytest

# Add project root to path
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from services.error_handler import BudgetExceededError
from services.residue_enumeration import (
    circular_convolve, det_fibered_fourier, det_histogram, matrix_grid, naive_joint_table,
    phase_histogram_block, shell_phase_table, trace_phase_histogram, unit_twisted_tables,
)
from utils.parallel import map_blocks, map_reduce, split_range


class TestHistograms:
    """Exact det and trace histograms over M2(Z/N)."""

    def test_matrix_grid(self):
        a, b, c, d = matrix_grid(3)
        assert len(a) == 81
        assert len(set(zip(a.tolist(), b.tolist(), c.tolist(), d.tolist()))) == 81

    def test_det_histogram(self):
        hist = det_histogram(3)
        assert hist.sum() == 81
        assert hist[0] == 33
        assert hist[1] == hist[2] == 24

    def test_trace_histogram_of_zero(self):
        assert trace_phase_histogram(3, (0, 0, 0, 0)).tolist() == [81, 0, 0]

    def test_trace_histogram_is_uniform(self):
        assert trace_phase_histogram(3, (1, 0, 0, 0)).tolist() == [27, 27, 27]

    def test_phase_block_with_zero_linear_term(self):
        """With x = 1 and gamma = 0 the phase is det T."""
        hist = phase_histogram_block((3, 1, 1, (0, 0, 0, 0), range(3)))
        assert hist.tolist() == det_histogram(3).tolist()

    def test_det_fibered_fourier(self):
        table = det_fibered_fourier(3, np.array([[0, 0, 0, 0], [1, 0, 0, 0]]))
        assert table.shape == (2, 3)
        assert np.allclose(table[0], det_histogram(3))
        assert abs(table[1].sum()) < 1e-9

    def test_weighted_det_histogram(self):
        units = det_histogram(3, weight=lambda a, b, c, d: ((a * d - b * c) % 3 != 0).astype(float))
        assert units.tolist() == [0, 24, 24]

    def test_budget(self):
        with pytest.raises(BudgetExceededError):
            det_fibered_fourier(10, np.zeros(4), budget=100)


class TestShellTables:
    def test_matches_joint_enumeration(self):
        gamma = ((1, 2, 0, 1), (0, 1, 1, 0))
        joint, phase_exp, depth = shell_phase_table(3, (1, 2), gamma, 0, e=1)
        assert (phase_exp, depth) == (1, 1)
        assert joint.tolist() == naive_joint_table(3, (1, 2), gamma, 1).tolist()

    def test_no_condition_at_e_zero(self):
        joint, phase_exp, depth = shell_phase_table(3, (1, 1), ((0, 0, 0, 0), (0, 0, 0, 0)), 0)
        assert joint.tolist() == [1]
        assert phase_exp == 0
        assert depth == 0

    def test_budget(self):
        with pytest.raises(BudgetExceededError):
            shell_phase_table(3, (1, 1), ((1, 0, 0, 1), (1, 0, 0, 1)), 0, e=3, budget=100)

    def test_circular_convolve(self):
        assert circular_convolve(np.array([1, 2, 3]), np.array([1, 0, 0])).tolist() == [1, 2, 3]
        assert circular_convolve(np.array([0, 0, 1]), np.array([0, 1, 0])).tolist() == [1, 0, 0]

    def test_unit_twisted_tables(self):
        grouped, n_units = unit_twisted_tables(np.array([5, 1, 2]), 3, 1)
        assert n_units == 2
        assert grouped[None].tolist() == [10, 3, 3]
        by_unit, _ = unit_twisted_tables(np.array([5, 1, 2]), 3, 1, classify=lambda u: u)
        assert by_unit[2].tolist() == [5, 2, 1]


class TestParallel:
    """Block splitting and ordered reduction."""

    def test_split_range(self):
        blocks = split_range(10, 3)
        assert [len(b) for b in blocks] == [3, 3, 4]
        assert split_range(2, 5) == [range(0, 1), range(1, 2)]

    def test_map_reduce_is_ordered(self):
        blocks = split_range(100, 4)
        serial = map_reduce(sum, blocks, lambda x, y: x + y)
        assert serial == sum(range(100))
        assert map_blocks(sum, blocks, workers=2) == map_blocks(sum, blocks)

    def test_map_reduce_needs_blocks(self):
        with pytest.raises(ValueError):
            map_reduce(sum, [], lambda x, y: x + y)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
