import math

import numpy as np
import pytest

from libs.distributions import (distribution_from_json, lattice_span, make_distribution, point_mass, sample,
                                support_span_gcd)
from libs.exceptions import DistributionError


class TestMakeDistribution:

    def test_symmetric_mean_is_zero(self):
        assert make_distribution([(-1, 0.5), (1, 0.5)]).mean == 0.0

    def test_lopsided_mean(self, lopsided):
        assert lopsided.mean == 2.0

    def test_atoms_are_sorted(self):
        dist = make_distribution([(2, 0.5), (-1, 0.5)])
        assert dist.offsets == (-1, 2)
        assert dist.mean == 0.5

    def test_duplicates_are_merged(self):
        dist = make_distribution([(1, 0.25), (0, 0.5), (1, 0.25)])
        assert dist.offsets == (0, 1)
        assert dist.probability(1) == 0.5

    def test_zero_probability_atoms_are_dropped(self):
        dist = make_distribution([(-1, 0.5), (0, 0.0), (1, 0.5)])
        assert dist.offsets == (-1, 1)

    def test_renormalization_is_idempotent(self):
        dist = make_distribution([(-1, 0.1), (0, 0.2), (1, 0.3), (2, 0.4)])
        again = make_distribution(dist.atoms)
        assert again == dist
        assert again.cumulative == dist.cumulative

    def test_small_sum_error_is_normalized_away(self):
        dist = make_distribution([(-1, 0.5 + 1e-10), (1, 0.5)])
        assert math.fsum(dist.probabilities) == pytest.approx(1.0, abs=1e-15)

    def test_mean_matches_extended_precision_sum(self):
        atoms = [(-7, 0.13), (0, 0.31), (3, 0.27), (11, 0.29)]
        dist = make_distribution(atoms)
        assert dist.mean == math.fsum(z * p for z, p in dist.atoms)
        assert make_distribution(reversed(atoms)).mean == dist.mean

    def test_cumulative_table_ends_at_one(self, lopsided):
        assert lopsided.cumulative[-1] == 1.0

    @pytest.mark.parametrize("atoms", [
        [],
        [(-1, -0.5), (1, 1.5)],
        [(-1, 0.5), (1, 0.4)],
        [(0.5, 1.0)],
    ])
    def test_invalid_atoms(self, atoms):
        with pytest.raises(DistributionError):
            make_distribution(atoms)

    def test_mass(self, lopsided):
        assert lopsided.mass(low=1) == 0.75
        assert lopsided.mass(high=0) == 0.25
        assert lopsided.absolute_moment() == 2.5


class TestSample:

    def test_point_mass_always_returns_its_offset(self):
        rng = np.random.default_rng(1)
        assert {sample(point_mass(1), rng) for _ in range(100)} == {1}

    def test_same_seed_same_sequence(self, symmetric):
        rng_a, rng_b = np.random.default_rng(5), np.random.default_rng(5)
        draws = [sample(symmetric, rng_a) for _ in range(500)]
        assert draws == [sample(symmetric, rng_b) for _ in range(500)]
        assert set(draws) == {-1, 1}

    def test_empirical_mean(self, lopsided):
        rng = np.random.default_rng(20240611)
        n = 100_000
        draws = np.array([sample(lopsided, rng) for _ in range(n)])
        standard_error = math.sqrt(3.0 / n)
        assert abs(draws.mean() - 2.0) <= 4 * standard_error

    def test_frequencies_match_probabilities(self):
        dist = make_distribution([(-2, 0.1), (-1, 0.2), (0, 0.3), (4, 0.4)])
        rng = np.random.default_rng(3)
        n = 50_000
        draws = [sample(dist, rng) for _ in range(n)]
        for z, p in dist.atoms:
            frequency = draws.count(z) / n
            assert abs(frequency - p) <= 5 * math.sqrt(p * (1 - p) / n)


class TestSpan:

    @pytest.mark.parametrize("offsets,span", [
        ((-1, 1), 2),
        ((-1, 0, 1), 1),
        ((-3, 3, 9), 6),
    ])
    def test_support_span_gcd(self, offsets, span):
        dist = make_distribution([(z, 1.0 / len(offsets)) for z in offsets])
        assert support_span_gcd(dist) == span

    def test_single_atom_has_no_span(self):
        with pytest.raises(DistributionError):
            support_span_gcd(point_mass(3))

    def test_lattice_span_includes_the_origin(self, symmetric):
        assert lattice_span(symmetric) == 1
        assert lattice_span(make_distribution([(-2, 0.5), (2, 0.5)])) == 2
        assert lattice_span(point_mass(0)) == 0


class TestJson:

    def test_from_json(self):
        dist = distribution_from_json([[-1, 0.25], [3, 0.75]])
        assert dist.to_json() == [[-1, 0.25], [3, 0.75]]

    @pytest.mark.parametrize("data", [[[0]], [None], 5])
    def test_malformed(self, data):
        with pytest.raises(DistributionError):
            distribution_from_json(data)
