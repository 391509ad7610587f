import math

import numpy as np
import pytest

from libs.statistics import Summary, binomial_std_error, merge_all, wilson_interval, z_score


class TestSummary:

    def test_matches_numpy(self):
        values = np.random.default_rng(8).normal(3.0, 2.0, size=1000)
        summary = Summary()
        for value in values:
            summary.add(float(value))
        assert summary.count == 1000
        assert summary.mean == pytest.approx(values.mean(), rel=1e-12)
        assert summary.variance == pytest.approx(values.var(ddof=1), rel=1e-10)
        assert summary.std_error == pytest.approx(values.std(ddof=1) / math.sqrt(1000), rel=1e-10)
        assert summary.minimum == values.min()
        assert summary.maximum == values.max()

    def test_merge_equals_single_pass(self):
        values = np.random.default_rng(9).integers(-5, 6, size=600).astype(float)
        whole, parts = Summary(), [Summary(), Summary(), Summary()]
        for i, value in enumerate(values):
            whole.add(value)
            parts[i % 3].add(value)
        merged = merge_all(parts)
        assert merged.count == whole.count
        assert merged.mean == pytest.approx(whole.mean, rel=1e-12)
        assert merged.variance == pytest.approx(whole.variance, rel=1e-10)

    def test_merge_with_empty(self):
        summary = Summary()
        summary.add(2.0)
        summary.add(4.0)
        assert Summary().merge(summary) == summary
        assert summary.merge(Summary()) == summary

    def test_single_value_has_no_error(self):
        summary = Summary()
        summary.add(1.5)
        assert summary.std_error == 0.0


def test_z_score():
    assert z_score(1.2, 1.0, 0.1) == pytest.approx(2.0)
    assert z_score(1.0, 1.0, 0.0) == 0.0
    assert z_score(1.1, 1.0, 0.0) == math.inf
    assert z_score(0.9, 1.0, 0.0) == -math.inf


def test_binomial_std_error():
    assert binomial_std_error(0.5, 100) == pytest.approx(0.05)
    assert binomial_std_error(0.0, 100) == 0.0
    assert binomial_std_error(0.5, 0) == math.inf


class TestWilson:

    def test_contains_the_estimate(self):
        low, high = wilson_interval(30, 100)
        assert low < 0.3 < high
        assert (low, high) == pytest.approx((0.2189, 0.3958), abs=1e-3)

    def test_edges(self):
        assert wilson_interval(0, 50)[0] == 0.0
        assert wilson_interval(50, 50)[1] == 1.0
        assert wilson_interval(0, 0) == (0.0, 1.0)

    def test_wider_at_higher_confidence(self):
        narrow = wilson_interval(40, 200, confidence=0.9)
        wide = wilson_interval(40, 200, confidence=0.99)
        assert wide[0] < narrow[0] and wide[1] > narrow[1]
