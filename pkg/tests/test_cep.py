import math

import pytest

from libs.cep import (advance_frontier, collect_statistics, consumed_count, default_window,
                      estimate_consumed_drift_at_origin, right_drift_rate)
from libs.families import point_mass_law
from libs.walk_engine import new_walk

SEED = 20240611


class TestFrontier:

    def test_marching_walk_has_no_overshoot(self, marching_law):
        state, env = new_walk(marching_law, 0, seed=1)
        window = default_window(marching_law)
        assert window == (2, 1)
        for level in range(1, 30):
            current = advance_frontier(state, env, level, 100)
            assert current.decided
            assert current.overshoot == 0
            assert current.time == level
            assert current.consumed[window[0] - 1] == 1
            if level >= 2:
                assert current.consumed == (1, 1, 0, 0)

    def test_already_past_the_level(self):
        law = point_mass_law(2)
        state, env = new_walk(law, 0, seed=1)
        first = advance_frontier(state, env, 1, 10)
        assert (first.time, first.overshoot) == (1, 1)
        second = advance_frontier(state, env, 2, 10)
        assert (second.time, second.overshoot) == (1, 0)

    def test_censored_frontier(self, plain_law):
        state, env = new_walk(plain_law, 0, seed=1)
        current = advance_frontier(state, env, 10_000, 5)
        assert not current.decided
        assert state.steps == 5

    def test_consumed_count_excludes_the_current_visit(self, marching_law):
        state, env = new_walk(marching_law, 0, seed=1)
        assert consumed_count(state, 0, 1) == 0
        advance_frontier(state, env, 1, 10)
        assert consumed_count(state, 0, 1) == 1
        assert consumed_count(state, 1, 1) == 0

    def test_remaining_drift_ahead_of_the_frontier_is_full(self, theta_law):
        state, env = new_walk(theta_law, 0, seed=2)
        window = default_window(theta_law)
        for level in range(1, 40):
            current = advance_frontier(state, env, level, 10_000)
            assert current.remaining_drift[window[0]:] == (2.0,) * (window[1] + 1)
            assert all(0.0 <= r <= 2.0 for r in current.remaining_drift)


class TestStatistics:

    def test_theta_overshoots(self, theta_law):
        stats, _ = collect_statistics(theta_law, levels=60, replicas=20, lags=(5,), seed=3)
        assert stats.censored == 0
        assert set(stats.overshoot_histogram) <= {0, 1, 2}
        assert sum(stats.overshoot_histogram.values()) == stats.observations == 60 * 20

    def test_profile_matches_delta(self, theta_law):
        stats, _ = collect_statistics(theta_law, levels=60, replicas=20, lags=(5,), seed=3)
        assert stats.profile_violations(2.0) == []
        assert stats.remaining_drift_profile[0].mean == 2.0

    def test_marching_walk(self, marching_law):
        stats, rows = collect_statistics(marching_law, levels=40, replicas=5, lags=(5, 10), seed=3, keep_rows=True)
        assert stats.consumed_drift_at_origin[5].mean == 1.0
        assert stats.consumed_drift_at_origin[10].std_error == 0.0
        assert stats.right_drift_rate.mean == 1.0
        assert stats.overshoot_histogram == {0: 200}
        assert len(rows) == 200
        assert rows[0] == (0, 1, 0, 1.0, "")
        assert rows[-1] == (4, 40, 0, 40.0, 1.0)

    @pytest.mark.parametrize("lags", [(0,), (21,)])
    def test_lags_must_fit(self, theta_law, lags):
        with pytest.raises(ValueError):
            collect_statistics(theta_law, levels=40, replicas=2, lags=lags)

    def test_json(self, marching_law):
        stats, _ = collect_statistics(marching_law, levels=10, replicas=2, lags=(2,), seed=3)
        data = stats.to_json()
        assert data["overshoot_histogram"] == {"0": 20}
        assert data["consumed_drift_at_origin"]["2"]["mean"] == 1.0


class TestEstimates:

    def test_no_cookies_give_zero(self, plain_law):
        estimate = estimate_consumed_drift_at_origin(plain_law, levels=10, lag=2, replicas=20, seed=5)
        assert estimate.mean == 0.0
        assert estimate.replicas + estimate.censored == 20

    def test_marching_walk(self, marching_law):
        assert estimate_consumed_drift_at_origin(marching_law, 30, 5, 10, seed=5).mean == 1.0
        rate = right_drift_rate(marching_law, 30, 10, seed=5)
        assert rate.mean == 1.0
        assert not rate.excessive_censoring

    def test_right_drift_rate_is_bounded_by_delta(self, theta_law):
        rate = right_drift_rate(theta_law, 1000, 10, seed=6)
        assert rate.censored == 0
        assert 0.0 < rate.mean <= 2.0

    def test_right_drift_rate_ceiling(self, theta_law):
        n = 1000
        rate = right_drift_rate(theta_law, n, 100, seed=SEED)
        assert not rate.excessive_censoring
        assert rate.mean <= 1.0 + 5.0 / math.sqrt(n) + rate.std_error

    def test_all_censored(self, plain_law):
        estimate = right_drift_rate(plain_law, 10, 3, seed=5, max_steps=2)
        assert estimate.censored == 3
        assert math.isnan(estimate.mean)
        assert estimate.excessive_censoring
