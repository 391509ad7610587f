import pytest

from libs.cookie_env import RealizedEnvironment, delta, validate_assumptions
from libs.families import (first_visit_law, get_family, nearest_neighbor_law, no_cookie_law, theta_law, trap_law,
                           trap_limit_probability, trap_run_probability)


@pytest.mark.parametrize("theta,expected", [(0.2, -0.2), (0.25, 0.0), (0.5, 1.0), (0.75, 2.0)])
def test_theta_delta(theta, expected):
    assert delta(theta_law(theta)) == pytest.approx(expected, abs=1e-12)


def test_nearest_neighbor_delta():
    assert delta(nearest_neighbor_law(0.75, M=2)) == pytest.approx(1.0)
    assert nearest_neighbor_law(0.75, M=2).M == 2


def test_no_cookie_law_is_plain():
    law = no_cookie_law()
    assert delta(law) == 0.0
    assert validate_assumptions(law).passed


def test_theta_below_a_quarter_fails_non_negativity():
    report = validate_assumptions(theta_law(0.2))
    assert not report.get("A1").passed
    assert report.get("A2").passed


def test_get_family():
    assert get_family("theta") is theta_law
    with pytest.raises(KeyError):
        get_family("spiral")


class TestTrap:

    def test_cookies_have_zero_drift(self):
        env = RealizedEnvironment(trap_law(30))
        for x in range(-30, -1):
            assert env.next_step_law(x, 1).mean == pytest.approx(0.0, abs=1e-12)
        assert env.next_step_law(-1, 1) == env.law.background
        assert env.next_step_law(-31, 1) == env.law.background

    def test_trap_is_not_iid(self):
        report = validate_assumptions(trap_law(30))
        assert not report.get("A4").passed
        assert not report.passed

    def test_truncation_covers_the_far_jump(self):
        law = trap_law(30)
        assert law.max_jump_bound == law.truncation == 899

    def test_run_probability(self):
        assert trap_run_probability(1000, 1001) == pytest.approx(1000 / 7992, rel=1e-12)
        assert abs(trap_run_probability(1000, 1001) - trap_limit_probability()) < 2e-4

    def test_run_probability_without_cookies(self):
        assert trap_run_probability(10, depth=0) == pytest.approx(0.5 ** 10)


def test_first_visit_law():
    law = first_visit_law([(-1, 0.5), (3, 0.5)])
    assert law.M == 1
    assert delta(law) == 1.0
    assert validate_assumptions(law).passed
