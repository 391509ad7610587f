import json
import os

import numpy as np
import pytest
from scipy import sparse

import settings
from libs import seeding
from libs.cookie_env import CookieStack, background_stack
from libs.distributions import point_mass
from libs.exact_oracle import (OracleInstance, cross_validate, enumerate_states, instance_from_json, random_instance,
                               regression_suite, solve_exit, solve_system, transition_system, validate_suite)
from libs.exceptions import ConfigError, StateBudgetError


def plain_instance(symmetric, down, up, M=1):
    stacks = tuple(background_stack(symmetric, M) for _ in range(up - down - 1))
    return OracleInstance(down=down, up=up, start=0, stacks=stacks, background=symmetric, name="plain")


@pytest.fixture
def two_cookies(symmetric):
    stacks = tuple(CookieStack((point_mass(1),), symmetric) for _ in range(2))
    return OracleInstance(down=-1, up=2, start=0, stacks=stacks, background=symmetric, name="two_cookies")


class TestStates:

    @pytest.mark.parametrize("width,M,count", [(1, 1, 2), (3, 1, 24), (4, 2, 324)])
    def test_state_count(self, symmetric, width, M, count):
        instance = plain_instance(symmetric, -1, width, M)
        assert enumerate_states(instance).transient_count == count

    def test_budget(self, symmetric):
        with pytest.raises(StateBudgetError) as error:
            enumerate_states(plain_instance(symmetric, -1, 3, 2), budget=50)
        assert error.value.count == 3 * 27

    def test_index_knows_both_ends(self, symmetric):
        index = enumerate_states(plain_instance(symmetric, -2, 3))
        assert (index.down, index.up) == (-2, 3)
        assert index.absorbing == (-2, 3)

    def test_decode_inverts_transient(self, symmetric):
        index = enumerate_states(plain_instance(symmetric, -2, 2, 2))
        i = index.transient(1, (2, 0, 1))
        assert index.decode(i) == (1, (2, 0, 1))
        assert index.transient(-1) == 0

    def test_absorbing_states_keep_overshoot(self, lopsided, symmetric):
        stacks = tuple(CookieStack((lopsided,), symmetric) for _ in range(3))
        instance = OracleInstance(down=-2, up=2, start=0, stacks=stacks, background=symmetric)
        assert enumerate_states(instance).absorbing == (-2, 2, 3, 4)

    def test_rows_are_stochastic(self, lopsided, symmetric):
        stacks = tuple(CookieStack((lopsided, point_mass(1)), symmetric) for _ in range(3))
        instance = OracleInstance(down=-2, up=2, start=0, stacks=stacks, background=symmetric)
        Q, R, drift = transition_system(instance, enumerate_states(instance))
        sums = np.asarray(Q.sum(axis=1)).ravel() + np.asarray(R.sum(axis=1)).ravel()
        np.testing.assert_allclose(sums, 1.0, atol=1e-14)
        assert set(drift.tolist()) == {0.0, 1.0, 2.0}

    @pytest.mark.parametrize("kwargs", [
        {"down": 0, "up": 2, "start": 0},
        {"down": -1, "up": 1, "start": 0, "width": 2},
    ])
    def test_invalid_instances(self, symmetric, kwargs):
        width = kwargs.pop("width", kwargs["up"] - kwargs["down"] - 1)
        with pytest.raises(ValueError):
            OracleInstance(stacks=tuple(background_stack(symmetric, 1) for _ in range(width)),
                           background=symmetric, **kwargs)


class TestSolve:

    def test_symmetric_interval(self, symmetric):
        analysis = solve_exit(plain_instance(symmetric, -2, 2))
        assert analysis.p_up == pytest.approx(0.5, abs=1e-12)
        assert analysis.expected_time == pytest.approx(4.0, abs=1e-10)
        assert analysis.expected_drift == pytest.approx(0.0, abs=1e-12)
        assert analysis.identity_holds

    def test_gamblers_ruin(self, symmetric):
        analysis = solve_exit(plain_instance(symmetric, -1, 3))
        assert analysis.p_up == pytest.approx(0.25, abs=1e-12)
        assert analysis.expected_time == pytest.approx(3.0, abs=1e-10)
        assert analysis.exit_probabilities[-1] == pytest.approx(0.75, abs=1e-12)

    def test_two_cookies(self, two_cookies):
        analysis = solve_exit(two_cookies)
        assert analysis.p_up == pytest.approx(1.0, abs=1e-12)
        assert analysis.expected_drift == pytest.approx(2.0, abs=1e-12)
        assert analysis.expected_time == pytest.approx(2.0, abs=1e-12)
        assert analysis.stored_drift == 2.0

    def test_overshoot_enters_the_identity(self, lopsided, symmetric):
        stacks = tuple(CookieStack((lopsided,), symmetric) for _ in range(3))
        analysis = solve_exit(OracleInstance(down=-2, up=2, start=0, stacks=stacks, background=symmetric))
        assert analysis.expected_exit == pytest.approx(analysis.expected_drift, abs=1e-10)
        assert analysis.exit_probabilities[4] > 0
        assert analysis.identity_holds

    def test_regression_suite(self):
        for instance in regression_suite(count=20, seed=7):
            analysis = solve_exit(instance)
            assert analysis.identity_holds, instance.name
            assert analysis.probability_mass == pytest.approx(1.0, abs=1e-10)
            assert analysis.expected_exit >= instance.start - 1e-10
            assert analysis.expected_drift <= analysis.stored_drift + 1e-10
            assert max(analysis.residuals.values()) <= 1e-12

    def test_iterative_path_agrees(self, monkeypatch):
        instance = regression_suite(count=1, seed=3, max_width=4)[0]
        direct = solve_exit(instance)
        monkeypatch.setattr(settings, "DIRECT_SOLVE_LIMIT", 0)
        iterative = solve_exit(instance)
        assert iterative.p_up == pytest.approx(direct.p_up, abs=1e-8)
        assert iterative.expected_time == pytest.approx(direct.expected_time, rel=1e-8)
        assert iterative.identity_residual <= 1e-8

    def test_solve_system_identity(self):
        A = sparse.identity(5, format="csr") * 2.0
        B = np.ones((5, 2))
        H, residuals = solve_system(A, B)
        np.testing.assert_allclose(H, 0.5)
        assert residuals == [0.0, 0.0]

    def test_suite_is_reproducible(self):
        first = [instance.to_json() for instance in regression_suite(count=5, seed=11)]
        assert first == [instance.to_json() for instance in regression_suite(count=5, seed=11)]
        assert first != [instance.to_json() for instance in regression_suite(count=5, seed=12)]

    def test_random_instance_starts_inside(self):
        rng = seeding.get_rng(1, seeding.INSTANCE, 0)
        for _ in range(20):
            instance = random_instance(rng, width=3, M=1)
            assert instance.down < 0 < instance.up
            assert instance.width == 3
            assert all(cookie.mean >= 0 for stack in instance.stacks for cookie in stack.cookies)


class TestCrossValidate:

    def test_deterministic_instance(self, two_cookies):
        report = cross_validate(two_cookies, replicas=50, seed=1)
        assert report.passed
        assert report.estimates["p_up"] == 1.0
        assert report.z_scores["time"] == 0.0

    def test_random_instance(self):
        instance = regression_suite(count=1, seed=5, max_width=3, max_M=1)[0]
        report = cross_validate(instance, replicas=4000, seed=9, limit=5.0)
        assert report.passed, report.worst
        assert set(report.z_scores) >= {"p_up", "drift", "time"}

    def test_validate_suite(self):
        results = validate_suite(regression_suite(count=2, seed=2, max_width=2, max_M=1), replicas=500, seed=4,
                                 threads=1)
        assert len(results) == 2
        assert all(analysis.identity_holds for analysis, _ in results)


class TestJson:

    def test_round_trip(self, two_cookies):
        again = instance_from_json(json.loads(json.dumps(two_cookies.to_json())))
        assert again == two_cookies

    @pytest.mark.parametrize("name,p_up,drift,time", [("two_cookies", 1.0, 2.0, 2.0),
                                                       ("gamblers_ruin", 0.25, 0.0, 3.0)])
    def test_bundled_instances(self, configs_dir, name, p_up, drift, time):
        with open(os.path.join(configs_dir, "instances", name + ".json")) as handle:
            analysis = solve_exit(instance_from_json(json.load(handle)))
        assert analysis.p_up == pytest.approx(p_up, abs=1e-12)
        assert analysis.expected_drift == pytest.approx(drift, abs=1e-12)
        assert analysis.expected_time == pytest.approx(time, abs=1e-10)

    def test_missing_site(self, two_cookies):
        data = two_cookies.to_json()
        del data["sites"]["1"]
        with pytest.raises(ConfigError) as error:
            instance_from_json(data)
        assert error.value.field == "instance.sites"

    def test_missing_key(self, two_cookies):
        data = two_cookies.to_json()
        del data["up"]
        with pytest.raises(ConfigError) as error:
            instance_from_json(data)
        assert error.value.field == "instance.up"
