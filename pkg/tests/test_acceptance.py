"""
Desk-scale reproduction runs. Deselected by default; run with `pytest -m slow`.
"""
import pytest

import settings
from libs.cep import estimate_consumed_drift_at_origin, right_drift_rate
from libs.classifier import Verdict, classify, delta_sweep
from libs.exact_oracle import regression_suite, solve_exit, validate_suite
from libs.families import no_cookie_law, theta_law, trap_law, trap_run_probability
from libs.walk_engine import martingale_check, straight_run_probability

pytestmark = pytest.mark.slow

SEED = 20240611


@pytest.fixture(scope="module")
def suite():
    return regression_suite(count=20, seed=SEED, max_width=5, max_M=2, jump_range=2)


def test_optional_stopping_identity(suite):
    for instance in suite:
        assert solve_exit(instance).identity_residual <= 1e-10, instance.name


def test_oracle_agrees_with_simulation(suite):
    for analysis, report in validate_suite(suite, replicas=100_000, seed=SEED):
        assert report.passed, (report.name, report.worst)


def test_trap_straight_run():
    n = 1_000_000
    run = straight_run_probability(trap_law(1001), steps=1000, replicas=n, seed=SEED)
    exact = trap_run_probability(1000, 1001)
    assert abs(run.estimate - exact) <= 4 * (exact * (1 - exact) / n) ** 0.5


def test_phase_transition():
    sweep = delta_sweep(theta_law, [0.2, 0.3, 0.5, 0.75, 0.9], horizons=[10_000, 100_000], replicas=10_000,
                        seed=SEED)
    verdicts = {row.parameter: row for row in sweep.rows}
    assert verdicts[0.2].verdict is Verdict.SKIPPED
    assert verdicts[0.3].verdict is Verdict.RECURRENT
    assert verdicts[0.3].estimate.beta[1] < verdicts[0.3].estimate.beta[0]
    assert verdicts[0.5].boundary
    assert verdicts[0.5].verdict is not Verdict.TRANSIENT_RIGHT
    assert verdicts[0.75].verdict is Verdict.TRANSIENT_RIGHT
    assert verdicts[0.9].verdict is Verdict.TRANSIENT_RIGHT


def test_no_cookies_are_recurrent():
    result = classify(no_cookie_law(), horizons=[10_000, 100_000], replicas=10_000, seed=SEED)
    assert result.verdict is Verdict.RECURRENT
    # about 0.25% of simple walks stay above the start for 10^5 steps; the verdict comes from the decay
    assert result.estimate.return_fractions[-1] < settings.RETURN_THRESHOLD
    assert result.estimate.survival_interval[1] <= 1.0 - settings.RECURRENT_DECAY


def test_martingale_at_a_thousand_steps():
    check = martingale_check(theta_law(0.75), steps=1000, replicas=100_000, seed=SEED)
    assert check.passed(limit=settings.Z_LIMIT)


def test_drift_consumption_ceiling():
    law = theta_law(0.75, master_seed=SEED)
    rate = right_drift_rate(law, 10_000, 200, seed=SEED)
    assert not rate.excessive_censoring
    assert rate.mean <= 1.05
    assert rate.mean <= 1.0 + 5.0 / 100 + rate.std_error
    origin = estimate_consumed_drift_at_origin(law, 10_000, 20, 200, seed=SEED)
    assert 0.9 <= origin.mean <= 1.05
