"""
Cookie environment process: the walk observed each time it first reaches a new level n,
recorded as the overshoot past n and the remaining environment in a window around n.
Long-run averages over frontier levels stand in for expectations under the stationary
law of that process.
"""
import logging
import math
from dataclasses import dataclass, field

import settings
from libs.cookie_env import EnvironmentLaw, RealizedEnvironment, stack_drift
from libs.parallel import run_blocks
from libs.statistics import Summary
from libs.walk_engine import WalkState, new_walk, run_until

logger = logging.getLogger('cookiewalk.libs.cep')


@dataclass
class CepState:
    """
    Snapshot at tau_level. consumed and remaining_drift cover the sites
    level - window[0] .. level + window[1]. Not decided means the step budget ran out.
    """
    level: int
    time: int
    overshoot: int
    decided: bool
    window: tuple = (0, 0)
    consumed: tuple = ()
    remaining_drift: tuple = ()


def default_window(law: EnvironmentLaw) -> tuple:
    left = settings.CEP_WINDOW if settings.CEP_WINDOW is not None else 2 * law.max_jump_bound
    return left, max(law.max_right_jump, 1)


def consumed_count(state: WalkState, x: int, M: int) -> int:
    """
    Cookies eaten at x: visits to x so far, minus the visit the walk is standing on
    """
    visits = state.local_times.get(x, 0)
    if x == state.position:
        visits -= 1
    return min(visits, M)


def snapshot(state: WalkState, env: RealizedEnvironment, level: int, window: tuple) -> CepState:
    sites = range(level - window[0], level + window[1] + 1)
    consumed = tuple(consumed_count(state, x, env.law.M) for x in sites)
    remaining = tuple(stack_drift(env.realize_site(x)) - state.ledger.at(x) for x in sites)
    return CepState(level=level, time=state.steps, overshoot=state.position - level, decided=True,
                    window=window, consumed=consumed, remaining_drift=remaining)


def advance_frontier(state: WalkState, env: RealizedEnvironment, level: int, max_steps: int,
                     window: tuple = None) -> CepState:
    """
    Run the walk to tau_level, the first time it stands at or above level. When an
    earlier jump already overshot level no step is taken.
    """
    window = window or default_window(env.law)
    if state.position < level:
        outcome = run_until(state, env, lambda s: s.position >= level, max_steps)
        if not outcome.decided:
            return CepState(level=level, time=state.steps, overshoot=0, decided=False, window=window)
    return snapshot(state, env, level, window)


@dataclass
class CepStatistics:
    levels: int
    lags: tuple
    replicas: int
    censored: int = 0
    overshoot_histogram: dict = field(default_factory=dict)
    consumed_drift_at_origin: dict = field(default_factory=dict)
    right_drift_rate: Summary = field(default_factory=Summary)
    remaining_drift_profile: dict = field(default_factory=dict)
    observations: int = 0

    @property
    def censored_fraction(self) -> float:
        return self.censored / self.replicas if self.replicas else 0.0

    @property
    def excessive_censoring(self) -> bool:
        return self.censored_fraction > settings.CENSOR_LIMIT

    def profile_violations(self, delta: float, limit: float = None) -> list:
        """
        Offsets whose average remaining drift exceeds delta, or for offsets >= 0 differs
        from delta, by more than limit standard errors
        """
        limit = settings.Z_LIMIT if limit is None else limit
        violations = []
        for offset, summary in sorted(self.remaining_drift_profile.items()):
            slack = limit * summary.std_error + 1e-9
            if summary.mean > delta + slack or (offset >= 0 and abs(summary.mean - delta) > slack):
                violations.append((offset, summary.mean, summary.std_error))
        return violations

    def to_json(self) -> dict:
        return {"levels": self.levels,
                "replicas": self.replicas,
                "censored": self.censored,
                "observations": self.observations,
                "overshoot_histogram": {str(k): v for k, v in sorted(self.overshoot_histogram.items())},
                "consumed_drift_at_origin": {str(k): s.to_json() for k, s in sorted(self.consumed_drift_at_origin.items())},
                "right_drift_rate": self.right_drift_rate.to_json(),
                "remaining_drift_profile": {str(k): s.to_json()
                                            for k, s in sorted(self.remaining_drift_profile.items())}}


@dataclass
class FrontierRun:
    """
    One replica's frontier stream, reduced to per-replica averages
    """
    decided: bool
    overshoots: dict
    lagged: dict
    right_drift: float
    profile: dict
    rows: list


def frontier_run(law: EnvironmentLaw, replica: int, levels: int, lags: tuple, max_steps: int, seed: int,
                 stride: int = 1, window: tuple = None, keep_rows: bool = False) -> FrontierRun:
    """
    Walk one replica through levels 1..levels.
    Lagged origin drift for lag k averages D^m at tau_{m+k} over m in [levels/2, levels-k].
    """
    state, env = new_walk(law, replica, 0, seed, stride)
    window = window or default_window(law)
    overshoots = {}
    lagged = {k: Summary() for k in lags}
    profile = {y: Summary() for y in range(-window[0], window[1] + 1)}
    rows = []
    budget = max_steps
    previous = None
    for level in range(1, levels + 1):
        current = advance_frontier(state, env, level, max(budget, 1), window)
        if not current.decided or state.steps > max_steps:
            return FrontierRun(False, {}, {}, math.nan, {}, rows)
        budget = max_steps - state.steps
        if previous is not None:
            assert current.time >= previous.time, "frontier times decreased"
            assert previous.overshoot > 0 or current.time > previous.time, "frontier stalled without overshoot"
        overshoots[current.overshoot] = overshoots.get(current.overshoot, 0) + 1
        for y, remaining in zip(range(-window[0], window[1] + 1), current.remaining_drift):
            profile[y].add(remaining)
        for k in lags:
            if levels // 2 + k <= level:
                lagged[k].add(state.ledger.at(level - k))
        if keep_rows:
            origin = state.ledger.at(level - lags[0]) if lags and level >= lags[0] else ""
            rows.append((replica, level, current.overshoot, state.ledger.total_right, origin))
        previous = current
    return FrontierRun(True, overshoots, {k: s.mean for k, s in lagged.items() if s.count},
                       state.ledger.total_right / levels, {y: s.mean for y, s in profile.items()}, rows)


def _frontier_block(law, levels, lags, max_steps, seed, stride, window, keep_rows, first, last):
    return [frontier_run(law, replica, levels, lags, max_steps, seed, stride, window, keep_rows)
            for replica in range(first, last)]


def collect_statistics(law: EnvironmentLaw, levels: int, replicas: int, lags=(20,), max_steps: int = None,
                       seed: int = None, stride: int = 1, window: tuple = None, threads: int = None,
                       keep_rows: bool = False) -> tuple:
    """
    Frontier statistics over replicas; censored replicas are excluded and counted
    :param max_steps: step budget per replica, default 1000 * levels
    :return: (CepStatistics, frontier CSV rows)
    """
    seed = law.master_seed if seed is None else seed
    max_steps = max_steps or 1000 * levels
    lags = tuple(lags)
    if any(k < 1 or k > levels // 2 for k in lags):
        raise ValueError("every lag must lie in [1, levels/2]")
    runs = [run for block in run_blocks(_frontier_block, replicas, law, levels, lags, max_steps, seed, stride,
                                        window, keep_rows, threads=threads)
            for run in block]

    stats = CepStatistics(levels=levels, lags=lags, replicas=replicas)
    lagged = {k: Summary() for k in lags}
    profile = {}
    rate = Summary()
    rows = []
    for run in runs:
        rows.extend(run.rows)
        if not run.decided:
            stats.censored += 1
            continue
        for overshoot, count in run.overshoots.items():
            stats.overshoot_histogram[overshoot] = stats.overshoot_histogram.get(overshoot, 0) + count
            stats.observations += count
        for k, value in run.lagged.items():
            lagged[k].add(value)
        for y, value in run.profile.items():
            profile.setdefault(y, Summary()).add(value)
        rate.add(run.right_drift)
    stats.consumed_drift_at_origin = lagged
    stats.remaining_drift_profile = profile
    stats.right_drift_rate = rate
    if stats.excessive_censoring:
        logger.warning("{0} of {1} replicas did not reach level {2} within {3} steps".format(
            stats.censored, replicas, levels, max_steps))
    return stats, rows


@dataclass
class FrontierEstimate:
    mean: float
    std_error: float
    replicas: int
    censored: int

    @property
    def excessive_censoring(self) -> bool:
        total = self.replicas + self.censored
        return total > 0 and self.censored / total > settings.CENSOR_LIMIT

    def to_json(self) -> dict:
        return {"mean": self.mean, "std_error": self.std_error, "replicas": self.replicas,
                "censored": self.censored, "excessive_censoring": self.excessive_censoring}


def _estimate(summary: Summary, censored: int) -> FrontierEstimate:
    mean = summary.mean if summary.count else math.nan
    return FrontierEstimate(mean=mean, std_error=summary.std_error, replicas=summary.count, censored=censored)


def estimate_consumed_drift_at_origin(law: EnvironmentLaw, levels: int, lag: int, replicas: int, **kwargs) -> FrontierEstimate:
    """
    Path-wise surrogate for the stationary mean of the drift a site keeps giving once the
    frontier is lag levels past it
    """
    stats, _ = collect_statistics(law, levels, replicas, lags=(lag,), **kwargs)
    return _estimate(stats.consumed_drift_at_origin[lag], stats.censored)


def right_drift_rate(law: EnvironmentLaw, levels: int, replicas: int, **kwargs) -> FrontierEstimate:
    """
    Mean of D+ at tau_levels divided by levels
    """
    stats, _ = collect_statistics(law, levels, replicas, lags=(), **kwargs)
    return _estimate(stats.right_drift_rate, stats.censored)
