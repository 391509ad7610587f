import logging
import math
from dataclasses import dataclass, field

import numpy as np

import settings
from libs import seeding
from libs.cookie_env import EnvironmentLaw, RealizedEnvironment
from libs.distributions import sample
from libs.parallel import run_blocks
from libs.statistics import Summary, merge_all, wilson_interval, z_score

logger = logging.getLogger('cookiewalk.libs.walk_engine')

UP = "up"
DOWN = "down"


class DriftLedger:
    """
    Drift consumed by the walk: per site, in total, at sites >= 0, and the
    martingale position minus total drift
    """

    def __init__(self, position: int = 0):
        self.per_site: dict = {}
        self.total: float = 0.0
        self.total_right: float = 0.0
        self.martingale: float = float(position)

    def record(self, site: int, drift: float, new_position: int) -> None:
        self.per_site[site] = self.per_site.get(site, 0.0) + drift
        self.total += drift
        if site >= 0:
            self.total_right += drift
        self.martingale = new_position - self.total

    def at(self, site: int) -> float:
        return self.per_site.get(site, 0.0)


class DenseLocalTimes:
    """
    Local times for a walk confined to a declared arena [low, high], kept in a list
    """

    def __init__(self, low: int, high: int):
        self.low = low
        self.high = high
        self.counts = [0] * (high - low + 1)

    def get(self, x: int, default: int = 0) -> int:
        if self.low <= x <= self.high:
            return self.counts[x - self.low]
        return default

    def __getitem__(self, x: int) -> int:
        return self.counts[x - self.low]

    def __setitem__(self, x: int, value: int) -> None:
        assert self.low <= x <= self.high, "site {0} outside arena [{1}, {2}]".format(x, self.low, self.high)
        self.counts[x - self.low] = value

    def items(self):
        return ((self.low + i, c) for i, c in enumerate(self.counts) if c)

    def values(self):
        return (c for c in self.counts if c)


class WalkState:
    """
    Position, step count, local times and drift ledger of one walk.
    Local times count X_0..X_n, so the site the walk stands on is already counted.
    """

    def __init__(self, start: int, rng, arena: tuple = None, audit: bool = None):
        self.start = start
        self.position = start
        self.steps = 0
        self.rng = rng
        if arena:
            self.local_times = DenseLocalTimes(*arena)
        else:
            self.local_times = {}
        self.local_times[start] = 1
        self.ledger = DriftLedger(start)
        self.min_seen = start
        self.max_seen = start
        self.audit = settings.DEBUG if audit is None else audit
        self.last_visit_index = 0
        self.last_drift = 0.0

    @property
    def martingale(self) -> float:
        return self.ledger.martingale


def step(state: WalkState, env: RealizedEnvironment) -> WalkState:
    """
    Advance the walk by one jump. The law used at the current site is the one for its
    current visit count; its mean is charged to the ledger at that site.
    """
    x = state.position
    j = state.local_times.get(x, 0)
    law = env.next_step_law(x, j)
    if state.audit:
        expected = env.realize_site(x).law(env.shift.get(x, 0) + j)
        assert law == expected, "site {0} visit {1} used the wrong law".format(x, j)
    z = sample(law, state.rng)
    y = x + z
    state.ledger.record(x, law.mean, y)
    env.consume(x)
    state.position = y
    state.steps += 1
    state.local_times[y] = state.local_times.get(y, 0) + 1
    if y < state.min_seen:
        state.min_seen = y
    elif y > state.max_seen:
        state.max_seen = y
    state.last_visit_index = j
    state.last_drift = law.mean
    return state


@dataclass
class RunOutcome:
    decided: bool
    steps_taken: int
    state: WalkState = field(repr=False)


def run_until(state: WalkState, env: RealizedEnvironment, predicate, max_steps: int) -> RunOutcome:
    """
    Step until predicate(state) holds or max_steps steps have been taken
    :param predicate: callable on WalkState, checked after every step
    :return: RunOutcome, undecided when the step budget ran out first
    """
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    for taken in range(1, max_steps + 1):
        step(state, env)
        if predicate(state):
            return RunOutcome(True, taken, state)
    return RunOutcome(False, max_steps, state)


@dataclass
class PassageRecord:
    """
    Exit from (down, up). boundary is None when the run was cut off by the step budget.
    """
    boundary: str
    position: int
    time: int
    drift: float
    drift_right: float

    @property
    def decided(self) -> bool:
        return self.boundary is not None


def new_walk(law: EnvironmentLaw, replica: int, start: int = 0, seed: int = None, stride: int = 1,
             arena: tuple = None) -> tuple:
    """
    Fresh environment and walk for one replica
    :return: (WalkState, RealizedEnvironment)
    """
    seed = law.master_seed if seed is None else seed
    env = RealizedEnvironment(law, seed=seeding.environment_seed(seed, replica, stride))
    state = WalkState(start, seeding.walk_stream(seed, replica, stride), arena=arena)
    return state, env


def first_passage(env: RealizedEnvironment, start: int, up: int, down: int, max_steps: int, rng) -> PassageRecord:
    """
    Run from start until the walk is >= up or <= down
    """
    if not down < start < up:
        raise ValueError("need down < start < up, got {0} < {1} < {2}".format(down, start, up))
    state = WalkState(start, rng)
    outcome = run_until(state, env, lambda s: s.position >= up or s.position <= down, max_steps)
    boundary = None
    if outcome.decided:
        boundary = UP if state.position >= up else DOWN
    return PassageRecord(boundary, state.position, state.steps, state.ledger.total, state.ledger.total_right)


def replica_passage(law: EnvironmentLaw, replica: int, start: int, up: int, down: int, max_steps: int,
                    seed: int = None, stride: int = 1) -> PassageRecord:
    seed = law.master_seed if seed is None else seed
    env = RealizedEnvironment(law, seed=seeding.environment_seed(seed, replica, stride))
    return first_passage(env, start, up, down, max_steps, seeding.walk_stream(seed, replica, stride))


@dataclass
class StoppingCheck:
    """
    Monte Carlo check of E[X_T] = start + E[D_T] at the exit time T of (down, up)
    """
    difference: float
    std_error: float
    z: float
    mean_exit: float
    mean_drift: float
    replicas: int
    undecided: int

    def passed(self, limit: float = None) -> bool:
        limit = settings.Z_LIMIT if limit is None else limit
        return abs(self.z) <= limit

    def to_json(self) -> dict:
        return dict(self.__dict__, passed=self.passed())


def _stopping_block(law, start, up, down, max_steps, seed, stride, first, last):
    difference, exits, drifts = Summary(), Summary(), Summary()
    undecided = 0
    for replica in range(first, last):
        record = replica_passage(law, replica, start, up, down, max_steps, seed, stride)
        if not record.decided:
            undecided += 1
            continue
        difference.add(record.position - start - record.drift)
        exits.add(record.position)
        drifts.add(record.drift)
    return difference, exits, drifts, undecided


def optional_stopping_check(law: EnvironmentLaw, start: int, up: int, down: int, replicas: int,
                            max_steps: int = 1_000_000, seed: int = None, stride: int = 1,
                            threads: int = None) -> StoppingCheck:
    """
    Compare the mean exit position with start plus the mean consumed drift.
    Undecided replicas are excluded and counted.
    """
    seed = law.master_seed if seed is None else seed
    blocks = run_blocks(_stopping_block, replicas, law, start, up, down, max_steps, seed, stride, threads=threads)
    difference = merge_all(b[0] for b in blocks)
    exits = merge_all(b[1] for b in blocks)
    drifts = merge_all(b[2] for b in blocks)
    undecided = sum(b[3] for b in blocks)
    if undecided:
        logger.warning("{0} of {1} replicas did not exit within {2} steps".format(undecided, replicas, max_steps))
    return StoppingCheck(difference=difference.mean, std_error=difference.std_error,
                         z=z_score(difference.mean, 0.0, difference.std_error),
                         mean_exit=exits.mean, mean_drift=drifts.mean,
                         replicas=difference.count, undecided=undecided)


@dataclass
class MartingaleCheck:
    """
    Mean of M_n - X_0 at a fixed step count n
    """
    steps: int
    mean: float
    std_error: float
    z: float
    mean_position: float
    mean_drift: float
    mean_drift_right: float
    replicas: int

    def passed(self, limit: float = None) -> bool:
        limit = settings.Z_LIMIT if limit is None else limit
        return abs(self.z) <= limit

    def to_json(self) -> dict:
        return dict(self.__dict__, passed=self.passed())


def _martingale_block(law, steps, start, seed, stride, first, last):
    martingale, position, drift, right = Summary(), Summary(), Summary(), Summary()
    for replica in range(first, last):
        state, env = new_walk(law, replica, start, seed, stride)
        for _ in range(steps):
            step(state, env)
        martingale.add(state.martingale - start)
        position.add(state.position)
        drift.add(state.ledger.total)
        right.add(state.ledger.total_right)
    return martingale, position, drift, right


def martingale_check(law: EnvironmentLaw, steps: int, replicas: int, start: int = 0, seed: int = None,
                     stride: int = 1, threads: int = None) -> MartingaleCheck:
    seed = law.master_seed if seed is None else seed
    blocks = run_blocks(_martingale_block, replicas, law, steps, start, seed, stride, threads=threads)
    martingale, position, drift, right = (merge_all(b[i] for b in blocks) for i in range(4))
    return MartingaleCheck(steps=steps, mean=martingale.mean, std_error=martingale.std_error,
                           z=z_score(martingale.mean, 0.0, martingale.std_error),
                           mean_position=position.mean, mean_drift=drift.mean, mean_drift_right=right.mean,
                           replicas=martingale.count)


@dataclass
class RunProbability:
    successes: int
    replicas: int
    estimate: float
    std_error: float
    interval: tuple

    def to_json(self) -> dict:
        return {"successes": self.successes, "replicas": self.replicas, "estimate": self.estimate,
                "std_error": self.std_error, "ci_low": self.interval[0], "ci_high": self.interval[1]}


def _straight_run_block(law, steps, direction, start, seed, stride, first, last):
    successes = 0
    for replica in range(first, last):
        state, env = new_walk(law, replica, start, seed, stride)
        target = start
        for _ in range(steps):
            step(state, env)
            target += direction
            if state.position != target:
                break
        else:
            successes += 1
    return successes


def straight_run_probability(law: EnvironmentLaw, steps: int, replicas: int, direction: int = -1, start: int = 0,
                             seed: int = None, stride: int = 1, threads: int = None) -> RunProbability:
    """
    Estimate P(X_n = start + direction * n for every n <= steps)
    """
    seed = law.master_seed if seed is None else seed
    successes = sum(run_blocks(_straight_run_block, replicas, law, steps, direction, start, seed, stride,
                               threads=threads))
    estimate = successes / replicas
    return RunProbability(successes=successes, replicas=replicas, estimate=estimate,
                          std_error=math.sqrt(estimate * (1.0 - estimate) / replicas),
                          interval=wilson_interval(successes, replicas, settings.CONFIDENCE))


@dataclass
class ExitTimeTail:
    """
    Empirical survival P(T > n) of an exit time and the slope of its logarithm
    """
    survival: list
    slope: float
    intercept: float
    undecided: int

    @property
    def inconclusive(self) -> bool:
        return math.isnan(self.slope)


def _exit_times_block(law, start, up, down, max_steps, seed, stride, first, last):
    times = []
    for replica in range(first, last):
        record = replica_passage(law, replica, start, up, down, max_steps, seed, stride)
        times.append(record.time if record.decided else -1)
    return times


def exit_time_tail(law: EnvironmentLaw, start: int, up: int, down: int, replicas: int, max_steps: int = 100_000,
                   min_count: int = 10, seed: int = None, stride: int = 1, threads: int = None) -> ExitTimeTail:
    """
    Fit log P(T > n) against n over the range where at least min_count replicas survive.
    With fewer than two such points the fit is inconclusive and the slope is nan.
    """
    seed = law.master_seed if seed is None else seed
    times = [t for block in run_blocks(_exit_times_block, replicas, law, start, up, down, max_steps, seed, stride,
                                       threads=threads) for t in block]
    undecided = sum(1 for t in times if t < 0)
    decided = np.array([t for t in times if t >= 0], dtype=np.int64)
    horizon = int(decided.max()) if decided.size else 0
    counts = np.bincount(decided, minlength=horizon + 1)
    surviving = len(times) - np.cumsum(counts)
    survival = (surviving / len(times)).tolist()
    usable = np.nonzero(surviving >= min_count)[0]
    if usable.size < 2:
        return ExitTimeTail(survival=survival, slope=math.nan, intercept=math.nan, undecided=undecided)
    slope, intercept = np.polyfit(usable, np.log(surviving[usable] / len(times)), 1)
    return ExitTimeTail(survival=survival, slope=float(slope), intercept=float(intercept), undecided=undecided)


def trajectory_rows(state: WalkState, env: RealizedEnvironment, steps: int):
    """
    Yield (step, position, visit_index, consumed_drift) for each of the next steps
    """
    for _ in range(steps):
        step(state, env)
        yield state.steps, state.position, state.last_visit_index, state.last_drift
