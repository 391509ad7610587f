"""
Exact exit analysis of a cookie walk on a finite interval.

The walk started at `start` runs until it lands at or above `up` or at or below `down`.
Inside the interval the chain is Markov in (position, cookies consumed at every interior
site), with consumed counts capped at M. Absorbing states are keyed by landing position
so overshoot is kept. Absorption probabilities, the expected consumed drift and the
expected exit time come from (I - Q) h = b solves on a scipy.sparse matrix.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import bicgstab, splu
from scipy.sparse.linalg import norm as sparse_norm

import settings
from libs import seeding
from libs.cookie_env import (CookieStack, EnvironmentLaw, SiteTableGenerator, background_stack, stack_drift,
                             stack_from_json)
from libs.distributions import distribution_from_json, make_distribution
from libs.exceptions import (CensoringError, ConfigError, DistributionError, SingularSystemError,
                             StateBudgetError)
from libs.parallel import run_blocks, run_items
from libs.statistics import Summary, binomial_std_error, merge_all, z_score
from libs.walk_engine import UP, replica_passage

IDENTITY_TOLERANCE = 1e-10

logger = logging.getLogger('cookiewalk.libs.exact_oracle')


@dataclass(frozen=True)
class OracleInstance:
    """
    A fully realized environment on the open interval (down, up)
    :param stacks: tuple of CookieStack, one per interior site down+1 .. up-1
    """
    down: int
    up: int
    start: int
    stacks: tuple
    background: object
    name: str = field(default=None, compare=False)

    def __post_init__(self):
        if not self.down < self.start < self.up:
            raise ValueError("need down < start < up, got {0} < {1} < {2}".format(self.down, self.start, self.up))
        if len(self.stacks) != self.width:
            raise ValueError("{0} interior sites but {1} stacks".format(self.width, len(self.stacks)))
        depths = {stack.depth for stack in self.stacks}
        if len(depths) != 1:
            raise ValueError("every stack must hold the same number of cookies, got {0}".format(sorted(depths)))

    @property
    def width(self) -> int:
        return self.up - self.down - 1

    @property
    def M(self) -> int:
        return self.stacks[0].depth

    @property
    def sites(self) -> range:
        return range(self.down + 1, self.up)

    def stack_at(self, x: int) -> CookieStack:
        return self.stacks[x - self.down - 1]

    @property
    def stored_drift(self) -> float:
        return math.fsum(stack_drift(stack) for stack in self.stacks)

    def to_law(self, master_seed: int = 0) -> EnvironmentLaw:
        """
        The same environment as a site-table law the walk engine can run on
        """
        table = dict(zip(self.sites, self.stacks))
        generator = SiteTableGenerator(table, background_stack(self.background, self.M))
        return EnvironmentLaw(M=self.M, background=self.background, generator=generator,
                              master_seed=master_seed, name=self.name)

    def to_json(self) -> dict:
        return {"name": self.name,
                "down": self.down,
                "up": self.up,
                "start": self.start,
                "background": self.background.to_json(),
                "sites": {str(x): stack.to_json() for x, stack in zip(self.sites, self.stacks)}}


def instance_from_json(data: dict) -> OracleInstance:
    try:
        down, up, start = int(data["down"]), int(data["up"]), int(data["start"])
        background = distribution_from_json(data["background"])
        sites = {int(x): stack for x, stack in data["sites"].items()}
    except KeyError as error:
        raise ConfigError("missing key {0}".format(error), field="instance.{0}".format(error.args[0]))
    except DistributionError as error:
        raise ConfigError(str(error), field="instance.background")

    stacks = []
    for x in range(down + 1, up):
        if x not in sites:
            raise ConfigError("no stack for interior site {0}".format(x), field="instance.sites")
        try:
            stacks.append(stack_from_json(sites[x], background))
        except DistributionError as error:
            raise ConfigError(str(error), field="instance.sites.{0}".format(x))
    try:
        return OracleInstance(down=down, up=up, start=start, stacks=tuple(stacks), background=background,
                              name=data.get("name"))
    except ValueError as error:
        raise ConfigError(str(error), field="instance")


@dataclass
class StateIndex:
    """
    Transient states are numbered position + width * sum_k count_k * (M+1)^k,
    absorbing states by landing position
    """
    width: int
    M: int
    down: int
    absorbing: tuple

    @property
    def up(self) -> int:
        return self.down + self.width + 1

    @property
    def transient_count(self) -> int:
        return self.width * (self.M + 1) ** self.width

    def transient(self, position: int, counts=None) -> int:
        """
        Index of the state at `position` with the given per-site consumed counts (all zero by default)
        """
        offset = position - self.down - 1
        if not 0 <= offset < self.width:
            raise ValueError("position {0} is not inside the interval".format(position))
        rest = 0
        for k, count in enumerate(counts or ()):
            rest += min(count, self.M) * (self.M + 1) ** k
        return offset + self.width * rest

    def decode(self, index: int) -> tuple:
        offset, rest = index % self.width, index // self.width
        counts = []
        for _ in range(self.width):
            rest, count = divmod(rest, self.M + 1)
            counts.append(count)
        return self.down + 1 + offset, tuple(counts)

    def absorbing_column(self, position: int) -> int:
        return self.absorbing.index(position)


def enumerate_states(instance: OracleInstance, budget: int = None) -> StateIndex:
    """
    Index the state space of an instance
    :raise StateBudgetError: when width * (M+1)^width exceeds the budget
    """
    budget = settings.STATE_BUDGET if budget is None else budget
    count = instance.width * (instance.M + 1) ** instance.width
    if count > budget:
        raise StateBudgetError(count, budget)
    landing = set()
    for x in instance.sites:
        stack = instance.stack_at(x)
        for law in stack.cookies + (stack.background,):
            for z in law.offsets:
                if x + z <= instance.down or x + z >= instance.up:
                    landing.add(x + z)
    return StateIndex(width=instance.width, M=instance.M, down=instance.down, absorbing=tuple(sorted(landing)))


def transition_system(instance: OracleInstance, index: StateIndex) -> tuple:
    """
    Build Q (transient to transient), R (transient to absorbing) and the drift of the
    law used in every transient state
    :return: (Q, R, drift) with Q and R as scipy CSR matrices
    """
    W, M = index.width, index.M
    n = index.transient_count
    states = np.arange(n, dtype=np.int64)
    offsets = states % W
    rest = states // W
    absorbing_col = {position: k for k, position in enumerate(index.absorbing)}

    q_rows, q_cols, q_vals = [], [], []
    r_rows, r_cols, r_vals = [], [], []
    drift = np.zeros(n)
    for p in range(W):
        x = index.down + 1 + p
        stack = instance.stack_at(x)
        power = (M + 1) ** p
        at_p = offsets == p
        counts = (rest // power) % (M + 1)
        for count in range(M + 1):
            selected = states[at_p & (counts == count)]
            if selected.size == 0:
                continue
            law = stack.law(count + 1)
            drift[selected] = law.mean
            moved_rest = rest[selected] + (power if count < M else 0)
            for z, prob in law.atoms:
                y = x + z
                if index.down < y < index.up:
                    q_rows.append(selected)
                    q_cols.append((y - index.down - 1) + W * moved_rest)
                    q_vals.append(np.full(selected.size, prob))
                else:
                    r_rows.append(selected)
                    r_cols.append(np.full(selected.size, absorbing_col[y], dtype=np.int64))
                    r_vals.append(np.full(selected.size, prob))

    def assemble(rows, cols, vals, width):
        if not rows:
            return sparse.csr_matrix((n, width))
        return sparse.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                                 shape=(n, width)).tocsr()

    Q = assemble(q_rows, q_cols, q_vals, n)
    R = assemble(r_rows, r_cols, r_vals, len(index.absorbing))
    row_sums = np.asarray(Q.sum(axis=1)).ravel() + np.asarray(R.sum(axis=1)).ravel()
    assert np.allclose(row_sums, 1.0, atol=1e-12), "transition rows do not sum to 1"
    return Q, R, drift


def relative_residual(A, h: np.ndarray, b: np.ndarray) -> float:
    """
    Normwise backward error ||A h - b|| / (||A|| ||h|| + ||b||) in the max norm
    """
    residual = np.abs(A @ h - b).max(initial=0.0)
    scale = sparse_norm(A, np.inf) * np.abs(h).max(initial=0.0) + np.abs(b).max(initial=0.0)
    return residual / scale if scale > 0 else residual


def solve_system(A, B: np.ndarray, tolerance: float = None, direct_limit: int = None) -> tuple:
    """
    Solve A H = B column by column
    :return: (H, list of relative residuals)
    """
    tolerance = settings.SOLVE_TOLERANCE if tolerance is None else tolerance
    direct_limit = settings.DIRECT_SOLVE_LIMIT if direct_limit is None else direct_limit
    A = A.tocsc()
    if A.shape[0] <= direct_limit:
        try:
            factor = splu(A)
        except RuntimeError as error:
            raise SingularSystemError("direct solve failed: {0}".format(error))
        H = factor.solve(B)
        # one step of iterative refinement
        H += factor.solve(B - A @ H)
    else:
        H = np.empty_like(B)
        for k in range(B.shape[1]):
            column, info = bicgstab(A, B[:, k], rtol=tolerance, atol=0.0, maxiter=10 * A.shape[0])
            if info < 0:
                raise SingularSystemError("iterative solve broke down on column {0}".format(k))
            if info > 0:
                logger.warning("bicgstab did not converge on column {0} after {1} iterations".format(k, info))
            H[:, k] = column
    if not np.all(np.isfinite(H)):
        raise SingularSystemError("solution is not finite")
    residuals = [relative_residual(A, H[:, k], B[:, k]) for k in range(B.shape[1])]
    worst = max(residuals, default=0.0)
    if worst > tolerance:
        logger.warning("largest relative residual {0:.3g} exceeds {1:.3g}".format(worst, tolerance))
    return H, residuals


@dataclass
class ExitAnalysis:
    """
    Exact exit statistics of an instance from its start site
    """
    p_up: float
    exit_position_law: object
    exit_probabilities: dict
    expected_drift: float
    expected_time: float
    expected_exit: float
    identity_residual: float
    residuals: dict
    states: int
    stored_drift: float

    @property
    def identity_holds(self) -> bool:
        return self.identity_residual <= IDENTITY_TOLERANCE

    @property
    def probability_mass(self) -> float:
        return math.fsum(self.exit_probabilities.values())

    def to_json(self) -> dict:
        return {"p_up": self.p_up,
                "exit_positions": [[position, p] for position, p in sorted(self.exit_probabilities.items())],
                "expected_drift": self.expected_drift,
                "expected_time": self.expected_time,
                "expected_exit": self.expected_exit,
                "identity_residual": self.identity_residual,
                "identity_holds": self.identity_holds,
                "residuals": self.residuals,
                "states": self.states,
                "stored_drift": self.stored_drift}


def solve_exit(instance: OracleInstance, budget: int = None) -> ExitAnalysis:
    """
    Exit law, expected consumed drift and expected exit time from the start site
    :raise StateBudgetError: if the instance is too large to enumerate
    :raise SingularSystemError: if a solve fails
    """
    index = enumerate_states(instance, budget)
    Q, R, drift = transition_system(instance, index)
    n = index.transient_count
    A = sparse.identity(n, format="csr") - Q
    B = np.column_stack([R.toarray(), drift, np.ones(n)])
    H, residuals = solve_system(A, B)

    start = index.transient(instance.start)
    row = H[start]
    probabilities = {position: float(p) for position, p in zip(index.absorbing, row[:len(index.absorbing)])}
    expected_drift = float(row[-2])
    expected_time = float(row[-1])
    expected_exit = math.fsum(position * p for position, p in probabilities.items())
    p_up = math.fsum(p for position, p in probabilities.items() if position >= instance.up)

    # probabilities may carry -1e-17 noise; clip before building a law
    positive = [(position, max(p, 0.0)) for position, p in probabilities.items()]
    exit_law = make_distribution(positive)

    names = ["exit_{0}".format(position) for position in index.absorbing] + ["drift", "time"]
    analysis = ExitAnalysis(p_up=min(max(p_up, 0.0), 1.0),
                            exit_position_law=exit_law,
                            exit_probabilities=probabilities,
                            expected_drift=expected_drift,
                            expected_time=expected_time,
                            expected_exit=expected_exit,
                            identity_residual=abs(expected_exit - instance.start - expected_drift),
                            residuals=dict(zip(names, residuals)),
                            states=n,
                            stored_drift=instance.stored_drift)
    logger.debug("{0}: {1} states, p_up={2:.6g}, E[D]={3:.6g}, E[T]={4:.6g}".format(
        instance.name or "instance", n, analysis.p_up, expected_drift, expected_time))
    if not analysis.identity_holds:
        logger.warning("optional stopping identity off by {0:.3g}".format(analysis.identity_residual))
    return analysis


@dataclass
class ValidationReport:
    """
    Monte Carlo estimates of an instance compared with its exact solve
    """
    name: str
    replicas: int
    horizon: int
    estimates: dict
    exact: dict
    z_scores: dict
    limit: float

    @property
    def passed(self) -> bool:
        return all(abs(z) <= self.limit for z in self.z_scores.values())

    @property
    def worst(self) -> tuple:
        return max(self.z_scores.items(), key=lambda item: abs(item[1]))

    def to_json(self) -> dict:
        return {"name": self.name, "replicas": self.replicas, "horizon": self.horizon,
                "estimates": self.estimates, "exact": self.exact, "z_scores": self.z_scores,
                "passed": self.passed}


def _exit_block(law, start, up, down, horizon, seed, stride, first, last):
    ups, undecided = 0, 0
    drift, time = Summary(), Summary()
    exits = {}
    for replica in range(first, last):
        record = replica_passage(law, replica, start, up, down, horizon, seed, stride)
        if not record.decided:
            undecided += 1
            continue
        ups += record.boundary == UP
        drift.add(record.drift)
        time.add(record.time)
        exits[record.position] = exits.get(record.position, 0) + 1
    return ups, drift, time, exits, undecided


def cross_validate(instance: OracleInstance, replicas: int, seed: int = None, stride: int = 1,
                   threads: int = None, analysis: ExitAnalysis = None, limit: float = None) -> ValidationReport:
    """
    Simulate the instance with the walk engine and z-score every estimate against the exact solve
    :raise CensoringError: if any replica fails to exit within HORIZON_FACTOR * E[T] steps
    """
    seed = settings.SEED if seed is None else seed
    limit = settings.Z_LIMIT if limit is None else limit
    analysis = analysis or solve_exit(instance)
    horizon = max(1, int(math.ceil(settings.HORIZON_FACTOR * analysis.expected_time)))
    law = instance.to_law(seed)

    blocks = run_blocks(_exit_block, replicas, law, instance.start, instance.up, instance.down, horizon, seed,
                        stride, threads=threads)
    undecided = sum(block[4] for block in blocks)
    if undecided:
        raise CensoringError("{0} of {1} replicas did not exit within {2} steps".format(
            undecided, replicas, horizon), undecided)
    ups = sum(block[0] for block in blocks)
    drift = merge_all(block[1] for block in blocks)
    time = merge_all(block[2] for block in blocks)
    exits = {}
    for block in blocks:
        for position, count in block[3].items():
            exits[position] = exits.get(position, 0) + count

    p_hat = ups / replicas
    estimates = {"p_up": p_hat, "drift": drift.mean, "time": time.mean}
    exact = {"p_up": analysis.p_up, "drift": analysis.expected_drift, "time": analysis.expected_time}
    z_scores = {"p_up": z_score(p_hat, analysis.p_up, binomial_std_error(analysis.p_up, replicas)),
                "drift": z_score(drift.mean, analysis.expected_drift, drift.std_error),
                "time": z_score(time.mean, analysis.expected_time, time.std_error)}
    for position in sorted(set(exits) | set(analysis.exit_probabilities)):
        key = "exit_{0}".format(position)
        p = max(analysis.exit_probabilities.get(position, 0.0), 0.0)
        frequency = exits.get(position, 0) / replicas
        estimates[key] = frequency
        exact[key] = p
        z_scores[key] = z_score(frequency, p, binomial_std_error(p, replicas))

    report = ValidationReport(name=instance.name, replicas=replicas, horizon=horizon, estimates=estimates,
                              exact=exact, z_scores=z_scores, limit=limit)
    if not report.passed:
        logger.warning("{0}: {1} is {2:.2f} standard errors off".format(instance.name, *report.worst))
    return report


def random_distribution(rng: np.random.Generator, jump_range: int = 2, nonnegative: bool = True):
    """
    A random law on [-jump_range, jump_range]; reflected when its mean would be negative
    """
    weights = rng.dirichlet(np.ones(2 * jump_range + 1))
    offsets = range(-jump_range, jump_range + 1)
    if nonnegative and float(np.dot(weights, offsets)) < 0:
        weights = weights[::-1]
    return make_distribution(zip(offsets, weights.tolist()))


def random_background(rng: np.random.Generator, jump_range: int = 2):
    """
    A symmetric, hence zero-mean, law on [-jump_range, jump_range] with mass at +-1
    """
    weights = rng.uniform(0.1, 1.0, size=jump_range + 1)
    atoms = [(0, weights[0])]
    for z in range(1, jump_range + 1):
        atoms += [(-z, weights[z] / 2), (z, weights[z] / 2)]
    total = math.fsum(p for _, p in atoms)
    return make_distribution((z, p / total) for z, p in atoms)


def random_instance(rng: np.random.Generator, width: int, M: int, jump_range: int = 2,
                    name: str = None) -> OracleInstance:
    """
    Interval of `width` interior sites with M random non-negative-drift cookies per site
    """
    if width < 1 or M < 1:
        raise ValueError("width and M must be positive")
    background = random_background(rng, jump_range)
    start_offset = int(rng.integers(width))
    down = -1 - start_offset
    stacks = tuple(CookieStack(cookies=tuple(random_distribution(rng, jump_range) for _ in range(M)),
                               background=background) for _ in range(width))
    return OracleInstance(down=down, up=down + width + 1, start=0, stacks=stacks, background=background,
                          name=name)


def regression_suite(count: int = 20, seed: int = None, max_width: int = 5, max_M: int = 2,
                     jump_range: int = 2) -> list:
    """
    Reproducible list of random instances, each drawn from its own stream
    """
    seed = settings.SEED if seed is None else seed
    suite = []
    for i in range(count):
        rng = seeding.get_rng(seed, seeding.INSTANCE, i)
        width = int(rng.integers(1, max_width + 1))
        M = int(rng.integers(1, max_M + 1))
        suite.append(random_instance(rng, width, M, jump_range, name="random_{0:02d}".format(i)))
    return suite


def _validate_one(instance, replicas, seed, stride):
    analysis = solve_exit(instance)
    return analysis, cross_validate(instance, replicas, seed, stride, threads=1, analysis=analysis)


def validate_suite(instances: list, replicas: int, seed: int = None, stride: int = 1, threads: int = None) -> list:
    """
    Solve and cross-validate every instance, one instance per worker
    :return: list of (ExitAnalysis, ValidationReport) in instance order
    """
    seed = settings.SEED if seed is None else seed
    return run_items(_validate_one, instances, replicas, seed, stride, threads=threads)
