import bisect
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

from libs import seeding
from libs.distributions import JumpDistribution, distribution_from_json, lattice_span
from libs.exceptions import ConfigError, DistributionError

MEAN_TOLERANCE = 1e-12

logger = logging.getLogger('cookiewalk.libs.cookie_env')


@dataclass(frozen=True)
class CookieStack:
    """
    The M cookies at one site followed by the background law used on every later visit
    """
    cookies: tuple
    background: JumpDistribution

    @property
    def depth(self) -> int:
        return len(self.cookies)

    def law(self, j: int) -> JumpDistribution:
        """
        Step law on the j-th visit (1-based)
        """
        if j <= len(self.cookies):
            return self.cookies[j - 1]
        return self.background

    def to_json(self) -> list:
        return [cookie.to_json() for cookie in self.cookies]


def stack_drift(stack: CookieStack) -> float:
    """
    Total drift stored in the cookies of a stack
    """
    return math.fsum(cookie.mean for cookie in stack.cookies)


def stack_absolute_moment(stack: CookieStack) -> float:
    return math.fsum(cookie.absolute_moment() for cookie in stack.cookies)


def background_stack(background: JumpDistribution, M: int) -> CookieStack:
    """
    A stack whose cookies all equal the background, i.e. a site with no excitement
    """
    return CookieStack(cookies=(background,) * M, background=background)


def stack_from_json(data, background: JumpDistribution) -> CookieStack:
    return CookieStack(cookies=tuple(distribution_from_json(cookie) for cookie in data), background=background)


class StackGenerator(ABC):
    """
    Draws the cookie stack of each site. Subclasses must be pure functions of
    (environment seed, site).
    """
    kind: str = None
    iid: bool = True

    @abstractmethod
    def stack_for(self, site: int, environment_seed: int) -> CookieStack:
        pass

    @abstractmethod
    def weighted_stacks(self) -> list:
        """
        Every stack the generator can produce, with its probability under the law.
        Site-dependent generators return their table with weights None.
        """
        pass

    @abstractmethod
    def to_json(self) -> dict:
        pass


class DeterministicGenerator(StackGenerator):
    kind = "deterministic"

    def __init__(self, stack: CookieStack):
        self.stack = stack

    def stack_for(self, site, environment_seed):
        return self.stack

    def weighted_stacks(self):
        return [(1.0, self.stack)]

    def to_json(self):
        return {"type": self.kind, "stack": self.stack.to_json()}


class MixtureGenerator(StackGenerator):
    """
    Each site independently receives stack k with probability weights[k]
    """
    kind = "mixture"

    def __init__(self, stacks: list, weights: list):
        if len(stacks) != len(weights) or not stacks:
            raise DistributionError("mixture needs one weight per stack")
        if any(w < 0 for w in weights):
            raise DistributionError("mixture weights must be non-negative")
        total = math.fsum(weights)
        if abs(total - 1.0) > 1e-9:
            raise DistributionError("mixture weights sum to {0!r}, not 1".format(total))
        self.stacks = tuple(stacks)
        self.weights = tuple(w / total for w in weights)
        running = 0.0
        cumulative = []
        for w in self.weights:
            running += w
            cumulative.append(running)
        cumulative[-1] = 1.0
        self.cumulative = tuple(cumulative)

    def stack_for(self, site, environment_seed):
        u = seeding.site_uniform(environment_seed, site)
        return self.stacks[bisect.bisect_right(self.cumulative, u)]

    def weighted_stacks(self):
        return list(zip(self.weights, self.stacks))

    def to_json(self):
        return {"type": self.kind,
                "stacks": [stack.to_json() for stack in self.stacks],
                "weights": list(self.weights)}


class SiteTableGenerator(StackGenerator):
    """
    Explicit stacks at finitely many sites and a fixed default stack everywhere else
    """
    kind = "site_table"
    iid = False

    def __init__(self, table: dict, default: CookieStack):
        self.table = dict(table)
        self.default = default

    def stack_for(self, site, environment_seed):
        return self.table.get(site, self.default)

    def weighted_stacks(self):
        return [(None, stack) for stack in self.table.values()] + [(None, self.default)]

    def to_json(self):
        return {"type": self.kind,
                "sites": {str(site): stack.to_json() for site, stack in sorted(self.table.items())},
                "default": self.default.to_json()}


@dataclass(frozen=True)
class EnvironmentLaw:
    """
    The law of the cookie environment: M cookies per site drawn by the generator,
    background law afterwards.
    :param truncation: user-declared truncation point for laws that were cut down to
        finite support, reported alongside every result
    """
    M: int
    background: JumpDistribution
    generator: StackGenerator
    background_bound: int = None
    master_seed: int = 0
    truncation: int = None
    name: str = field(default=None, compare=False)

    def __post_init__(self):
        if self.M < 1:
            raise DistributionError("M must be a positive integer")
        if self.background_bound is None:
            object.__setattr__(self, "background_bound",
                               max(abs(self.background.min_offset), abs(self.background.max_offset)))
        for _, stack in self.generator.weighted_stacks():
            if stack.depth != self.M:
                raise DistributionError("stack has {0} cookies, law has M={1}".format(stack.depth, self.M))

    @property
    def max_jump_bound(self) -> int:
        bound = max(abs(self.background.min_offset), abs(self.background.max_offset))
        for _, stack in self.generator.weighted_stacks():
            for cookie in stack.cookies:
                bound = max(bound, abs(cookie.min_offset), abs(cookie.max_offset))
        return bound

    @property
    def max_right_jump(self) -> int:
        bound = self.background.max_offset
        for _, stack in self.generator.weighted_stacks():
            for cookie in stack.cookies:
                bound = max(bound, cookie.max_offset)
        return bound

    def with_seed(self, master_seed: int) -> "EnvironmentLaw":
        return EnvironmentLaw(M=self.M, background=self.background, generator=self.generator,
                              background_bound=self.background_bound, master_seed=master_seed,
                              truncation=self.truncation, name=self.name)

    def to_json(self) -> dict:
        return {"M": self.M,
                "background": self.background.to_json(),
                "generator": self.generator.to_json(),
                "background_bound": self.background_bound,
                "truncation": self.truncation,
                "seed": self.master_seed}


class RealizedEnvironment:
    """
    A cookie environment drawn from a law, realized one site at a time.
    `shift` holds the cookies removed by remove_cookies(), `consumed` the cookies
    eaten by a walk running on this environment.
    """

    def __init__(self, law: EnvironmentLaw, seed: int = None, realized: dict = None, shift: dict = None):
        self.law = law
        self.seed = law.master_seed if seed is None else seed
        # the realized cache is shared between an environment and its reductions
        self.realized: dict = {} if realized is None else realized
        self.shift: dict = dict(shift) if shift else {}
        self.consumed: dict = {}

    def realize_site(self, x: int) -> CookieStack:
        stack = self.realized.get(x)
        if stack is None:
            stack = self.law.generator.stack_for(x, self.seed)
            self.realized[x] = stack
        return stack

    def next_step_law(self, x: int, j: int) -> JumpDistribution:
        """
        Step law at site x on the j-th visit of a walk started in this environment
        """
        if j < 1:
            raise ValueError("visit index must be at least 1, got {0}".format(j))
        index = self.shift.get(x, 0) + j
        if index > self.law.M:
            return self.law.background
        return self.realize_site(x).cookies[index - 1]

    def consume(self, x: int) -> None:
        count = self.consumed.get(x, 0)
        if count < self.law.M:
            self.consumed[x] = count + 1

    def remaining(self) -> "RealizedEnvironment":
        """
        The environment left over after the cookies eaten so far
        """
        return remove_cookies(self, self.consumed)

    def cookies_left(self, x: int) -> int:
        return self.law.M - min(self.law.M, self.shift.get(x, 0))

    def remaining_drift(self, x: int) -> float:
        """
        Drift still stored at x in this environment
        """
        start = self.shift.get(x, 0)
        cookies = self.realize_site(x).cookies
        return math.fsum(cookie.mean for cookie in cookies[start:])

    def is_below(self, other: "RealizedEnvironment") -> bool:
        """
        Partial order: True when this environment is other with some cookies removed
        """
        if self.law is not other.law or self.seed != other.seed:
            return False
        return all(self.shift.get(x, 0) >= count for x, count in other.shift.items())


def remove_cookies(env: RealizedEnvironment, removed: dict) -> RealizedEnvironment:
    """
    Remove the first removed[x] cookies at every site x
    :param env: environment to reduce
    :param removed: map site -> number of cookies to remove (non-negative)
    :return: a new environment sharing env's realized sites
    """
    M = env.law.M
    shift = dict(env.shift)
    for x, count in removed.items():
        if count < 0:
            raise ValueError("cannot remove a negative number of cookies at site {0}".format(x))
        if count:
            shift[x] = min(shift.get(x, 0) + count, M)
    return RealizedEnvironment(env.law, seed=env.seed, realized=env.realized, shift=shift)


def delta(law: EnvironmentLaw) -> float:
    """
    Expected total drift of one site's cookies. Site-dependent laws have no
    single value and return nan.
    """
    if not law.generator.iid:
        return math.nan
    return math.fsum(weight * stack_drift(stack) for weight, stack in law.generator.weighted_stacks())


@dataclass
class AssumptionCheck:
    name: str
    passed: bool
    detail: str
    value: float = None


@dataclass
class AssumptionReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def get(self, name: str) -> AssumptionCheck:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def failures(self) -> list:
        return [check for check in self.checks if not check.passed]

    def to_json(self) -> dict:
        return {check.name: {"passed": check.passed, "detail": check.detail, "value": check.value}
                for check in self.checks}


def validate_assumptions(law: EnvironmentLaw) -> AssumptionReport:
    """
    Check the law against the model assumptions. Never raises.
    :return: AssumptionReport with entries A1 to A5
    """
    stacks = law.generator.weighted_stacks()
    mu = law.background
    checks = []

    negative = [(k, j + 1, cookie.mean) for k, (_, stack) in enumerate(stacks)
                for j, cookie in enumerate(stack.cookies) if cookie.mean < -MEAN_TOLERANCE]
    if negative:
        k, j, mean = negative[0]
        detail = "stack {0} cookie {1} has negative drift {2:.6g}".format(k, j, mean)
    else:
        detail = "all {0} stack(s) carry {1} non-negative cookie(s)".format(len(stacks), law.M)
    checks.append(AssumptionCheck("A1", not negative, detail))

    problems = []
    if abs(mu.mean) > MEAN_TOLERANCE:
        problems.append("background mean {0:.6g} is not zero".format(mu.mean))
    if mu.min_offset < -law.background_bound or mu.max_offset > law.background_bound:
        problems.append("background leaves [-{0}, {0}]".format(law.background_bound))
    if mu.is_point_mass():
        problems.append("background is degenerate")
    else:
        span = lattice_span(mu)
        if span != 1:
            problems.append("background span is {0}".format(span))
    checks.append(AssumptionCheck("A2", not problems, "; ".join(problems) or "bounded, aperiodic, non-degenerate"))

    if law.generator.iid:
        moment = math.fsum(weight * stack_absolute_moment(stack) for weight, stack in stacks)
    else:
        moment = max(stack_absolute_moment(stack) for _, stack in stacks)
    checks.append(AssumptionCheck("A3", math.isfinite(moment),
                                  "first absolute moment of the cookies is {0:.6g}".format(moment), moment))

    if law.generator.iid:
        checks.append(AssumptionCheck("A4", True, "sites drawn independently from one stack law"))
    else:
        checks.append(AssumptionCheck("A4", False, "stacks depend on the site"))

    no_right = [k for k, (_, stack) in enumerate(stacks) if stack.cookies[0].mass(low=1) <= 0.0]
    if law.generator.iid:
        left_weight = math.fsum(weight * math.prod(cookie.mass(high=0) for cookie in stack.cookies)
                                for weight, stack in stacks)
    else:
        left_weight = max(math.prod(cookie.mass(high=0) for cookie in stack.cookies) for _, stack in stacks)
    problems = []
    if no_right:
        problems.append("first cookie of stack {0} never jumps right".format(no_right[0]))
    if left_weight <= 0.0:
        problems.append("no stack lets every cookie jump to a non-positive offset")
    checks.append(AssumptionCheck("A5", not problems, "; ".join(problems) or "weakly elliptic", left_weight))

    report = AssumptionReport(checks)
    for check in report.failures():
        logger.info("Assumption {0} fails: {1}".format(check.name, check.detail))
    return report


def law_from_json(data: dict, master_seed: int = None) -> EnvironmentLaw:
    """
    Parse the structured law format:
    { M, background: [[z,p]...], generator: {type, ...}, background_bound, truncation, seed }
    """
    try:
        M = int(data["M"])
        background = distribution_from_json(data["background"])
        options = data["generator"]
        kind = options["type"]
    except KeyError as error:
        raise ConfigError("missing key {0}".format(error), field="law.{0}".format(error.args[0]))
    except DistributionError as error:
        raise ConfigError(str(error), field="law.background")

    try:
        if kind == "deterministic":
            generator = DeterministicGenerator(stack_from_json(options["stack"], background))
        elif kind == "mixture":
            stacks = [stack_from_json(stack, background) for stack in options["stacks"]]
            generator = MixtureGenerator(stacks, [float(w) for w in options["weights"]])
        elif kind == "site_table":
            table = {int(site): stack_from_json(stack, background) for site, stack in options["sites"].items()}
            default = options.get("default")
            default = background_stack(background, M) if default is None else stack_from_json(default, background)
            generator = SiteTableGenerator(table, default)
        else:
            raise ConfigError("unknown generator type '{0}'".format(kind), field="law.generator.type")
    except KeyError as error:
        raise ConfigError("missing key {0}".format(error), field="law.generator.{0}".format(error.args[0]))
    except DistributionError as error:
        raise ConfigError(str(error), field="law.generator")

    seed = master_seed if master_seed is not None else int(data.get("seed", 0))
    try:
        law = EnvironmentLaw(M=M, background=background, generator=generator,
                             background_bound=data.get("background_bound"),
                             master_seed=seed, truncation=data.get("truncation"),
                             name=data.get("name"))
    except DistributionError as error:
        raise ConfigError(str(error), field="law")
    if law.truncation is not None and law.max_jump_bound > law.truncation:
        raise ConfigError("a jump of size {0} exceeds the declared truncation {1}".format(
            law.max_jump_bound, law.truncation), field="law.truncation")
    return law
