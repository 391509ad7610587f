import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import settings
from libs.cookie_env import AssumptionReport, EnvironmentLaw, delta, validate_assumptions
from libs.exceptions import AssumptionError
from libs.parallel import run_blocks
from libs.statistics import wilson_interval
from libs.walk_engine import new_walk, step

BOUNDARY_TOLERANCE = 0.05

logger = logging.getLogger('cookiewalk.libs.classifier')


class Verdict(Enum):
    RECURRENT = "Recurrent"
    TRANSIENT_RIGHT = "TransientRight"
    UNDECIDED = "Undecided"
    SKIPPED = "Skipped"


def predicted_verdict(value: float) -> str:
    """
    What the recurrence criterion says for a given delta
    """
    if math.isnan(value):
        return "unknown"
    return Verdict.RECURRENT.value if value <= 1.0 else Verdict.TRANSIENT_RIGHT.value


@dataclass
class ReplicaRecord:
    """
    return_time: first step at which the walk stood below its start, None if it never did.
    failed_rungs: new-maximum ladder rungs the walk fell back below within the horizon.
    """
    return_time: int
    failed_rungs: int


def escape_run(law: EnvironmentLaw, replica: int, horizon: int, seed: int, stride: int = 1) -> ReplicaRecord:
    state, env = new_walk(law, replica, 0, seed, stride)
    return_time = None
    failed = 0
    rung = state.position
    best = state.position
    for n in range(1, horizon + 1):
        step(state, env)
        x = state.position
        if return_time is None and x < state.start:
            return_time = n
        if rung is not None and x < rung:
            failed += 1
            rung = None
        if x > best:
            best = x
            if rung is None:
                rung = x
    return ReplicaRecord(return_time, failed)


def _escape_block(law, horizon, seed, stride, first, last):
    return [escape_run(law, replica, horizon, seed, stride) for replica in range(first, last)]


@dataclass
class EscapeEstimate:
    """
    Escape probability estimates at nested horizons on one set of replicas
    """
    horizons: tuple
    replicas: int
    escapes: tuple
    confidence: float
    ladder_histogram: dict = field(default_factory=dict)

    @property
    def beta(self) -> tuple:
        return tuple(e / self.replicas for e in self.escapes)

    @property
    def return_fractions(self) -> tuple:
        return tuple(1.0 - b for b in self.beta)

    @property
    def intervals(self) -> tuple:
        return tuple(wilson_interval(e, self.replicas, self.confidence) for e in self.escapes)

    @property
    def survival_interval(self) -> tuple:
        """
        Interval for the share of replicas escaping at the next-to-top horizon that still
        escape at the top one. The top escapers are a subset of those, so this is binomial.
        """
        if len(self.escapes) < 2:
            return 0.0, 1.0
        return wilson_interval(self.escapes[-1], self.escapes[-2], self.confidence)

    @property
    def ladder_mean(self) -> float:
        total = sum(self.ladder_histogram.values())
        if not total:
            return 0.0
        return math.fsum(rungs * count for rungs, count in self.ladder_histogram.items()) / total

    @property
    def ladder_beta(self) -> float:
        """
        Escape probability from a geometric fit to the failed ladder rungs
        """
        return 1.0 / (1.0 + self.ladder_mean)

    @property
    def censored(self) -> int:
        return self.escapes[-1]

    def to_json(self) -> dict:
        return {"horizons": list(self.horizons),
                "replicas": self.replicas,
                "beta": list(self.beta),
                "ci": [list(ci) for ci in self.intervals],
                "return_fractions": list(self.return_fractions),
                "survival_ci": list(self.survival_interval),
                "ladder_histogram": {str(rungs): count for rungs, count in sorted(self.ladder_histogram.items())},
                "ladder_mean": self.ladder_mean,
                "ladder_beta": self.ladder_beta}


def estimate_escape_probability(law: EnvironmentLaw, horizons, replicas: int, seed: int = None, stride: int = 1,
                                threads: int = None, confidence: float = None) -> EscapeEstimate:
    """
    Fraction of replicas that never step below the start within each horizon
    :param horizons: strictly increasing horizons, all evaluated on the same replicas
    :return: EscapeEstimate; beta is non-increasing in the horizon
    """
    horizons = tuple(int(h) for h in horizons)
    if not horizons or any(b <= a for a, b in zip(horizons, horizons[1:])):
        raise ValueError("horizons must be a non-empty strictly increasing sequence")
    seed = law.master_seed if seed is None else seed
    confidence = settings.CONFIDENCE if confidence is None else confidence
    records = [record for block in run_blocks(_escape_block, replicas, law, horizons[-1], seed, stride,
                                              threads=threads)
               for record in block]
    escapes = tuple(sum(1 for r in records if r.return_time is None or r.return_time > h) for h in horizons)
    ladder = {}
    for record in records:
        ladder[record.failed_rungs] = ladder.get(record.failed_rungs, 0) + 1
    estimate = EscapeEstimate(horizons=horizons, replicas=replicas, escapes=escapes, confidence=confidence,
                              ladder_histogram=dict(sorted(ladder.items())))
    logger.debug("{0}: beta {1}".format(law.name, ", ".join("{0:.4f}".format(b) for b in estimate.beta)))
    return estimate


@dataclass
class ClassificationResult:
    verdict: Verdict
    delta: float
    prediction: str
    boundary: bool
    estimate: EscapeEstimate
    report: AssumptionReport = field(repr=False, default=None)

    def to_json(self) -> dict:
        return {"verdict": self.verdict.value,
                "delta": self.delta,
                "prediction": self.prediction,
                "boundary": self.boundary,
                "escape": self.estimate.to_json()}


def decide(estimate: EscapeEstimate) -> Verdict:
    """
    TransientRight: the lower confidence bound on beta clears the floor at the top two horizons
    and beta drops by at most the stability tolerance between them.
    Recurrent: almost every replica returned and the upper bound on beta is tiny, or beta
    is still decaying: of the replicas escaping at the next-to-top horizon, at most
    1 - RECURRENT_DECAY (upper confidence bound) still escape at the top one.
    """
    intervals = estimate.intervals
    beta = estimate.beta
    top = intervals[-2:]
    if all(low >= settings.TRANSIENT_BETA_FLOOR for low, _ in top):
        if len(beta) < 2 or beta[-2] - beta[-1] <= settings.STABILITY_TOLERANCE * beta[-2]:
            return Verdict.TRANSIENT_RIGHT
    if (estimate.return_fractions[-1] >= settings.RETURN_THRESHOLD
            and intervals[-1][1] < settings.RECURRENT_BETA_CEILING):
        return Verdict.RECURRENT
    if len(beta) >= 2 and estimate.survival_interval[1] <= 1.0 - settings.RECURRENT_DECAY:
        return Verdict.RECURRENT
    return Verdict.UNDECIDED


def classify(law: EnvironmentLaw, horizons=None, replicas: int = None, seed: int = None, stride: int = 1,
             threads: int = None) -> ClassificationResult:
    """
    Statistical recurrence / transience verdict for a law
    :raise AssumptionError: when the law fails validate_assumptions
    """
    report = validate_assumptions(law)
    if not report.passed:
        raise AssumptionError("law '{0}' fails {1}".format(
            law.name, ", ".join(check.name for check in report.failures())), report)
    horizons = horizons or settings.HORIZONS
    replicas = replicas or settings.REPLICAS
    value = delta(law)
    estimate = estimate_escape_probability(law, horizons, replicas, seed, stride, threads)
    verdict = decide(estimate)
    boundary = abs(value - 1.0) < BOUNDARY_TOLERANCE
    if boundary:
        logger.info("delta={0:g} is at the recurrence boundary; the verdict cannot be certified".format(value))
    return ClassificationResult(verdict=verdict, delta=value, prediction=predicted_verdict(value),
                                boundary=boundary, estimate=estimate, report=report)


@dataclass
class SweepRow:
    parameter: float
    delta: float
    verdict: Verdict
    estimate: EscapeEstimate = None
    boundary: bool = False
    reason: str = ""

    def cells(self, horizons: tuple) -> list:
        if self.estimate is None:
            empty = [""] * (3 + len(horizons))
            return [self.parameter, self.delta] + empty + [self.verdict.value, "", self.boundary, self.reason]
        low, high = self.estimate.intervals[-1]
        return ([self.parameter, self.delta, self.estimate.beta[-1], low, high]
                + list(self.estimate.return_fractions)
                + [self.verdict.value, self.estimate.censored, self.boundary, self.reason])


@dataclass
class SweepResult:
    rows: list
    horizons: tuple

    @property
    def header(self) -> list:
        return (["parameter", "delta", "beta_hat", "beta_ci_lo", "beta_ci_hi"]
                + ["return_frac_h{0}".format(k + 1) for k in range(len(self.horizons))]
                + ["verdict", "censored_count", "boundary", "reason"])

    @property
    def skipped(self) -> list:
        return [row for row in self.rows if row.verdict is Verdict.SKIPPED]

    @property
    def monotone_in_delta(self) -> bool:
        """
        Whether beta at the top horizon is non-decreasing in delta over the simulated points
        """
        points = sorted((row.delta, row.estimate.beta[-1]) for row in self.rows if row.estimate is not None)
        return all(b <= c for (_, b), (_, c) in zip(points, points[1:]))

    def table(self) -> list:
        return [row.cells(self.horizons) for row in self.rows]


def delta_sweep(family, grid, horizons=None, replicas: int = None, seed: int = None, stride: int = 1,
                threads: int = None) -> SweepResult:
    """
    Classify family(parameter) for every grid value. Points failing the assumptions are
    skipped with the failing checks as reason.
    :param family: callable parameter -> EnvironmentLaw
    """
    horizons = tuple(horizons or settings.HORIZONS)
    seed = settings.SEED if seed is None else seed
    rows = []
    for parameter in grid:
        law = family(parameter).with_seed(seed)
        value = delta(law)
        try:
            result = classify(law, horizons, replicas, seed, stride, threads)
        except AssumptionError as error:
            reason = "; ".join("{0}: {1}".format(check.name, check.detail) for check in error.report.failures())
            logger.warning("skipping {0}={1:g}: {2}".format(law.name, parameter, reason))
            rows.append(SweepRow(parameter=parameter, delta=value, verdict=Verdict.SKIPPED, reason=reason))
            continue
        logger.info("{0}: delta={1:g} verdict {2}".format(law.name, value, result.verdict.value))
        rows.append(SweepRow(parameter=parameter, delta=value, verdict=result.verdict, estimate=result.estimate,
                             boundary=result.boundary))
    sweep = SweepResult(rows=rows, horizons=horizons)
    if not sweep.monotone_in_delta:
        logger.info("escape estimates are not monotone in delta across the grid")
    return sweep
