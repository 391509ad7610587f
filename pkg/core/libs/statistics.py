import math
from dataclasses import dataclass

from scipy.stats import norm


@dataclass
class Summary:
    """
    Running count / mean / sum of squared deviations. Two summaries merge exactly
    the same way regardless of which worker produced them.
    """
    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    minimum: float = math.inf
    maximum: float = -math.inf

    def add(self, value: float) -> None:
        self.count += 1
        delta = value - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (value - self.mean)
        if value < self.minimum:
            self.minimum = value
        if value > self.maximum:
            self.maximum = value

    def merge(self, other: "Summary") -> "Summary":
        if other.count == 0:
            return Summary(self.count, self.mean, self.m2, self.minimum, self.maximum)
        if self.count == 0:
            return Summary(other.count, other.mean, other.m2, other.minimum, other.maximum)
        count = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / count
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / count
        return Summary(count, mean, m2, min(self.minimum, other.minimum), max(self.maximum, other.maximum))

    @property
    def variance(self) -> float:
        if self.count < 2:
            return 0.0
        return self.m2 / (self.count - 1)

    @property
    def std_error(self) -> float:
        if self.count < 2:
            return 0.0
        return math.sqrt(self.variance / self.count)

    def to_json(self) -> dict:
        return {"count": self.count, "mean": self.mean, "std_error": self.std_error}


def merge_all(summaries) -> Summary:
    total = Summary()
    for summary in summaries:
        total = total.merge(summary)
    return total


def z_score(estimate: float, expected: float, std_error: float) -> float:
    """
    Standardized difference. A zero standard error gives 0 for exact agreement and
    +-inf otherwise.
    """
    difference = estimate - expected
    if std_error > 0:
        return difference / std_error
    if abs(difference) <= 1e-12 * max(1.0, abs(expected)):
        return 0.0
    return math.copysign(math.inf, difference)


def binomial_std_error(p: float, n: int) -> float:
    if n <= 0:
        return math.inf
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple:
    """
    Wilson score interval for a binomial proportion
    :return: (low, high)
    """
    if trials <= 0:
        return 0.0, 1.0
    z = norm.ppf(0.5 + confidence / 2.0)
    p = successes / trials
    denominator = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denominator
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4 * trials * trials)) / denominator
    low = 0.0 if successes == 0 else max(0.0, centre - half)
    high = 1.0 if successes == trials else min(1.0, centre + half)
    return low, high
