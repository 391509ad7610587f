import bisect
import logging
import math
import sys
from dataclasses import dataclass, field
from functools import reduce

from libs.exceptions import DistributionError

SUM_TOLERANCE = 1e-9

logger = logging.getLogger('cookiewalk.libs.distributions')


@dataclass(frozen=True)
class JumpDistribution:
    """
    A finitely supported probability mass function on the integers.
    Build these with make_distribution(), which sorts, merges and normalizes.
    """
    atoms: tuple
    mean: float
    cumulative: tuple = field(repr=False, compare=False)

    @property
    def offsets(self) -> tuple:
        return tuple(z for z, _ in self.atoms)

    @property
    def probabilities(self) -> tuple:
        return tuple(p for _, p in self.atoms)

    @property
    def min_offset(self) -> int:
        return self.atoms[0][0]

    @property
    def max_offset(self) -> int:
        return self.atoms[-1][0]

    def probability(self, z: int) -> float:
        for offset, p in self.atoms:
            if offset == z:
                return p
        return 0.0

    def mass(self, low=None, high=None) -> float:
        """
        Probability of the closed range [low, high]; None leaves a side open
        """
        return math.fsum(p for z, p in self.atoms
                         if (low is None or z >= low) and (high is None or z <= high))

    def absolute_moment(self) -> float:
        return math.fsum(abs(z) * p for z, p in self.atoms)

    def is_point_mass(self) -> bool:
        return len(self.atoms) == 1

    def to_json(self) -> list:
        return [[z, p] for z, p in self.atoms]

    def __len__(self):
        return len(self.atoms)


def _normalize(offsets: list, probs: list) -> list:
    total = math.fsum(probs)
    if abs(total - 1.0) > 4 * sys.float_info.epsilon:
        probs = [p / total for p in probs]
    # the largest atom absorbs the rounding residue; recomputing it is a fixed point
    if len(probs) > 1:
        largest = max(range(len(probs)), key=lambda i: probs[i])
        probs[largest] = 1.0 - math.fsum(p for i, p in enumerate(probs) if i != largest)
    else:
        probs = [1.0]
    return list(zip(offsets, probs))


def make_distribution(atoms) -> JumpDistribution:
    """
    Build a jump distribution from (offset, probability) pairs
    :param atoms: iterable of (integer offset, probability)
    :return: JumpDistribution sorted by offset with duplicate offsets merged
    """
    atoms = list(atoms)
    if not atoms:
        raise DistributionError("empty atom list")

    merged: dict = {}
    for offset, p in atoms:
        if int(offset) != offset:
            raise DistributionError("offset {0} is not an integer".format(offset))
        p = float(p)
        if p < 0 or math.isnan(p):
            raise DistributionError("negative probability {0} at offset {1}".format(p, offset))
        merged.setdefault(int(offset), []).append(p)

    offsets = sorted(merged)
    probs = [math.fsum(merged[z]) for z in offsets]
    total = math.fsum(probs)
    if abs(total - 1.0) > SUM_TOLERANCE:
        raise DistributionError("probabilities sum to {0!r}, not 1".format(total))

    kept = [(z, p) for z, p in zip(offsets, probs) if p > 0.0]
    if not kept:
        raise DistributionError("no atom carries positive probability")
    normalized = _normalize([z for z, _ in kept], [p for _, p in kept])

    cumulative = []
    running = 0.0
    for _, p in normalized:
        running += p
        cumulative.append(running)
    cumulative[-1] = 1.0

    mean = math.fsum(z * p for z, p in normalized)
    return JumpDistribution(atoms=tuple(normalized), mean=mean, cumulative=tuple(cumulative))


def point_mass(z: int) -> JumpDistribution:
    return make_distribution([(z, 1.0)])


def sample(dist: JumpDistribution, rng) -> int:
    """
    Draw one offset by inverting the cumulative table
    :param dist: distribution to sample
    :param rng: stream with a random() method returning floats in [0, 1)
    :return: sampled offset
    """
    if len(dist.atoms) == 1:
        return dist.atoms[0][0]
    index = bisect.bisect_right(dist.cumulative, rng.random())
    return dist.atoms[index][0]


def support_span_gcd(dist: JumpDistribution) -> int:
    """
    gcd of the pairwise differences of the support. 1 means the support does not sit
    on a proper coset of a sublattice.
    """
    if len(dist.atoms) < 2:
        raise DistributionError("span of a single-atom distribution is undefined")
    offsets = dist.offsets
    return reduce(math.gcd, (z - offsets[0] for z in offsets[1:]))


def lattice_span(dist: JumpDistribution) -> int:
    """
    gcd of the steps reachable from the origin, i.e. of {0} together with the support
    """
    with_origin = make_distribution([(0, 0.5)] + [(z, 0.5 * p) for z, p in dist.atoms])
    if len(with_origin) < 2:
        return 0
    return support_span_gcd(with_origin)


def distribution_from_json(data) -> JumpDistribution:
    """
    Parse a JSON array of [offset, probability] pairs
    """
    try:
        return make_distribution((pair[0], pair[1]) for pair in data)
    except (TypeError, IndexError, KeyError) as error:
        raise DistributionError("expected a list of [offset, probability] pairs: {0}".format(error))
