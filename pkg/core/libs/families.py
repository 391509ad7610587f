"""
Bundled environment laws: the one-parameter families used by sweeps and the
left-trap environment whose walk escapes to -infinity with positive probability
although every cookie has zero drift.
"""
import logging
import math

from libs.cookie_env import (CookieStack, DeterministicGenerator, EnvironmentLaw, SiteTableGenerator,
                             background_stack)
from libs.distributions import make_distribution, point_mass

logger = logging.getLogger('cookiewalk.libs.families')


def symmetric_background():
    return make_distribution([(-1, 0.5), (1, 0.5)])


def no_cookie_law(background=None, M: int = 1, master_seed: int = 0) -> EnvironmentLaw:
    background = background or symmetric_background()
    return EnvironmentLaw(M=M, background=background,
                          generator=DeterministicGenerator(background_stack(background, M)),
                          master_seed=master_seed, name="no_cookies")


def deterministic_law(cookies, background=None, master_seed: int = 0, name: str = None) -> EnvironmentLaw:
    """
    The same cookie stack at every site
    :param cookies: list of JumpDistribution, one per cookie
    """
    background = background or symmetric_background()
    stack = CookieStack(cookies=tuple(cookies), background=background)
    return EnvironmentLaw(M=len(stack.cookies), background=background,
                          generator=DeterministicGenerator(stack), master_seed=master_seed, name=name)


def point_mass_law(z: int = 1, M: int = 1, background=None, master_seed: int = 0) -> EnvironmentLaw:
    """
    M cookies per site, each a point mass at z. With z = 1 the walk marches right deterministically.
    """
    return deterministic_law([point_mass(z)] * M, background, master_seed, name="point_mass_{0}".format(z))


def theta_law(theta: float, background=None, master_seed: int = 0) -> EnvironmentLaw:
    """
    One cookie per site jumping +3 with probability theta and -1 otherwise; delta = 4*theta - 1
    """
    cookie = make_distribution([(-1, 1.0 - theta), (3, theta)])
    return deterministic_law([cookie], background, master_seed, name="theta={0:g}".format(theta))


def nearest_neighbor_law(p: float, M: int = 1, background=None, master_seed: int = 0) -> EnvironmentLaw:
    """
    M cookies per site, each stepping right with probability p; delta = M * (2p - 1)
    """
    cookie = make_distribution([(-1, 1.0 - p), (1, p)])
    return deterministic_law([cookie] * M, background, master_seed, name="nearest_neighbor_p={0:g}".format(p))


def first_visit_law(jump_atoms, background=None, master_seed: int = 0) -> EnvironmentLaw:
    """
    First visit to a site jumps by W, every later visit is a background step; delta = E[W]
    """
    return deterministic_law([make_distribution(jump_atoms)], background, master_seed, name="first_visit")


FAMILIES = {
    "theta": theta_law,
    "nearest_neighbor": nearest_neighbor_law,
}


def get_family(name: str):
    try:
        return FAMILIES[name]
    except KeyError:
        raise KeyError("unknown family '{0}', choose from {1}".format(name, sorted(FAMILIES)))


def trap_cookie(x: int):
    k = x * x
    return make_distribution([(-1, 1.0 - 1.0 / k), (k - 1, 1.0 / k)])


def trap_law(depth: int, master_seed: int = 0) -> EnvironmentLaw:
    """
    Zero-drift cookies at sites -depth..-2 that usually step left and rarely jump far
    right; plain +-1 steps everywhere else.
    """
    background = symmetric_background()
    table = {x: CookieStack(cookies=(trap_cookie(x),), background=background) for x in range(-depth, -1)}
    generator = SiteTableGenerator(table, background_stack(background, 1))
    return EnvironmentLaw(M=1, background=background, generator=generator, master_seed=master_seed,
                          truncation=depth * depth - 1, name="trap_depth={0}".format(depth))


def trap_run_probability(steps: int, depth: int = None) -> float:
    """
    Exact probability that the walk in the trap environment steps left at each of its
    first `steps` steps
    """
    depth = steps + 1 if depth is None else depth
    factors = []
    for k in range(steps):
        if 2 <= k <= depth:
            factors.append(1.0 - 1.0 / (k * k))
        else:
            factors.append(0.5)
    return math.prod(factors)


def trap_limit_probability() -> float:
    """
    The steps -> infinity limit, 1/4 * prod_{k>=2} (1 - 1/k^2)
    """
    return 0.125
