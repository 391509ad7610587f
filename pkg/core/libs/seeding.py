"""
Reproducible random streams.

Every stream is derived from a master seed through numpy's SeedSequence spawn keys,
so a stream is a pure function of (master seed, purpose, indices) and never of
the worker that happens to consume it.
"""
import numpy as np

# spawn-key namespaces
WALK = 0
ENVIRONMENT = 1
SITE = 2
INSTANCE = 3

BUFFER_SIZE = 4096


def zigzag(x: int) -> int:
    """
    Map an integer site onto a non-negative spawn key (0, -1, 1, -2, 2, ... -> 0, 1, 2, 3, 4, ...)
    """
    return 2 * x if x >= 0 else -2 * x - 1


def seed_sequence(master_seed: int, *key) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in key))


def get_rng(master_seed: int, *key) -> np.random.Generator:
    """
    Get a numpy generator for one stream
    :param master_seed: experiment seed
    :param key: namespace and indices identifying the stream
    :return: numpy Generator instance
    """
    return np.random.default_rng(seed_sequence(master_seed, *key))


def replica_key(replica: int, stride: int = 1) -> int:
    return replica * stride


def site_uniform(environment_seed: int, site: int) -> float:
    """
    One uniform in [0, 1) attached to a site, identical every time it is asked for
    """
    state = seed_sequence(environment_seed, SITE, zigzag(site)).generate_state(1, dtype=np.uint64)[0]
    return float(state >> np.uint64(11)) * (1.0 / 9007199254740992.0)


def environment_seed(master_seed: int, replica: int, stride: int = 1) -> int:
    """
    Seed of the environment used by one replica
    """
    state = seed_sequence(master_seed, ENVIRONMENT, replica_key(replica, stride)).generate_state(1, dtype=np.uint64)[0]
    return int(state)


class UniformStream:
    """
    Buffered uniform draws from a numpy generator. Drawing a block at a time is much
    faster than single calls; the sequence of values is the same as the generator's.
    """

    def __init__(self, generator: np.random.Generator, buffer_size: int = BUFFER_SIZE):
        self.generator = generator
        self.buffer_size = buffer_size
        self._buffer = []
        self._index = 0

    def random(self) -> float:
        if self._index >= len(self._buffer):
            self._buffer = self.generator.random(self.buffer_size).tolist()
            self._index = 0
        value = self._buffer[self._index]
        self._index += 1
        return value


def walk_stream(master_seed: int, replica: int, stride: int = 1) -> UniformStream:
    return UniformStream(get_rng(master_seed, WALK, replica_key(replica, stride)))
