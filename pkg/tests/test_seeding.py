import numpy as np

from libs import seeding


def test_zigzag():
    assert [seeding.zigzag(x) for x in (0, -1, 1, -2, 2)] == [0, 1, 2, 3, 4]


def test_site_uniform_is_a_pure_function():
    values = [seeding.site_uniform(99, x) for x in range(-50, 50)]
    assert values == [seeding.site_uniform(99, x) for x in range(-50, 50)]
    assert all(0.0 <= u < 1.0 for u in values)
    assert len(set(values)) == len(values)


def test_environment_seeds_differ_by_replica():
    seeds = {seeding.environment_seed(7, replica) for replica in range(100)}
    assert len(seeds) == 100


def test_stride_spaces_replica_keys():
    assert seeding.environment_seed(7, 3, stride=2) == seeding.environment_seed(7, 6)


def test_uniform_stream_follows_the_generator():
    stream = seeding.UniformStream(np.random.default_rng(3), buffer_size=8)
    drawn = [stream.random() for _ in range(20)]
    np.testing.assert_array_equal(drawn, np.random.default_rng(3).random(24)[:20])


def test_walk_streams():
    a = seeding.walk_stream(5, 0)
    b = seeding.walk_stream(5, 0)
    c = seeding.walk_stream(5, 1)
    first = [a.random() for _ in range(10)]
    assert first == [b.random() for _ in range(10)]
    assert first != [c.random() for _ in range(10)]
