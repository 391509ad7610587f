import logging

from joblib import Parallel, delayed

import settings

logger = logging.getLogger('cookiewalk.libs.parallel')


def make_blocks(replicas: int, block_size: int = None) -> list:
    """
    Split replica indices into fixed half-open blocks. The split depends only on the
    replica count and block size, never on the worker count.
    """
    block_size = block_size or settings.BLOCK_SIZE
    return [(start, min(start + block_size, replicas)) for start in range(0, replicas, block_size)]


def run_blocks(task, replicas: int, *args, threads: int = None, block_size: int = None, **kwargs) -> list:
    """
    Run task(*args, start, stop, **kwargs) over every replica block
    :param task: module-level function (it is pickled for worker processes)
    :param replicas: total number of replicas
    :param threads: worker count, defaults to settings.THREADS
    :return: list of task results in block order
    """
    if replicas < 1:
        raise ValueError("need at least one replica")
    threads = threads or settings.THREADS
    blocks = make_blocks(replicas, block_size)
    logger.debug("{0} replicas in {1} block(s) on {2} worker(s)".format(replicas, len(blocks), threads))
    if threads == 1 or len(blocks) == 1:
        return [task(*args, start, stop, **kwargs) for start, stop in blocks]
    return Parallel(n_jobs=threads)(delayed(task)(*args, start, stop, **kwargs) for start, stop in blocks)


def run_items(task, items: list, *args, threads: int = None, **kwargs) -> list:
    """
    Run task(item, *args, **kwargs) for every item, results in item order
    """
    threads = threads or settings.THREADS
    if threads == 1 or len(items) <= 1:
        return [task(item, *args, **kwargs) for item in items]
    return Parallel(n_jobs=threads)(delayed(task)(item, *args, **kwargs) for item in items)
