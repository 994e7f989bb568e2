import logging
import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np


log = logging.getLogger(__name__)

# purpose tags mixed into every stream key
STREAM_SIMULATE = 1
STREAM_WORLD = 2
STREAM_RRSET = 3
STREAM_LOWER_BOUND = 4
STREAM_BASELINE = 5
STREAM_SYNTHETIC = 6
STREAM_GRAPH = 7
STREAM_BOOST = 8
STREAM_FIXED_SEEDS = 9

BUFFER_SIZE = 1024


class RandomStream(object):
    """Buffered uniform draws from a counter-based generator

    Every consumer in the package draws its randomness through ``random()``,
    so a stream keyed by the same integers always replays the same decisions.
    """

    def __init__(self, *key):
        if any(int(k) < 0 for k in key):
            raise ValueError("random stream keys must be non-negative: %r" % (key,))
        self.key = tuple(int(k) for k in key)
        seq = np.random.SeedSequence(list(self.key))
        self._gen = np.random.Generator(np.random.Philox(seq))
        self._buf = []
        self._pos = 0

    def random(self):
        """next uniform draw in [0, 1)"""
        if self._pos == len(self._buf):
            self._buf = self._gen.random(BUFFER_SIZE).tolist()
            self._pos = 0
        x = self._buf[self._pos]
        self._pos += 1
        return x

    def bernoulli(self, p):
        if p >= 1.0:
            return True
        if p <= 0.0:
            return False
        return self.random() < p

    def integers(self, n):
        """uniform integer in [0, n)"""
        return min(int(self.random() * n), n - 1)

    def permutation(self, items):
        """Fisher-Yates shuffle of a copy of items"""
        out = list(items)
        for i in range(len(out) - 1, 0, -1):
            j = self.integers(i + 1)
            out[i], out[j] = out[j], out[i]
        return out

    def sample(self, population, k):
        """k distinct elements drawn without replacement, in draw order"""
        pool = list(population)
        if k > len(pool):
            raise ValueError("cannot sample %d of %d elements" % (k, len(pool)))
        for i in range(k):
            j = i + self.integers(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]

    @property
    def generator(self):
        """the underlying numpy generator, for vectorized draws"""
        return self._gen


def chunk_ranges(total, chunks):
    """Split range(total) into at most ``chunks`` contiguous (start, stop) pairs

    :param total: number of items
    :param chunks: number of pieces wanted

    :return: list of (start, stop)
    """
    chunks = max(1, min(chunks, total))
    if total == 0:
        return []
    bounds = np.linspace(0, total, chunks + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def parallel_map(func, tasks, workers=1):
    """Map func over tasks, in order, optionally on a process pool

    func and the tasks must be picklable when workers > 1.
    """
    tasks = list(tasks)
    if workers is None or workers <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    log.debug("dispatching %d tasks to %d workers", len(tasks), workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, tasks))


def mean_stderr(values):
    """Sample mean and standard error of the mean

    Args:
        values (array-like): observations

    Returns:
        tuple: (mean, stderr); stderr is 0 for fewer than two observations
    """
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return 0.0, 0.0
    mean = float(arr.mean())
    if arr.size < 2:
        return mean, 0.0
    return mean, float(arr.std(ddof=1) / math.sqrt(arr.size))


def sig(x, digits=6):
    """format a number with the given significant digits"""
    if x is None:
        return ""
    return "{:.{}g}".format(x, digits)
