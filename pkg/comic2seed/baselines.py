"""Reference seed selection strategies"""
import heapq
import logging
from collections import namedtuple
from functools import partial

import numpy as np
from tqdm import tqdm

from comic2seed.gaps import SELFINFMAX, check_problem, selfinfmax_compatible
from comic2seed.model import check_probs
from comic2seed.tim import TimParams, vanilla_ic_order
from comic2seed.utils import RandomStream, STREAM_BASELINE, chunk_ranges, parallel_map
from comic2seed.world import deterministic_cascade, sample_world


log = logging.getLogger(__name__)

METHODS = ("high_degree", "page_rank", "random", "greedy_mc", "vanilla_ic", "copying")


class BaselineError(ValueError):
    """Baseline request is invalid"""


class BaselineSpec(namedtuple("BaselineSpec", ["method", "damping", "iterations", "mc_iters"])):
    __slots__ = ()

    def __new__(cls, method, damping=0.85, iterations=100, mc_iters=1000):
        if method not in METHODS:
            raise BaselineError("unknown baseline %r, choose from %s" % (method, ", ".join(METHODS)))
        if not 0.0 < damping < 1.0:
            raise BaselineError("damping must lie in (0, 1), got %r" % damping)
        if iterations < 1 or mc_iters < 1:
            raise BaselineError("iterations and mc_iters must be positive")
        return super(BaselineSpec, cls).__new__(cls, method, float(damping), int(iterations), int(mc_iters))


def _top(scores, k, exclude=()):
    """k best nodes by score, ties by smaller id"""
    scores = np.asarray(scores, dtype=float)
    order = np.lexsort((np.arange(len(scores)), -scores))
    banned = set(exclude)
    return [int(v) for v in order if v not in banned][:k]


def high_degree(g, k, exclude=()):
    return _top(g.out_degree(), k, exclude)


def page_rank_scores(g, damping=0.85, iterations=100):
    """PageRank with influence flowing against the edges

    A node collects rank from the nodes it points to, so influential nodes
    with many out-edges score high.
    """
    n = g.n
    if n == 0:
        return np.zeros(0)
    src = np.asarray(g.src, dtype=np.int64)
    dst = np.asarray(g.dst, dtype=np.int64)
    fan = g.in_degree().astype(float)
    dangling = fan == 0
    x = np.full(n, 1.0 / n)
    for _ in range(iterations):
        share = np.divide(x, fan, out=np.zeros(n), where=~dangling)
        flow = np.bincount(src, weights=share[dst], minlength=n)
        x = (1.0 - damping) / n + damping * (flow + x[dangling].sum() / n)
    return x


def page_rank(g, k, damping=0.85, iterations=100, exclude=()):
    return _top(page_rank_scores(g, damping, iterations), k, exclude)


def random_seeds(g, k, master_seed, exclude=(), tag=STREAM_BASELINE):
    banned = set(exclude)
    pool = [v for v in range(g.n) if v not in banned]
    return RandomStream(master_seed, tag, 0).sample(pool, min(k, len(pool)))


def copying(g, fixed_seeds, k):
    """The opposite item's seeds in their order, padded by out-degree"""
    fixed_seeds = list(fixed_seeds)
    chosen = fixed_seeds[:k]
    if len(chosen) < k:
        chosen += high_degree(g, k - len(chosen), exclude=chosen)
    return chosen


def _adopted_total(worlds, q, problem, fixed_seeds, seeds):
    total = 0
    for w in worlds:
        if problem == SELFINFMAX:
            total += len(deterministic_cascade(w, q, seeds, fixed_seeds).a_adopted)
        else:
            total += len(deterministic_cascade(w, q, fixed_seeds, seeds).a_adopted)
    return total


def _totals_chunk(candidates, worlds, q, problem, fixed_seeds, chosen):
    return [_adopted_total(worlds, q, problem, fixed_seeds, chosen + [v]) for v in candidates]


def greedy_mc(g, q, problem, fixed_seeds, k, mc_iters, master_seed, exclude=(), lazy=None, workers=1):
    """Greedy maximization of the A-spread (or boost) over sampled worlds

    All evaluations share the same ``mc_iters`` possible worlds, so the
    estimated objective is one fixed set function. Lazy (CELF) evaluation is
    used when that function is submodular, where it picks exactly what plain
    greedy picks.
    """
    check_problem(problem)
    check_probs(g)
    fixed_seeds = frozenset(fixed_seeds)
    if lazy is None:
        lazy = problem == SELFINFMAX and selfinfmax_compatible(q)
    worlds = [sample_world(g, q, RandomStream(master_seed, STREAM_BASELINE, i + 1)) for i in range(mc_iters)]
    banned = set(exclude)
    candidates = [v for v in range(g.n) if v not in banned]
    k = min(k, len(candidates))
    chosen = []
    current = _adopted_total(worlds, q, problem, fixed_seeds, [])
    if lazy:
        heap = [(-(_adopted_total(worlds, q, problem, fixed_seeds, [v]) - current), v, 0) for v in candidates]
        heapq.heapify(heap)
        while len(chosen) < k:
            neg_gain, v, stamp = heapq.heappop(heap)
            if stamp == len(chosen):
                chosen.append(v)
                current -= neg_gain
                continue
            gain = _adopted_total(worlds, q, problem, fixed_seeds, chosen + [v]) - current
            heapq.heappush(heap, (-gain, v, len(chosen)))
    else:
        remaining = list(candidates)
        for _ in tqdm(range(k), desc="greedy", disable=None, leave=False):
            task = partial(_totals_chunk, worlds=worlds, q=q, problem=problem,
                           fixed_seeds=fixed_seeds, chosen=chosen)
            pieces = [remaining[a:b] for a, b in chunk_ranges(len(remaining), max(1, workers))]
            totals = [t for part in parallel_map(task, pieces, workers) for t in part]
            best = int(np.argmax(totals))
            chosen.append(remaining.pop(best))
            current = totals[best]
    log.debug("greedy_mc picked %s", chosen)
    return chosen


def select_baseline(spec, g, q, problem, fixed_seeds, k, master_seed, params=None,
                    exclude=(), workers=1):
    """Seeds chosen by one baseline method

    Args:
        spec (BaselineSpec): method and its parameters
        fixed_seeds (list): seeds of the opposite item, in selection order
        params (TimParams): epsilon and ell for vanilla_ic

    Returns:
        list: min(k, n) distinct nodes
    """
    check_problem(problem)
    if k > g.n:
        raise BaselineError("k=%d exceeds the %d nodes" % (k, g.n))
    method = spec.method
    if method == "high_degree":
        return high_degree(g, k, exclude)
    if method == "page_rank":
        return page_rank(g, k, spec.damping, spec.iterations, exclude)
    if method == "random":
        return random_seeds(g, k, master_seed, exclude)
    if method == "greedy_mc":
        return greedy_mc(g, q, problem, fixed_seeds, k, spec.mc_iters, master_seed, exclude, workers=workers)
    if method == "vanilla_ic":
        params = params or TimParams(k)
        return vanilla_ic_order(g, k, params, master_seed, workers)
    if k > 0 and not fixed_seeds:
        raise BaselineError("copying needs the opposite item's seeds")
    return copying(g, fixed_seeds, k)
