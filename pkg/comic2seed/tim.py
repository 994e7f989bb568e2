"""GeneralTIM: seed selection by maximum coverage of RR-sets"""
import logging
import math
import time
from collections import Counter, namedtuple

import numpy as np
from tqdm import tqdm

from comic2seed.gaps import (
    COMPINFMAX,
    GapSet,
    SELFINFMAX,
    check_problem,
    compinfmax_compatible,
    selfinfmax_compatible,
)
from comic2seed.model import check_probs
from comic2seed.rrset import COUNTERS, DEFAULT_GENERATOR, generate_rrsets, rr_generator
from comic2seed.utils import STREAM_LOWER_BOUND, STREAM_RRSET


log = logging.getLogger(__name__)

# RR-sets generated per progress-bar tick
BATCH = 2048

TimStats = namedtuple("TimStats", ["theta", "lb"] + list(COUNTERS) + ["wall_time_ms"])


class TimParamError(ValueError):
    """GeneralTIM parameters out of range"""


class RegimeError(ValueError):
    """GAPs outside the regime the RR-set estimator is exact for"""


class TimParams(namedtuple("TimParams", ["k", "epsilon", "ell", "theta_override", "lb_override"])):
    __slots__ = ()

    def __new__(cls, k, epsilon=0.5, ell=1.0, theta_override=None, lb_override=None):
        if int(k) != k or k < 0:
            raise TimParamError("k must be a non-negative integer, got %r" % k)
        if not 0.0 < epsilon <= 1.0:
            raise TimParamError("epsilon must lie in (0, 1], got %r" % epsilon)
        if ell < 1.0:
            raise TimParamError("ell must be at least 1, got %r" % ell)
        if theta_override is not None and theta_override < 1:
            raise TimParamError("theta override must be positive, got %r" % theta_override)
        if lb_override is not None and lb_override <= 0:
            raise TimParamError("lower bound override must be positive, got %r" % lb_override)
        return super(TimParams, cls).__new__(cls, int(k), float(epsilon), float(ell), theta_override, lb_override)


class RRSetCollection(object):
    """RR-sets with an inverted index node -> ids of the sets containing it"""

    def __init__(self, n, rrsets=()):
        self.n = n
        self.sets = []
        self.index = [[] for _ in range(n)]
        self.counters = Counter()
        for rr in rrsets:
            self.add(rr)

    def add(self, rr):
        sid = len(self.sets)
        members = sorted(rr.members)
        self.sets.append(members)
        for v in members:
            self.index[v].append(sid)
        self.counters.update(rr.counters)

    @property
    def theta(self):
        return len(self.sets)

    def coverage(self, seeds):
        """number of sets hit by seeds"""
        hit = set()
        for v in seeds:
            hit.update(self.index[v])
        return len(hit)

    def estimate(self, seeds):
        """n times the fraction of sets hit by seeds"""
        if not self.sets:
            return 0.0
        return self.n * self.coverage(seeds) / float(self.theta)


def log_binomial(n, k):
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def required_theta(n, k, epsilon, ell, lower_bound):
    """Number of RR-sets for a (1-1/e-epsilon) guarantee w.p. 1-n^-ell

    theta = eps^-2 (8 + 2 eps) n (ell ln n + ln C(n,k) + ln 2) / LB
    """
    if lower_bound <= 0:
        raise TimParamError("lower bound must be positive, got %r" % lower_bound)
    if n < 1:
        raise TimParamError("graph has no nodes")
    if not 0 <= k <= n:
        raise TimParamError("k=%r outside 0..%d" % (k, n))
    lam = (8.0 + 2.0 * epsilon) * n * (ell * math.log(n) + log_binomial(n, k) + math.log(2.0))
    return int(math.ceil(lam / (epsilon ** 2 * lower_bound)))


def estimate_lower_bound(g, q, fixed_seeds, generator, k, ell, master_seed, floor=None, workers=1):
    """KPT-style lower bound of the optimal k-seed objective

    Rounds i = 1, 2, ... draw c_i RR-sets and average the coverage of a
    random size-k set, 1 - (1 - w(R)/m)^k with w(R) the in-degree mass of R.
    The first round whose average exceeds 2^-i gives n * average / 2.

    Args:
        floor (float): smallest value returned, k when None

    Returns:
        float: the lower bound
    """
    floor = float(k) if floor is None else float(floor)
    n, m = g.n, g.m
    if n < 2 or m == 0 or k == 0:
        return floor
    indeg = g.in_degree()
    rounds = max(1, int(math.log2(n)) - 1)
    per_round = 6.0 * ell * math.log(n) + 6.0 * math.log(max(math.log2(n), 1.0))
    start = 0
    for i in range(1, rounds + 1):
        count = int(math.ceil(per_round * 2 ** i))
        rrsets = generate_rrsets(
            g, q, fixed_seeds, generator, start, start + count, master_seed,
            tag=STREAM_LOWER_BOUND, workers=workers,
        )
        start += count
        kappa = [1.0 - (1.0 - indeg[list(rr.members)].sum() / float(m)) ** k for rr in rrsets]
        mean = float(np.mean(kappa)) if kappa else 0.0
        log.debug("lower bound round %d: %d sets, mean kappa %.6f", i, count, mean)
        if mean > 1.0 / 2 ** i:
            return max(n * mean / 2.0, floor)
    return floor


def greedy_max_coverage(rr, k, exclude=()):
    """Greedy maximum coverage over an RRSetCollection

    Each round picks the node in the most uncovered sets, the smallest id on
    ties. Nodes in ``exclude`` are never picked.

    :return: list of nodes in selection order, min(k, eligible nodes) long
    """
    counts = np.array([len(ids) for ids in rr.index], dtype=np.int64)
    for v in exclude:
        counts[v] = -1
    eligible = int((counts >= 0).sum())
    covered = np.zeros(rr.theta, dtype=bool)
    seeds = []
    for _ in range(min(k, eligible)):
        v = int(np.argmax(counts))
        seeds.append(v)
        counts[v] = -1
        for sid in rr.index[v]:
            if covered[sid]:
                continue
            covered[sid] = True
            for u in rr.sets[sid]:
                if counts[u] > 0:
                    counts[u] -= 1
    return seeds


def check_regime(q, problem):
    check_problem(problem)
    if problem == SELFINFMAX and not selfinfmax_compatible(q):
        raise RegimeError(
            "GeneralTIM for selfinfmax needs q_a0 <= q_ab and q_b0 = q_ba, got %s; use sandwich_select" % (q,)
        )
    if problem == COMPINFMAX and not compinfmax_compatible(q):
        raise RegimeError(
            "GeneralTIM for compinfmax needs q_a0 <= q_ab and q_ba = 1, got %s; use sandwich_select" % (q,)
        )


def general_tim(g, q, problem, fixed_seeds, params, master_seed, generator=None,
                exclude=(), workers=1):
    """Select k seeds for selfinfmax (A-seeds) or compinfmax (B-seeds)

    Args:
        g (Graph): graph with edge probabilities
        q (GapSet): GAPs in the regime the generator is exact for
        problem (str): selfinfmax or compinfmax
        fixed_seeds (iterable): seeds of the opposite item
        params (TimParams): k, epsilon, ell and optional overrides
        master_seed (int): seed of every random stream
        generator (str): rr_sim, rr_sim_plus or rr_cim
        exclude (iterable): nodes that may not be selected
        workers (int): processes for RR-set generation

    Returns:
        tuple: (seeds in selection order, TimStats)
    """
    check_regime(q, problem)
    check_probs(g)
    generator = generator or DEFAULT_GENERATOR[problem]
    rr_generator(generator, problem)
    if params.k > g.n:
        raise TimParamError("k=%d exceeds the %d nodes" % (params.k, g.n))
    fixed_seeds = frozenset(fixed_seeds)
    g.check_nodes(fixed_seeds, "fixed seed")
    began = time.perf_counter()

    if params.lb_override is not None:
        lb = float(params.lb_override)
    else:
        floor = params.k if problem == SELFINFMAX else 1.0
        lb = estimate_lower_bound(
            g, q, fixed_seeds, generator, params.k, params.ell, master_seed, floor, workers
        )
    if params.theta_override is not None:
        theta = int(params.theta_override)
    elif g.n == 0 or params.k == 0:
        theta = 0
    else:
        theta = required_theta(g.n, params.k, params.epsilon, params.ell, min(lb, g.n))
    log.info("%s with %s: LB=%.3f theta=%d", problem, generator, lb, theta)

    collection = RRSetCollection(g.n)
    with tqdm(total=theta, desc="RR-sets", disable=None, leave=False) as bar:
        for start in range(0, theta, BATCH):
            stop = min(theta, start + BATCH)
            for rr in generate_rrsets(g, q, fixed_seeds, generator, start, stop,
                                      master_seed, STREAM_RRSET, workers):
                collection.add(rr)
            bar.update(stop - start)
    seeds = greedy_max_coverage(collection, params.k, exclude)

    wall = (time.perf_counter() - began) * 1000.0
    per_set = {c: collection.counters[c] / float(theta) if theta else 0.0 for c in COUNTERS}
    stats = TimStats(theta=theta, lb=lb, wall_time_ms=wall, **per_set)
    return seeds, stats


def vanilla_ic_order(g, count, params, master_seed, workers=1):
    """Top ``count`` nodes of classic IC seed selection, in selection order"""
    ic = GapSet(1.0, 1.0, 0.0, 0.0)
    ranked = TimParams(count, params.epsilon, params.ell, params.theta_override, params.lb_override)
    seeds, _ = general_tim(g, ic, SELFINFMAX, (), ranked, master_seed, "rr_sim", workers=workers)
    return seeds
