"""Possible worlds and the exact spread oracle

A possible world fixes every random quantity of a cascade up front: edge
liveness, the thresholds alpha_A and alpha_B of every node, one permutation of
each node's in-neighbors and the seed-order coin. A node adopts an item when
its threshold lies below the GAP that applies, so a world determines the
cascade completely.

The oracle enumerates worlds lazily. The deterministic cascade is replayed and
branches each time it reads a quantity that earlier branches left undecided.
A threshold is refined into the sub-interval between two GAP boundaries, an
edge into live or blocked. Every leaf is an equivalence class whose mass is
the product of the chosen branch probabilities.
"""
import itertools
import logging
import math
from collections import namedtuple

import numpy as np

from comic2seed.gaps import A, B, COMPINFMAX, SELFINFMAX, check_problem
from comic2seed.model import Realization, check_probs, run_cascade


log = logging.getLogger(__name__)

MAX_EDGES = 20
MAX_NODES = 12
MAX_CLASSES = 2000000
TOLERANCE = 1e-12

PossibleWorld = namedtuple("PossibleWorld", ["graph", "live", "alpha_a", "alpha_b", "pi", "tau"])
EquivalenceClass = namedtuple(
    "EquivalenceClass", ["live", "alpha_ranges", "pi", "tau", "mass", "outcome"]
)
ExactSpread = namedtuple("ExactSpread", ["sigma_a", "sigma_b"])
Violation = namedtuple("Violation", ["small", "large", "element", "gain_small", "gain_large"])


class EnumerationBudgetError(ValueError):
    """Instance too large for exact enumeration"""


def sample_world(g, q, rng):
    """Draw a possible world of g from a RandomStream

    q is accepted for symmetry with the other world constructors; the
    distribution of a world does not depend on the GAPs.
    """
    live = [rng.bernoulli(p) for p in g.prob]
    alpha_a = [rng.random() for _ in range(g.n)]
    alpha_b = [rng.random() for _ in range(g.n)]
    pi = [tuple(rng.permutation(g.in_nbrs[v])) for v in range(g.n)]
    tau = [A if rng.random() < 0.5 else B for _ in range(g.n)]
    return PossibleWorld(g, live, alpha_a, alpha_b, pi, tau)


class WorldRealization(Realization):
    """Answers every question from a fixed PossibleWorld"""

    def __init__(self, world, gaps):
        self.world = world
        self.gaps = gaps
        self.alpha = (world.alpha_a, world.alpha_b)

    def edge_live(self, e):
        return self.world.live[e]

    def adopts(self, v, item, other_adopted):
        return self.alpha[item][v] < self.gaps.adopt_prob(item, other_adopted)

    def reconsiders(self, v, item):
        return self.alpha[item][v] < self.gaps.given_other(item)

    def permutation(self, v):
        return self.world.pi[v]

    def seed_first(self, v):
        return self.world.tau[v]


def deterministic_cascade(w, q, seeds_a, seeds_b, a_first=False, record_events=False):
    """Cascade of a possible world; ties follow the world's permutations"""
    return run_cascade(w.graph, q, seeds_a, seeds_b, WorldRealization(w, q), a_first, record_events)


class _Branch(Exception):
    def __init__(self, probs):
        super(_Branch, self).__init__()
        self.probs = probs


class _ScriptedRealization(Realization):
    """Replays a prefix of branch choices and raises _Branch past its end"""

    def __init__(self, graph, gaps, script):
        self.graph = graph
        self.gaps = gaps
        self.script = script
        self.pos = 0
        self.live = {}
        self.ranges = {}
        self.pi = {}
        self.tau = {}

    def _choose(self, options):
        options = [(value, p) for value, p in options if p > TOLERANCE]
        if len(options) == 1:
            return options[0][0]
        if self.pos < len(self.script):
            choice = self.script[self.pos]
            self.pos += 1
            return options[choice][0]
        raise _Branch([p for _, p in options])

    def edge_live(self, e):
        if e not in self.live:
            p = self.graph.prob[e]
            self.live[e] = self._choose([(True, p), (False, 1.0 - p)])
        return self.live[e]

    def _below(self, v, item, x):
        lo, hi = self.ranges.get((v, item), (0.0, 1.0))
        if x >= hi:
            return True
        if x <= lo:
            return False
        width = hi - lo
        below = self._choose([(True, (x - lo) / width), (False, (hi - x) / width)])
        self.ranges[(v, item)] = (lo, x) if below else (x, hi)
        return below

    def adopts(self, v, item, other_adopted):
        return self._below(v, item, self.gaps.adopt_prob(item, other_adopted))

    def reconsiders(self, v, item):
        return self._below(v, item, self.gaps.given_other(item))

    def permutation(self, v):
        if v not in self.pi:
            perms = list(itertools.permutations(self.graph.in_nbrs[v]))
            share = 1.0 / len(perms)
            self.pi[v] = self._choose([(p, share) for p in perms])
        return self.pi[v]

    def seed_first(self, v):
        if v not in self.tau:
            self.tau[v] = self._choose([(A, 0.5), (B, 0.5)])
        return self.tau[v]


def check_budget(g):
    if g.m > MAX_EDGES or g.n > MAX_NODES:
        raise EnumerationBudgetError(
            "exact enumeration is limited to %d nodes and %d edges, got %d and %d"
            % (MAX_NODES, MAX_EDGES, g.n, g.m)
        )


def iter_classes(g, q, seeds_a, seeds_b, a_first=None, max_classes=MAX_CLASSES):
    """Yield the equivalence classes of (g, q, seeds) with their outcomes

    :param a_first: A-first tie-break shortcut; defaults to True under
        mutual complementarity. False enumerates permutations wherever a tie
        between the two items occurs.
    :param max_classes: refuse instances with more classes than this
    """
    check_budget(g)
    check_probs(g)
    stack = [((), 1.0)]
    count = 0
    while stack:
        script, mass = stack.pop()
        real = _ScriptedRealization(g, q, script)
        try:
            out = run_cascade(g, q, seeds_a, seeds_b, real, a_first)
        except _Branch as branch:
            for choice in reversed(range(len(branch.probs))):
                stack.append((script + (choice,), mass * branch.probs[choice]))
            continue
        count += 1
        if count > max_classes:
            raise EnumerationBudgetError("more than %d equivalence classes" % max_classes)
        yield EquivalenceClass(real.live, real.ranges, real.pi, real.tau, mass, out)


def enumerate_outcomes(g, q, seeds_a, seeds_b, a_first=None):
    """(mass, CascadeOutcome) over all equivalence classes"""
    for cls in iter_classes(g, q, seeds_a, seeds_b, a_first):
        yield cls.mass, cls.outcome


def enumerate_exact_spread(g, q, seeds_a, seeds_b, a_first=None):
    """Exact expected A- and B-spread"""
    sigma_a = []
    sigma_b = []
    for mass, out in enumerate_outcomes(g, q, seeds_a, seeds_b, a_first):
        sigma_a.append(mass * len(out.a_adopted))
        sigma_b.append(mass * len(out.b_adopted))
    return ExactSpread(math.fsum(sigma_a), math.fsum(sigma_b))


def exact_adoption_probabilities(g, q, seeds_a, seeds_b, a_first=None):
    """Per-node probability of ending A-adopted and B-adopted"""
    prob_a = np.zeros(g.n)
    prob_b = np.zeros(g.n)
    for mass, out in enumerate_outcomes(g, q, seeds_a, seeds_b, a_first):
        prob_a[list(out.a_adopted)] += mass
        prob_b[list(out.b_adopted)] += mass
    return prob_a, prob_b


def exact_boost(g, q, seeds_a, seeds_b, a_first=None):
    if not seeds_b:
        return 0.0
    with_b = enumerate_exact_spread(g, q, seeds_a, seeds_b, a_first).sigma_a
    without_b = enumerate_exact_spread(g, q, seeds_a, (), a_first).sigma_a
    return with_b - without_b


def exact_objective(g, q, problem, fixed_seeds, seeds):
    """A-spread of A-seeds ``seeds`` (selfinfmax) or boost of B-seeds ``seeds`` (compinfmax)"""
    check_problem(problem)
    if problem == SELFINFMAX:
        return enumerate_exact_spread(g, q, seeds, fixed_seeds).sigma_a
    return exact_boost(g, q, fixed_seeds, seeds)


def brute_force_optimal(g, q, problem, fixed_seeds, k):
    """Exhaustive search of the best size-k seed set

    Returns:
        tuple: (best_set, best_value), best_set being the lexicographically
        smallest maximizer
    """
    check_problem(problem)
    check_budget(g)
    if not 0 <= k <= g.n:
        raise EnumerationBudgetError("k=%d outside 0..%d" % (k, g.n))
    fixed_seeds = frozenset(fixed_seeds)
    base = None
    if problem == COMPINFMAX:
        base = enumerate_exact_spread(g, q, fixed_seeds, ()).sigma_a
    best_set, best_value = None, -math.inf
    for combo in itertools.combinations(range(g.n), k):
        if problem == SELFINFMAX:
            value = enumerate_exact_spread(g, q, combo, fixed_seeds).sigma_a
        elif combo:
            value = enumerate_exact_spread(g, q, fixed_seeds, combo).sigma_a - base
        else:
            value = 0.0
        if value > best_value + TOLERANCE:
            best_set, best_value = combo, value
    log.debug("brute force optimum %s -> %.6f", best_set, best_value)
    return frozenset(best_set), best_value


def _memoized(f):
    cache = {}

    def wrapper(s):
        if s not in cache:
            cache[s] = f(s)
        return cache[s]

    return wrapper


def _subsets(ground):
    ground = sorted(ground)
    for r in range(len(ground) + 1):
        for combo in itertools.combinations(ground, r):
            yield frozenset(combo)


def find_submodularity_violation(f, ground, tol=1e-9):
    """Search S subset of T, x not in T with f(S+x)-f(S) < f(T+x)-f(T)

    :param f: set function over frozensets, typically an exact oracle
    :param ground: ground set

    :return: Violation or None
    """
    f = _memoized(f)
    ground = frozenset(ground)
    for large in _subsets(ground):
        for small in _subsets(large):
            for x in sorted(ground - large):
                gain_small = f(small | {x}) - f(small)
                gain_large = f(large | {x}) - f(large)
                if gain_small < gain_large - tol:
                    return Violation(small, large, x, gain_small, gain_large)
    return None


def find_monotonicity_violation(f, ground, increasing=True, tol=1e-9):
    """Search S, x not in S where adding x moves f the wrong way"""
    f = _memoized(f)
    ground = frozenset(ground)
    for small in _subsets(ground):
        for x in sorted(ground - small):
            delta = f(small | {x}) - f(small)
            if (delta < -tol) if increasing else (delta > tol):
                return Violation(small, small | {x}, x, delta, delta)
    return None
