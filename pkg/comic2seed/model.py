"""Com-IC diffusion dynamics and Monte Carlo estimation

One step-synchronous engine, ``run_cascade``, carries out the diffusion. At
each step the outgoing edges of the previous step's adopters are tested,
then every informed node runs its node-level automaton once per informing
item. All randomness is delegated to a realization object, so the same
engine runs Monte Carlo simulation (``SimulationRealization``),
deterministic possible-world cascades and the exact enumerator in
``comic2seed.world``.
"""
import logging
from collections import namedtuple
from functools import partial

import numpy as np

from comic2seed.gaps import A, B, ITEMS, is_mutual_complement
from comic2seed.utils import (
    RandomStream,
    STREAM_BOOST,
    STREAM_SIMULATE,
    chunk_ranges,
    mean_stderr,
    parallel_map,
)


log = logging.getLogger(__name__)

IDLE = 0
SUSPENDED = 1
ADOPTED = 2
REJECTED = 3

# (A state, B state) pairs no trace can produce
UNREACHABLE_STATES = frozenset(
    [
        (IDLE, REJECTED),
        (SUSPENDED, REJECTED),
        (REJECTED, IDLE),
        (REJECTED, SUSPENDED),
        (REJECTED, REJECTED),
    ]
)

INFORM = "inform"
ADOPT = "adopt"

Event = namedtuple("Event", ["seq", "step", "node", "item", "action"])
CascadeOutcome = namedtuple(
    "CascadeOutcome",
    ["a_adopted", "b_adopted", "steps", "adopt_step", "first_item", "states", "events"],
)
SpreadEstimate = namedtuple("SpreadEstimate", ["sigma_a", "sigma_b", "stderr_a", "stderr_b"])
BoostEstimate = namedtuple("BoostEstimate", ["boost", "stderr"])


class SeedError(ValueError):
    """Seed ids must be nodes of the graph"""


class EstimationError(ValueError):
    """Monte Carlo settings are invalid"""


class Realization(object):
    """Source of every random decision a cascade makes

    Subclasses answer five questions. Answers for the same edge or node must
    be consistent within one cascade.
    """

    def edge_live(self, e):
        raise NotImplementedError

    def adopts(self, v, item, other_adopted):
        raise NotImplementedError

    def reconsiders(self, v, item):
        raise NotImplementedError

    def permutation(self, v):
        raise NotImplementedError

    def seed_first(self, v):
        raise NotImplementedError


class SimulationRealization(Realization):
    """Bernoulli draws with the GAPs and reconsideration probabilities"""

    def __init__(self, graph, gaps, stream):
        self.graph = graph
        self.gaps = gaps
        self.stream = stream
        self.rho = (gaps.rho(A), gaps.rho(B))
        self._live = {}
        self._perm = {}

    def edge_live(self, e):
        live = self._live.get(e)
        if live is None:
            live = self._live[e] = self.stream.bernoulli(self.graph.prob[e])
        return live

    def adopts(self, v, item, other_adopted):
        return self.stream.bernoulli(self.gaps.adopt_prob(item, other_adopted))

    def reconsiders(self, v, item):
        return self.stream.bernoulli(self.rho[item])

    def permutation(self, v):
        perm = self._perm.get(v)
        if perm is None:
            perm = self._perm[v] = self.stream.permutation(self.graph.in_nbrs[v])
        return perm

    def seed_first(self, v):
        return A if self.stream.random() < 0.5 else B


def check_seeds(graph, seeds, item_name):
    seeds = frozenset(int(v) for v in seeds)
    for v in seeds:
        if not 0 <= v < graph.n:
            raise SeedError("%s-seed %d outside 0..%d" % (item_name, v, graph.n - 1))
    return seeds


def check_probs(graph):
    if not graph.has_probs:
        raise EstimationError("graph edges carry no probabilities; assign weighted cascade first")


class _Cascade(object):
    def __init__(self, graph, gaps, realization, a_first, record_events):
        self.graph = graph
        self.gaps = gaps
        self.real = realization
        self.a_first = a_first
        n = graph.n
        self.state = ([IDLE] * n, [IDLE] * n)
        self.adopt_step = ({}, {})
        self.first_item = {}
        self.events = [] if record_events else None
        self.fresh = {}

    def _event(self, t, v, item, action):
        if self.events is not None:
            self.events.append(Event(len(self.events), t, v, item, action))

    def _adopt(self, v, item, t):
        self.state[item][v] = ADOPTED
        self.adopt_step[item][v] = t
        self.first_item.setdefault(v, item)
        self.fresh.setdefault(v, []).append(item)
        self._event(t, v, item, ADOPT)

    def seed(self, seeds_a, seeds_b):
        for v in sorted(seeds_a | seeds_b):
            if v in seeds_a and v in seeds_b:
                order = (A, B) if self.real.seed_first(v) == A else (B, A)
            else:
                order = (A,) if v in seeds_a else (B,)
            for item in order:
                self._adopt(v, item, 0)

    def _sequence(self, v, informers):
        """items v is tested with this step, in test order"""
        if len(informers) == 1:
            return informers[0][1]
        kinds = set()
        for _, items in informers:
            kinds.update(items)
        if len(kinds) == 1:
            return list(kinds)
        # order only matters while v is idle for both items
        if self.state[A][v] != IDLE or self.state[B][v] != IDLE or self.a_first:
            return [A, B]
        position = {u: i for i, u in enumerate(self.real.permutation(v))}
        sequence = []
        for u, items in sorted(informers, key=lambda pair: position[pair[0]]):
            sequence.extend(items)
        return sequence

    def _inform(self, v, x, t):
        state = self.state
        if state[x][v] != IDLE:
            return
        y = 1 - x
        self._event(t, v, x, INFORM)
        other_adopted = state[y][v] == ADOPTED
        if self.real.adopts(v, x, other_adopted):
            self._adopt(v, x, t)
            if state[y][v] == SUSPENDED:
                if self.real.reconsiders(v, y):
                    self._adopt(v, y, t)
                else:
                    state[y][v] = REJECTED
        else:
            state[x][v] = REJECTED if other_adopted else SUSPENDED

    def run(self):
        graph, state = self.graph, self.state
        t = 0
        steps = 0
        while self.fresh:
            t += 1
            fresh, self.fresh = self.fresh, {}
            incoming = {}
            for u in sorted(fresh):
                items = fresh[u]
                for v, e in zip(graph.out_nbrs[u], graph.out_edges[u]):
                    # an edge only matters for items v is still idle for
                    if all(state[x][v] != IDLE for x in items):
                        continue
                    if self.real.edge_live(e):
                        incoming.setdefault(v, []).append((u, items))
            for v in sorted(incoming):
                for x in self._sequence(v, incoming[v]):
                    self._inform(v, x, t)
            if self.fresh:
                steps = t
        return steps

    def outcome(self, steps):
        return CascadeOutcome(
            frozenset(self.adopt_step[A]),
            frozenset(self.adopt_step[B]),
            steps,
            self.adopt_step,
            self.first_item,
            self.state,
            self.events,
        )


def run_cascade(graph, gaps, seeds_a, seeds_b, realization, a_first=None, record_events=False):
    """Run one Com-IC cascade with the given source of randomness

    :param graph: Graph with edge probabilities
    :param gaps: GapSet
    :param seeds_a: A-seed nodes
    :param seeds_b: B-seed nodes
    :param realization: Realization answering all random decisions
    :param a_first: test A before B on same-step ties; defaults to True under
        mutual complementarity, where the order cannot change the outcome
    :param record_events: keep the ordered inform/adopt event log

    :return: CascadeOutcome
    """
    seeds_a = check_seeds(graph, seeds_a, "A")
    seeds_b = check_seeds(graph, seeds_b, "B")
    if a_first is None:
        a_first = is_mutual_complement(gaps)
    cascade = _Cascade(graph, gaps, realization, a_first, record_events)
    cascade.seed(seeds_a, seeds_b)
    return cascade.outcome(cascade.run())


def simulate(g, q, seeds_a, seeds_b, rng, a_first=None, record_events=False):
    """One Monte Carlo run of the Com-IC model driven by a RandomStream"""
    check_probs(g)
    return run_cascade(g, q, seeds_a, seeds_b, SimulationRealization(g, q, rng), a_first, record_events)


def _run_chunk(task, g, q, seeds_a, seeds_b, master_seed, tag, a_first):
    start, stop = task
    sizes_a, sizes_b = [], []
    hits_a = np.zeros(g.n, dtype=np.int64)
    hits_b = np.zeros(g.n, dtype=np.int64)
    for i in range(start, stop):
        out = run_cascade(
            g, q, seeds_a, seeds_b,
            SimulationRealization(g, q, RandomStream(master_seed, tag, i)),
            a_first,
        )
        sizes_a.append(len(out.a_adopted))
        sizes_b.append(len(out.b_adopted))
        hits_a[list(out.a_adopted)] += 1
        hits_b[list(out.b_adopted)] += 1
    return sizes_a, sizes_b, hits_a, hits_b


def _simulate_many(g, q, seeds_a, seeds_b, iterations, master_seed, workers, tag, a_first):
    if iterations < 1:
        raise EstimationError("iterations must be positive, got %r" % iterations)
    check_probs(g)
    seeds_a = check_seeds(g, seeds_a, "A")
    seeds_b = check_seeds(g, seeds_b, "B")
    task = partial(
        _run_chunk, g=g, q=q, seeds_a=seeds_a, seeds_b=seeds_b,
        master_seed=master_seed, tag=tag, a_first=a_first,
    )
    parts = parallel_map(task, chunk_ranges(iterations, max(1, workers) * 4), workers)
    sizes_a = [s for part in parts for s in part[0]]
    sizes_b = [s for part in parts for s in part[1]]
    hits_a = sum((part[2] for part in parts), np.zeros(g.n, dtype=np.int64))
    hits_b = sum((part[3] for part in parts), np.zeros(g.n, dtype=np.int64))
    return sizes_a, sizes_b, hits_a, hits_b


def estimate_spread(g, q, seeds_a, seeds_b, iterations, master_seed, workers=1,
                    a_first=None, tag=STREAM_SIMULATE):
    """Monte Carlo estimate of the expected A- and B-spread

    Run i draws from the stream (master_seed, tag, i), so the result does not
    depend on the number of workers.

    Returns:
        SpreadEstimate: means and standard errors of |A-adopted| and |B-adopted|
    """
    sizes_a, sizes_b, _, _ = _simulate_many(
        g, q, seeds_a, seeds_b, iterations, master_seed, workers, tag, a_first
    )
    sigma_a, stderr_a = mean_stderr(sizes_a)
    sigma_b, stderr_b = mean_stderr(sizes_b)
    log.debug("spread estimate A=%.4f+-%.4f B=%.4f+-%.4f", sigma_a, stderr_a, sigma_b, stderr_b)
    return SpreadEstimate(sigma_a, sigma_b, stderr_a, stderr_b)


def adoption_frequencies(g, q, seeds_a, seeds_b, iterations, master_seed, workers=1,
                         a_first=None, tag=STREAM_SIMULATE):
    """Per-node fraction of runs ending A-adopted and B-adopted

    Returns:
        tuple: two float arrays of length n
    """
    _, _, hits_a, hits_b = _simulate_many(
        g, q, seeds_a, seeds_b, iterations, master_seed, workers, tag, a_first
    )
    return hits_a / float(iterations), hits_b / float(iterations)


def estimate_boost(g, q, seeds_a, seeds_b, iterations, master_seed, workers=1, a_first=None):
    """Expected increase of the A-spread caused by the B-seeds

    The two spreads come from independent streams of the same master seed.
    With no B-seeds both sides are the same estimator and the boost is 0.
    """
    if not seeds_b:
        check_seeds(g, seeds_a, "A")
        return BoostEstimate(0.0, 0.0)
    with_b = estimate_spread(g, q, seeds_a, seeds_b, iterations, master_seed, workers,
                             a_first, tag=STREAM_BOOST)
    without_b = estimate_spread(g, q, seeds_a, (), iterations, master_seed, workers,
                                a_first, tag=STREAM_SIMULATE)
    boost = with_b.sigma_a - without_b.sigma_a
    stderr = float(np.hypot(with_b.stderr_a, without_b.stderr_a))
    return BoostEstimate(boost, stderr)
