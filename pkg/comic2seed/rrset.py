"""Reverse-reachable sets for the Com-IC seed selection problems

A node u belongs to the RR-set of a root v in world W when the singleton {u}
used as seed set (A-seeds for selfinfmax, B-seeds for compinfmax) makes v
A-adopted in W. The world is sampled lazily: an edge coin or a threshold is
drawn the first time a search looks at it and then memoized for the rest of
that one RR-set.
"""
import json
import logging
from collections import Counter, deque, namedtuple
from functools import partial

from comic2seed.gaps import A, B, COMPINFMAX, SELFINFMAX, check_problem
from comic2seed.utils import RandomStream, STREAM_RRSET, chunk_ranges, parallel_map


log = logging.getLogger(__name__)

A_ADOPTED = "a_adopted"
A_REJECTED = "a_rejected"
A_SUSPENDED = "a_suspended"
A_POTENTIAL = "a_potential"
UNLABELED = "unlabeled"

COUNTERS = ("ept_f", "ept_b1", "ept_b2", "ept_bs", "ept_bo")


class RRSetError(ValueError):
    """RR-set request is invalid"""


class LazyWorld(object):
    """Possible world sampled on demand from a RandomStream"""

    def __init__(self, graph, stream):
        self.graph = graph
        self.stream = stream
        self.live = {}
        self.alpha = ({}, {})
        self.coin_flips = 0

    def edge_live(self, e):
        live = self.live.get(e)
        if live is None:
            live = self.live[e] = self.stream.bernoulli(self.graph.prob[e])
            self.coin_flips += 1
        return live

    def below(self, v, item, x):
        """whether alpha_item(v) < x; thresholds at 0 or 1 need no draw"""
        if x >= 1.0:
            return True
        if x <= 0.0:
            return False
        alpha = self.alpha[item]
        if v not in alpha:
            alpha[v] = self.stream.random()
        return alpha[v] < x


class FixedWorld(object):
    """LazyWorld interface over a fully materialized PossibleWorld"""

    def __init__(self, world):
        self.graph = world.graph
        self.world = world
        self.alpha = (world.alpha_a, world.alpha_b)

    def edge_live(self, e):
        return self.world.live[e]

    def below(self, v, item, x):
        if x >= 1.0:
            return True
        if x <= 0.0:
            return False
        return self.alpha[item][v] < x


class RRSet(namedtuple("RRSet", ["root", "members", "counters"])):
    __slots__ = ()

    def hit(self, seeds):
        return not self.members.isdisjoint(seeds)

    def to_json(self):
        return json.dumps(
            {
                "root": self.root,
                "members": sorted(self.members),
                "counters": {k: self.counters.get(k, 0) for k in COUNTERS},
            }
        )


def _check_root(g, root):
    if not 0 <= root < g.n:
        raise RRSetError("root %r outside 0..%d" % (root, g.n - 1))


def _forward_b(g, q, sources, world, counters, scope=None):
    """nodes that end B-adopted when B spreads independently of A"""
    adopted = set(sources)
    queue = deque(sorted(adopted))
    while queue:
        u = queue.popleft()
        for v, e in zip(g.out_nbrs[u], g.out_edges[u]):
            counters["ept_f"] += 1
            if v in adopted or (scope is not None and v not in scope):
                continue
            if world.edge_live(e) and world.below(v, B, q.q_b0):
                adopted.add(v)
                queue.append(v)
    return adopted


def _backward_a(g, q, root, world, b_adopted, counters, key):
    members = []
    visited = {root}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        members.append(u)
        threshold = q.q_ab if u in b_adopted else q.q_a0
        if not world.below(u, A, threshold):
            continue
        for w, e in zip(g.in_nbrs[u], g.in_edges[u]):
            counters[key] += 1
            if w not in visited and world.edge_live(e):
                visited.add(w)
                queue.append(w)
    return frozenset(members)


def rr_sim(g, q, seeds_b, root, world, counters=None):
    """RR-set for selfinfmax: forward B labeling, then one backward search"""
    _check_root(g, root)
    counters = Counter() if counters is None else counters
    b_adopted = _forward_b(g, q, seeds_b, world, counters)
    members = _backward_a(g, q, root, world, b_adopted, counters, "ept_b2")
    return RRSet(root, members, counters)


def rr_sim_plus(g, q, seeds_b, root, world, counters=None):
    """RR-set for selfinfmax restricting B labeling to the root's live ancestry

    A first backward search over live edges collects every node that can
    reach the root. Only B-seeds inside that scope can matter, and only inside
    that scope.
    """
    _check_root(g, root)
    counters = Counter() if counters is None else counters
    scope = {root}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for w, e in zip(g.in_nbrs[u], g.in_edges[u]):
            counters["ept_b1"] += 1
            if w not in scope and world.edge_live(e):
                scope.add(w)
                queue.append(w)
    sources = scope.intersection(seeds_b)
    b_adopted = _forward_b(g, q, sources, world, counters, scope) if sources else set()
    members = _backward_a(g, q, root, world, b_adopted, counters, "ept_b2")
    return RRSet(root, members, counters)


class ForwardLabels(object):
    """A-labels of a world without B-seeds plus the diffusibility tests"""

    def __init__(self, q, world, labels):
        self.q = q
        self.world = world
        self.labels = labels

    def label(self, v):
        return self.labels.get(v, UNLABELED)

    def ab_diffusible(self, v):
        """v relays both items once informed of both"""
        below = self.world.below
        if below(v, A, self.q.q_a0):
            return True
        return below(v, A, self.q.q_ab) and below(v, B, self.q.q_b0)

    def b_diffusible(self, v):
        """v relays B once informed of B"""
        return self.label(v) == A_ADOPTED or self.world.below(v, B, self.q.q_b0)


def forward_label(g, q, seeds_a, world, counters=None):
    """Label nodes by how A reaches them when no B-seed exists

    A node reached from an a_adopted parent is a_adopted, a_suspended or
    a_rejected by its threshold; one reached only from suspended or potential
    parents is a_potential unless its threshold rejects A outright. A
    potential node reached later from an adopted parent is promoted.
    """
    counters = Counter() if counters is None else counters
    labels = {s: A_ADOPTED for s in seeds_a}
    queue = deque(sorted(labels))
    while queue:
        u = queue.popleft()
        from_adopted = labels[u] == A_ADOPTED
        for v, e in zip(g.out_nbrs[u], g.out_edges[u]):
            counters["ept_f"] += 1
            old = labels.get(v)
            if old in (A_ADOPTED, A_SUSPENDED, A_REJECTED):
                continue
            if old == A_POTENTIAL and not from_adopted:
                continue
            if not world.edge_live(e):
                continue
            if from_adopted:
                if world.below(v, A, q.q_a0):
                    new = A_ADOPTED
                elif world.below(v, A, q.q_ab):
                    new = A_SUSPENDED
                else:
                    new = A_REJECTED
            else:
                new = A_POTENTIAL if world.below(v, A, q.q_ab) else A_REJECTED
            labels[v] = new
            if old is None and new != A_REJECTED:
                queue.append(v)
            elif old == A_POTENTIAL and new == A_ADOPTED:
                queue.append(v)
    return ForwardLabels(q, world, labels)


class _CimSearch(object):
    """Primary and secondary backward searches of one compinfmax RR-set"""

    def __init__(self, g, labels, world):
        self.g = g
        self.labels = labels
        self.world = world
        self.examined = Counter()
        self._secondary = {}
        self._case4 = {}

    def in_edges(self, u):
        for w, e in zip(self.g.in_nbrs[u], self.g.in_edges[u]):
            self.examined[u] += 1
            yield w, e

    def secondary(self, s):
        """every node whose B can reach s through B-diffusible relays"""
        if s in self._secondary:
            return self._secondary[s]
        found = {s}
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for w, e in self.in_edges(x):
                if w in found or not self.world.edge_live(e):
                    continue
                found.add(w)
                if self.labels.b_diffusible(w):
                    queue.append(w)
        self._secondary[s] = found
        return found

    def closes_cycle(self, u):
        """B from u reaches a suspended node whose A and B come back to u"""
        if u in self._case4:
            return self._case4[u]
        labels, world, g = self.labels, self.world, self.g
        forward = set()
        seen = {u}
        queue = deque([u])
        while queue:
            x = queue.popleft()
            for v, e in zip(g.out_nbrs[x], g.out_edges[x]):
                self.examined[v] += 1
                if v in seen or not world.edge_live(e):
                    continue
                seen.add(v)
                forward.add(v)
                if labels.b_diffusible(v):
                    queue.append(v)
        backward = set()
        seen = {u}
        queue = deque([u])
        relays = (A_POTENTIAL, A_SUSPENDED, A_ADOPTED)
        while queue:
            x = queue.popleft()
            for w, e in self.in_edges(x):
                if w in seen:
                    continue
                if labels.label(w) not in relays or not labels.ab_diffusible(w):
                    continue
                if world.edge_live(e):
                    seen.add(w)
                    backward.add(w)
                    queue.append(w)
        result = any(labels.label(x) == A_SUSPENDED for x in forward & backward)
        self._case4[u] = result
        return result


def rr_cim(g, q, seeds_a, root, world, counters=None):
    """RR-set for compinfmax

    The root only counts when it is a_suspended or a_potential without B.
    The primary backward search then handles four cases per dequeued node:

    1. a_suspended and AB-diffusible: add it and everything whose B reaches it
    2. a_suspended only: add it
    3. a_potential and AB-diffusible: pass the search on to its in-neighbors
    4. a_potential only: add it when its own B can trigger a suspended node
       that feeds A back to it
    """
    _check_root(g, root)
    counters = Counter() if counters is None else counters
    labels = forward_label(g, q, seeds_a, world, counters)
    if labels.label(root) not in (A_SUSPENDED, A_POTENTIAL):
        return RRSet(root, frozenset(), counters)

    search = _CimSearch(g, labels, world)
    members = set()
    visited = {root}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        label = labels.label(u)
        if label == A_SUSPENDED:
            members.add(u)
            if labels.ab_diffusible(u):
                members |= search.secondary(u)
        elif label == A_POTENTIAL:
            if labels.ab_diffusible(u):
                for w, e in search.in_edges(u):
                    if w not in visited and world.edge_live(e):
                        visited.add(w)
                        queue.append(w)
            elif search.closes_cycle(u):
                members.add(u)

    into_members = sum(search.examined[v] for v in members)
    counters["ept_bs"] += into_members
    counters["ept_bo"] += sum(search.examined.values()) - into_members
    return RRSet(root, frozenset(members), counters)


GENERATORS = {"rr_sim": rr_sim, "rr_sim_plus": rr_sim_plus, "rr_cim": rr_cim}
DEFAULT_GENERATOR = {SELFINFMAX: "rr_sim_plus", COMPINFMAX: "rr_cim"}


def rr_generator(name, problem=None):
    """RR-set function by name; checks it serves the problem"""
    try:
        gen = GENERATORS[name]
    except KeyError:
        raise RRSetError("unknown RR-set generator %r, choose from %s" % (name, ", ".join(sorted(GENERATORS))))
    if problem is not None:
        check_problem(problem)
        if (problem == COMPINFMAX) != (name == "rr_cim"):
            raise RRSetError("generator %s does not serve %s" % (name, problem))
    return gen


def _generate_chunk(task, g, q, fixed_seeds, generator, master_seed, tag):
    start, stop = task
    gen = GENERATORS[generator]
    out = []
    for i in range(start, stop):
        stream = RandomStream(master_seed, tag, i)
        root = stream.integers(g.n)
        counters = Counter()
        rr = gen(g, q, fixed_seeds, root, LazyWorld(g, stream), counters)
        out.append(RRSet(rr.root, rr.members, dict(counters)))
    return out


def generate_rrsets(g, q, fixed_seeds, generator, start, stop, master_seed,
                    tag=STREAM_RRSET, workers=1):
    """RR-sets number start..stop-1 with uniform roots

    Set i uses the stream (master_seed, tag, i) for its root and its world, so
    the list is identical for any number of workers.
    """
    if g.n == 0 or stop <= start:
        return []
    fixed_seeds = frozenset(fixed_seeds)
    task = partial(
        _generate_chunk, g=g, q=q, fixed_seeds=fixed_seeds, generator=generator,
        master_seed=master_seed, tag=tag,
    )
    ranges = [(start + a, start + b) for a, b in chunk_ranges(stop - start, max(1, workers) * 4)]
    parts = parallel_map(task, ranges, workers)
    return [rr for part in parts for rr in part]
