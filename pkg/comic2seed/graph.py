"""Directed influence graphs

Nodes are dense integers 0..n-1. Edges are numbered in the order they were
read; every traversal refers to an edge by that number so per-edge random
decisions can be memoized. Forward and reverse adjacency are plain Python
lists because the cascade and RR-set code walks them one node at a time.
"""
import io
import logging
import math

import networkx as nx
import numpy as np

from comic2seed.utils import RandomStream, STREAM_GRAPH


log = logging.getLogger(__name__)


class GraphFormatError(ValueError):
    """Edge list line cannot be parsed"""

    def __init__(self, lineno, message):
        super(GraphFormatError, self).__init__("line %d: %s" % (lineno, message))
        self.lineno = lineno


class GraphValidationError(ValueError):
    """Edge list parses but violates a graph invariant"""


class Graph(object):
    """Immutable directed graph with per-edge influence probabilities

    :param n: number of nodes
    :param src: edge tails
    :param dst: edge heads
    :param prob: edge probabilities, NaN where not assigned yet
    :param labels: original node ids when the input was relabeled
    """

    def __init__(self, n, src=(), dst=(), prob=None, labels=None):
        self.n = int(n)
        self.src = [int(u) for u in src]
        self.dst = [int(v) for v in dst]
        m = len(self.src)
        if len(self.dst) != m:
            raise GraphValidationError("source and target lists differ in length")
        if prob is None:
            prob = [math.nan] * m
        self.prob = [float(p) for p in prob]
        if len(self.prob) != m:
            raise GraphValidationError("probability list differs in length")
        self.labels = list(labels) if labels is not None else None
        self._validate()

        self.out_nbrs = [[] for _ in range(self.n)]
        self.out_edges = [[] for _ in range(self.n)]
        self.in_nbrs = [[] for _ in range(self.n)]
        self.in_edges = [[] for _ in range(self.n)]
        for e, (u, v) in enumerate(zip(self.src, self.dst)):
            self.out_nbrs[u].append(v)
            self.out_edges[u].append(e)
            self.in_nbrs[v].append(u)
            self.in_edges[v].append(e)

    def _validate(self):
        seen = set()
        for e, (u, v) in enumerate(zip(self.src, self.dst)):
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise GraphValidationError("edge %d (%d, %d) outside node range" % (e, u, v))
            if u == v:
                raise GraphValidationError("self-loop on node %d" % u)
            if (u, v) in seen:
                raise GraphValidationError("duplicate edge (%d, %d)" % (u, v))
            seen.add((u, v))
            p = self.prob[e]
            if not math.isnan(p) and not 0.0 <= p <= 1.0:
                raise GraphValidationError(
                    "probability %r of edge (%d, %d) outside [0, 1]" % (p, u, v)
                )

    @property
    def m(self):
        """number of edges"""
        return len(self.src)

    @property
    def edges(self):
        """list of (source, target, prob)"""
        return list(zip(self.src, self.dst, self.prob))

    @property
    def has_probs(self):
        return not any(math.isnan(p) for p in self.prob)

    def out_degree(self):
        return np.array([len(a) for a in self.out_nbrs], dtype=np.int64)

    def in_degree(self):
        return np.array([len(a) for a in self.in_nbrs], dtype=np.int64)

    def with_probs(self, prob):
        """copy of this graph carrying new edge probabilities"""
        return Graph(self.n, self.src, self.dst, prob, self.labels)

    def label(self, v):
        """original id of node v"""
        return self.labels[v] if self.labels is not None else v

    def check_nodes(self, nodes, what="node"):
        """raise GraphValidationError unless every node id is in range"""
        for v in nodes:
            if not 0 <= int(v) < self.n:
                raise GraphValidationError("%s %r outside 0..%d" % (what, v, self.n - 1))

    def __repr__(self):
        return "Graph(n=%d, m=%d)" % (self.n, self.m)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and self.src == other.src
            and self.dst == other.dst
            and np.allclose(self.prob, other.prob, rtol=1e-8, atol=1e-12, equal_nan=True)
        )

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq


def _parse_node(token, lineno):
    try:
        v = int(token)
    except ValueError:
        raise GraphFormatError(lineno, "node id %r is not an integer" % token)
    if v < 0:
        raise GraphFormatError(lineno, "node id %d is negative" % v)
    return v


def parse_edge_list(lines, has_probs=True, undirected=False, relabel=False):
    """Parse tab separated edge list lines into a Graph

    :param lines: iterable of text lines "u<TAB>v[<TAB>p]"
    :param has_probs: take probabilities from the third column
    :param undirected: add both directions for every line
    :param relabel: map sparse ids to dense ids in first-appearance order

    :return: Graph
    """
    src, dst, prob = [], [], []
    mapping = {}

    def node(v):
        if not relabel:
            return v
        if v not in mapping:
            mapping[v] = len(mapping)
        return mapping[v]

    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) not in (2, 3):
            raise GraphFormatError(lineno, "expected 2 or 3 tab separated fields, got %d" % len(fields))
        u = node(_parse_node(fields[0], lineno))
        v = node(_parse_node(fields[1], lineno))
        p = math.nan
        if has_probs:
            if len(fields) != 3:
                raise GraphFormatError(lineno, "missing probability column")
            try:
                p = float(fields[2])
            except ValueError:
                raise GraphFormatError(lineno, "probability %r is not a number" % fields[2])
        pairs = [(u, v), (v, u)] if undirected else [(u, v)]
        for a, b in pairs:
            src.append(a)
            dst.append(b)
            prob.append(p)

    if relabel:
        n = len(mapping)
        labels = sorted(mapping, key=mapping.get)
    else:
        n = 1 + max(src + dst) if src else 0
        labels = None
    g = Graph(n, src, dst, prob, labels)
    log.debug("parsed %r", g)
    return g


def load_edge_list(path, has_probs=True, undirected=False, relabel=False):
    """Load a graph from a UTF-8 tab separated edge list file"""
    with io.open(path, encoding="utf-8") as f:
        return parse_edge_list(f, has_probs, undirected, relabel)


def save_edge_list(g, path):
    """Write g in the edge list format, probabilities with 9 significant digits"""
    with io.open(path, "w", encoding="utf-8") as f:
        for u, v, p in g.edges:
            u, v = g.label(u), g.label(v)
            if math.isnan(p):
                f.write("%s\t%s\n" % (u, v))
            else:
                f.write("%s\t%s\t%.9g\n" % (u, v, p))


def assign_weighted_cascade(g):
    """Give every edge (u, v) probability 1 / in-degree(v)"""
    indeg = g.in_degree()
    prob = [1.0 / indeg[v] for v in g.dst]
    return g.with_probs(prob)


def powerlaw_graph(n, exponent=2.16, avg_degree=5.0, master_seed=0):
    """Random directed graph with power-law expected degrees

    networkx draws a simple undirected graph whose expected degrees follow
    the weights i^(-1/(exponent-1)), each edge is given a random direction,
    and weighted cascade probabilities are assigned.

    Args:
        n (int): number of nodes
        exponent (float): degree distribution exponent, > 2
        avg_degree (float): target average out-degree
        master_seed (int): seed of the generator

    Returns:
        Graph: the generated graph
    """
    if n < 2:
        return Graph(max(n, 0))
    if exponent <= 1.0:
        raise GraphValidationError("power-law exponent must exceed 1, got %r" % exponent)
    rng = RandomStream(master_seed, STREAM_GRAPH, n).generator
    weights = np.arange(1, n + 1, dtype=float) ** (-1.0 / (exponent - 1.0))
    # each undirected edge becomes a single arc
    weights *= 2.0 * avg_degree / weights.mean()
    undirected = nx.expected_degree_graph(weights.tolist(), seed=int(rng.integers(2 ** 31)), selfloops=False)
    pairs = np.array(list(undirected.edges()), dtype=np.int64).reshape(-1, 2)
    flip = rng.random(len(pairs)) < 0.5
    pairs[flip] = pairs[flip][:, ::-1]
    # relabel through a random permutation so ids carry no degree information
    perm = rng.permutation(n)
    g = Graph(n, perm[pairs[:, 0]].tolist(), perm[pairs[:, 1]].tolist())
    log.info("generated power-law graph n=%d m=%d exponent=%.2f", g.n, g.m, exponent)
    return assign_weighted_cascade(g)
