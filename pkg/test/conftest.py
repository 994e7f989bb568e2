import itertools

import numpy as np
import pytest

from comic2seed.gaps import GapSet
from comic2seed.graph import Graph


# node ids of the non-monotonicity gadgets
S1, S2, Y = 0, 1, 2


def relay_gadget():
    """s1->v, s2->w, y->x->w, w->v with p=1; v is node 5

    B reaches w one step after A from s2.
    """
    return Graph(6, [0, 1, 2, 3, 4], [5, 4, 3, 4, 5], [1.0] * 5)


RELAY_V = 5


def literal_gadget():
    """s1->v, s2->w, y->w, w->v with p=1; w is node 3, v is node 4"""
    return Graph(5, [0, 1, 2, 3], [4, 3, 3, 4], [1.0] * 4)


LITERAL_W = 3
LITERAL_V = 4


def gadget_gaps(q):
    return GapSet(q, 1.0, 1.0, 0.0)


def path_graph(n, p=1.0):
    return Graph(n, list(range(n - 1)), list(range(1, n)), [p] * (n - 1))


def star_graph(leaves, p=1.0):
    """center 0 pointing to nodes 1..leaves"""
    return Graph(leaves + 1, [0] * leaves, list(range(1, leaves + 1)), [p] * leaves)


def random_graph(rng, n, m, probs=(0.3, 0.5, 0.8, 1.0)):
    pairs = [(u, v) for u, v in itertools.permutations(range(n), 2)]
    picked = rng.choice(len(pairs), size=min(m, len(pairs)), replace=False)
    src = [pairs[i][0] for i in picked]
    dst = [pairs[i][1] for i in picked]
    prob = [float(rng.choice(probs)) for _ in picked]
    return Graph(n, src, dst, prob)


def _u(rng):
    return round(float(rng.uniform(0.05, 0.95)), 2)


def _ordered(rng):
    lo, hi = sorted((_u(rng), _u(rng)))
    return lo, hi


def one_way_gaps(rng):
    """q_a0 <= q_ab, q_b0 = q_ba"""
    a0, ab = _ordered(rng)
    b = _u(rng)
    return GapSet(a0, ab, b, b)


def cross_gaps(rng):
    """q_a0 <= q_ab, q_ba = 1"""
    a0, ab = _ordered(rng)
    return GapSet(a0, ab, _u(rng), 1.0)


def certain_b_gaps(rng):
    """q_a0 <= q_ab, q_b0 = q_ba = 1"""
    a0, ab = _ordered(rng)
    return GapSet(a0, ab, 1.0, 1.0)


def complement_gaps(rng):
    a0, ab = _ordered(rng)
    b0, ba = _ordered(rng)
    return GapSet(a0, ab, b0, ba)


def compete_gaps(rng):
    a0, ab = _ordered(rng)
    b0, ba = _ordered(rng)
    return GapSet(ab, a0, ba, b0)


def pure_competition_gaps(rng):
    """q_a0 = q_b0 = 1"""
    return GapSet(1.0, _u(rng), 1.0, _u(rng))


def mixed_gaps(rng):
    return GapSet(_u(rng), _u(rng), _u(rng), _u(rng))


@pytest.fixture
def rng():
    return np.random.default_rng(20160901)
