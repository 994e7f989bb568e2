import itertools
import json
import math
from collections import Counter

import networkx as nx
import pytest

from comic2seed import rrset, world
from comic2seed.gaps import GapSet
from comic2seed.graph import Graph
from comic2seed.rrset import FixedWorld, LazyWorld
from comic2seed.utils import RandomStream, STREAM_WORLD

from conftest import certain_b_gaps, one_way_gaps, path_graph, random_graph


IC = GapSet(1.0, 1.0, 0.0, 0.0)


def _fixed(g, alpha_a, alpha_b, live=None):
    live = [True] * g.m if live is None else live
    return FixedWorld(world.PossibleWorld(g, live, alpha_a, alpha_b, [()] * g.n, [0] * g.n))


def test_ic_rrset_is_the_ancestry():
    g = Graph(5, [0, 1, 2, 3], [1, 2, 4, 4], [1.0] * 4)
    rr = rrset.rr_sim(g, IC, [], 4, LazyWorld(g, RandomStream(0, 3, 0)))
    graph = nx.DiGraph(list(zip(g.src, g.dst)))
    assert rr.members == {4} | nx.ancestors(graph, 4)


def test_root_without_shortcut():
    g = path_graph(3)
    q = GapSet(0.0, 0.5, 0.5, 0.5)
    rr = rrset.rr_sim(g, q, [], 2, LazyWorld(g, RandomStream(0, 3, 0)))
    assert rr.members == {2}


def test_root_out_of_range():
    g = path_graph(3)
    with pytest.raises(rrset.RRSetError):
        rrset.rr_sim(g, IC, [], 3, LazyWorld(g, RandomStream(0, 3, 0)))


def test_lazy_world_flips_each_edge_once(rng):
    g = random_graph(rng, 8, 20)
    q = GapSet(0.3, 0.8, 0.5, 0.5)
    for i in range(50):
        lw = LazyWorld(g, RandomStream(4, 3, i))
        rrset.rr_sim_plus(g, q, [1, 2], i % g.n, lw)
        assert lw.coin_flips == len(lw.live) <= g.m


def test_sim_and_sim_plus_agree_on_fixed_worlds(rng):
    for i in range(10):
        g = random_graph(rng, 7, 12)
        q = one_way_gaps(rng)
        for j in range(20):
            w = FixedWorld(world.sample_world(g, q, RandomStream(i, STREAM_WORLD, j)))
            for root in range(g.n):
                plain = rrset.rr_sim(g, q, [0, 1], root, w)
                scoped = rrset.rr_sim_plus(g, q, [0, 1], root, w)
                assert plain.members == scoped.members


def test_sim_plus_skips_unrelated_b_seeds():
    g = Graph(4, [0, 2], [1, 3], [1.0, 1.0])
    q = GapSet(0.3, 0.8, 0.5, 0.5)
    w = _fixed(g, [0.1] * 4, [0.1] * 4)
    scoped = rrset.rr_sim_plus(g, q, [2], 1, w, Counter())
    plain = rrset.rr_sim(g, q, [2], 1, w, Counter())
    assert scoped.members == plain.members == {0, 1}
    assert scoped.counters["ept_f"] == 0
    assert plain.counters["ept_f"] > 0


def test_rrset_membership_is_activation(rng):
    for i in range(5):
        g = random_graph(rng, 6, 10)
        q = one_way_gaps(rng)
        seeds_b = [5]
        for j in range(10):
            pw = world.sample_world(g, q, RandomStream(i, STREAM_WORLD, j))
            members = {v: rrset.rr_sim(g, q, seeds_b, v, FixedWorld(pw)).members for v in range(g.n)}
            for size in (1, 2):
                for s in itertools.combinations(range(5), size):
                    out = world.deterministic_cascade(pw, q, s, seeds_b)
                    for v in range(g.n):
                        assert (v in out.a_adopted) == (not members[v].isdisjoint(s))


def _assert_matches(sets, seeds, exact, n):
    """n times the hit fraction within 4 standard errors of the exact value"""
    p = sum(1 for rr in sets if rr.hit(seeds)) / float(len(sets))
    expected = min(max(exact / n, 0.0), 1.0)
    stderr = n * math.sqrt(expected * (1 - expected) / len(sets))
    assert abs(n * p - exact) <= 4 * stderr + 1e-9


def test_sim_plus_estimates_exact_spread(rng):
    theta = 20000
    for i in range(3):
        g = random_graph(rng, 6, 9)
        q = one_way_gaps(rng)
        sets = rrset.generate_rrsets(g, q, [5], "rr_sim_plus", 0, theta, master_seed=i)
        for s in [(0,), (1,), (2,), (0, 3)]:
            exact = world.enumerate_exact_spread(g, q, s, [5]).sigma_a
            _assert_matches(sets, s, exact, g.n)


def test_cim_estimates_exact_boost_when_b_is_certain(rng):
    theta = 20000
    for i in range(3):
        g = random_graph(rng, 5, 8)
        q = certain_b_gaps(rng)
        sets = rrset.generate_rrsets(g, q, [0], "rr_cim", 0, theta, master_seed=i)
        for s in [(1,), (2,), (3,), (4,), (1, 4), (2, 3)]:
            exact = world.exact_boost(g, q, [0], s)
            _assert_matches(sets, s, exact, g.n)


def test_cim_membership_is_boost(rng):
    for i in range(10):
        g = random_graph(rng, 6, 10)
        q = certain_b_gaps(rng)
        for j in range(8):
            pw = world.sample_world(g, q, RandomStream(i, STREAM_WORLD, j))
            members = {v: rrset.rr_cim(g, q, [0], v, FixedWorld(pw)).members for v in range(g.n)}
            base = world.deterministic_cascade(pw, q, [0], [])
            for size in (1, 2):
                for s in itertools.combinations(range(1, 6), size):
                    out = world.deterministic_cascade(pw, q, [0], s)
                    for v in range(g.n):
                        boosted = v in out.a_adopted and v not in base.a_adopted
                        assert boosted == (not members[v].isdisjoint(s))


def test_pair_only_boost_is_not_decomposable():
    # node 2 adopts A only when both 1 and 2 are B-seeds
    g = path_graph(3)
    q = GapSet(0.0, 0.84, 0.4, 1.0)
    w = _fixed(g, [0.0, 0.22, 0.06], [0.0, 0.9, 0.9])
    assert rrset.rr_cim(g, q, [0], 2, w).members == frozenset()
    for s in ([], [1], [2]):
        assert 2 not in world.deterministic_cascade(w.world, q, [0], s).a_adopted
    assert 2 in world.deterministic_cascade(w.world, q, [0], [1, 2]).a_adopted


def test_forward_label_without_draws():
    g = path_graph(3)
    q = GapSet(0.0, 1.0, 0.5, 0.5)
    labels = rrset.forward_label(g, q, [0], LazyWorld(g, RandomStream(0, 3, 0)))
    assert labels.label(0) == rrset.A_ADOPTED
    assert labels.label(1) == rrset.A_SUSPENDED
    assert labels.label(2) == rrset.A_POTENTIAL


def test_forward_label_thresholds():
    g = Graph(4, [0, 1, 0], [1, 2, 3], [1.0] * 3)
    q = GapSet(0.3, 0.8, 0.5, 1.0)
    labels = rrset.forward_label(g, q, [0], _fixed(g, [0.0, 0.5, 0.6, 0.9], [0.0] * 4))
    assert labels.label(1) == rrset.A_SUSPENDED
    assert labels.label(2) == rrset.A_POTENTIAL
    assert labels.label(3) == rrset.A_REJECTED
    labels = rrset.forward_label(g, q, [0], _fixed(g, [0.0, 0.1, 0.1, 0.2], [0.0] * 4))
    assert labels.label(1) == rrset.A_ADOPTED
    assert labels.label(2) == rrset.A_ADOPTED
    assert labels.label(3) == rrset.A_ADOPTED


def test_potential_node_is_promoted():
    # 2 is first reached from suspended 1, later from adopted 3
    g = Graph(5, [0, 1, 0, 4, 3], [1, 2, 4, 3, 2], [1.0] * 5)
    q = GapSet(0.3, 0.8, 0.5, 1.0)
    labels = rrset.forward_label(g, q, [0], _fixed(g, [0.0, 0.5, 0.1, 0.1, 0.1], [0.0] * 5))
    assert labels.label(2) == rrset.A_ADOPTED


def test_cim_without_a_seeds_is_empty():
    g = path_graph(3)
    rr = rrset.rr_cim(g, GapSet(0.3, 0.8, 0.5, 1.0), [], 2, LazyWorld(g, RandomStream(0, 3, 0)))
    assert rr.members == frozenset()


def test_cim_saturates_when_b_is_certain():
    g = Graph(4, [0, 2, 3], [1, 1, 2], [1.0] * 3)
    q = GapSet(0.0, 1.0, 1.0, 1.0)
    rr = rrset.rr_cim(g, q, [0], 1, LazyWorld(g, RandomStream(0, 3, 0)))
    assert rr.members == {0, 1, 2, 3}


def test_cim_cycle_case():
    # 0 seeds A, 1 is suspended and relays both items, 2 is potential and
    # relays only A, so B seeded at 2 must come back through 1
    g = Graph(4, [0, 1, 2, 2], [1, 2, 1, 3], [1.0] * 4)
    q = GapSet(0.3, 0.8, 0.5, 1.0)
    pw = world.PossibleWorld(g, [True] * 4, [0.0, 0.5, 0.6, 0.1], [0.0, 0.1, 0.9, 0.1], [(), (0, 2), (1,), (2,)], [0] * 4)
    rr = rrset.rr_cim(g, q, [0], 3, FixedWorld(pw))
    assert rr.members == {2}
    for b in range(g.n):
        with_b = world.deterministic_cascade(pw, q, [0], [b])
        without_b = world.deterministic_cascade(pw, q, [0], [])
        boosted = 3 in with_b.a_adopted and 3 not in without_b.a_adopted
        assert boosted == (b in rr.members)


def test_rr_generator():
    assert rrset.rr_generator("rr_sim") is rrset.rr_sim
    assert rrset.rr_generator("rr_cim", "compinfmax") is rrset.rr_cim
    with pytest.raises(rrset.RRSetError):
        rrset.rr_generator("rr_fast")
    with pytest.raises(rrset.RRSetError):
        rrset.rr_generator("rr_cim", "selfinfmax")
    with pytest.raises(rrset.RRSetError):
        rrset.rr_generator("rr_sim_plus", "compinfmax")


def test_to_json():
    rr = rrset.RRSet(3, frozenset([5, 1]), {"ept_b2": 4})
    doc = json.loads(rr.to_json())
    assert doc["root"] == 3
    assert doc["members"] == [1, 5]
    assert doc["counters"]["ept_b2"] == 4
    assert set(doc["counters"]) == set(rrset.COUNTERS)


def test_generation_does_not_depend_on_workers(rng):
    g = random_graph(rng, 8, 16)
    q = GapSet(0.3, 0.8, 0.5, 1.0)
    one = rrset.generate_rrsets(g, q, [0], "rr_cim", 10, 60, master_seed=5, workers=1)
    two = rrset.generate_rrsets(g, q, [0], "rr_cim", 10, 60, master_seed=5, workers=2)
    assert len(one) == 50
    assert one == two
