import numpy as np
import pytest

from comic2seed import baselines, world
from comic2seed.baselines import BaselineError, BaselineSpec
from comic2seed.gaps import COMPINFMAX, SELFINFMAX, GapSet
from comic2seed.graph import Graph
from comic2seed.tim import TimParams, vanilla_ic_order

from conftest import one_way_gaps, random_graph, star_graph


IC = GapSet(1.0, 1.0, 0.0, 0.0)


def test_high_degree():
    g = star_graph(4)
    assert baselines.high_degree(g, 1) == [0]
    assert baselines.high_degree(g, 3) == [0, 1, 2]
    assert baselines.high_degree(g, 2, exclude=[0]) == [1, 2]


def _dense_page_rank(g, damping):
    n = g.n
    fan = g.in_degree().astype(float)
    P = np.zeros((n, n))
    for u, v in zip(g.src, g.dst):
        P[u, v] += 1.0 / fan[v]
    P[:, fan == 0] = 1.0 / n
    return np.linalg.solve(np.eye(n) - damping * P, np.full(n, (1.0 - damping) / n))


def test_page_rank_scores(rng):
    g = random_graph(rng, 12, 30)
    scores = baselines.page_rank_scores(g, 0.85, 200)
    assert scores.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(scores, _dense_page_rank(g, 0.85), atol=1e-6)


def test_page_rank_prefers_the_hub():
    g = star_graph(5)
    assert baselines.page_rank(g, 1) == [0]


def test_random_seeds():
    g = star_graph(9)
    one = baselines.random_seeds(g, 4, master_seed=3)
    assert one == baselines.random_seeds(g, 4, master_seed=3)
    assert len(set(one)) == 4
    assert 0 not in baselines.random_seeds(g, 9, master_seed=3, exclude=[0])
    assert len(baselines.random_seeds(g, 20, master_seed=3)) == g.n


def test_copying():
    g = Graph(5, [0, 0, 0, 1, 1, 2], [1, 2, 3, 2, 3, 4], [1.0] * 6)
    assert baselines.copying(g, [3, 1], 4) == [3, 1, 0, 2]
    assert baselines.copying(g, [3, 1, 4], 2) == [3, 1]


def test_baseline_errors():
    g = star_graph(3)
    with pytest.raises(BaselineError):
        BaselineSpec("celf")
    with pytest.raises(BaselineError):
        BaselineSpec("page_rank", damping=1.0)
    with pytest.raises(BaselineError):
        baselines.select_baseline(BaselineSpec("high_degree"), g, IC, SELFINFMAX, [], 5, master_seed=0)
    with pytest.raises(BaselineError):
        baselines.select_baseline(BaselineSpec("copying"), g, IC, COMPINFMAX, [], 2, master_seed=0)


def test_greedy_on_star():
    g = star_graph(4)
    assert baselines.greedy_mc(g, IC, SELFINFMAX, [], 1, mc_iters=10, master_seed=0) == [0]


def test_lazy_greedy_matches_plain_greedy(rng):
    for i in range(3):
        g = random_graph(rng, 10, 25)
        q = one_way_gaps(rng)
        lazy = baselines.greedy_mc(g, q, SELFINFMAX, [9], 3, mc_iters=200, master_seed=i, lazy=True)
        plain = baselines.greedy_mc(g, q, SELFINFMAX, [9], 3, mc_iters=200, master_seed=i, lazy=False)
        assert lazy == plain


def test_vanilla_ic_baseline(rng):
    g = random_graph(rng, 20, 50)
    params = TimParams(3)
    seeds = baselines.select_baseline(BaselineSpec("vanilla_ic"), g, IC, SELFINFMAX, [], 3, master_seed=5,
                                      params=params)
    assert seeds == vanilla_ic_order(g, 3, params, master_seed=5)


def test_copying_is_optimal_when_b_is_certain(rng):
    for _ in range(3):
        g = random_graph(rng, 5, 8)
        a0, ab = sorted(round(float(x), 2) for x in rng.uniform(0.05, 0.95, 2))
        q = GapSet(a0, ab, 1.0, 1.0)
        fixed = [0, 1]
        _, best = world.brute_force_optimal(g, q, COMPINFMAX, fixed, 2)
        copied = baselines.select_baseline(BaselineSpec("copying"), g, q, COMPINFMAX, fixed, 2, master_seed=0)
        assert copied == fixed
        assert world.exact_objective(g, q, COMPINFMAX, fixed, copied) == pytest.approx(best, abs=1e-9)
