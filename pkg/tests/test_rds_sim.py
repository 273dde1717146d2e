import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from rds_ss.domain import validate_sample
from rds_ss.errors import InsufficientEligibleNodes, ValidationError
from rds_ss.netgen import Graph, NetParams, sample_mixing_graph
from rds_ss.rds_sim import RdsDesign, SeedRegime, draw_seeds, run_rds


def graph(N, edges, z=None):
    z = np.zeros(N, dtype=np.int8) if z is None else np.asarray(z, dtype=np.int8)
    return Graph(N, z, np.array(edges, dtype=np.int64).reshape(-1, 2))


def test_design_validation():
    with pytest.raises(ValidationError):
        RdsDesign(5, seed_count=6)
    with pytest.raises(ValidationError):
        RdsDesign(5, seed_count=1, coupons=0)


def test_all_infected_forced():
    z = [1, 1, 1, 1, 1, 0, 0, 0]
    ring = [(i, (i + 1) % 8) for i in range(8)]
    g = graph(8, ring, z)
    seeds = draw_seeds(g, RdsDesign(5, 5, seed_regime=SeedRegime.ALL_INFECTED), 1)
    assert sorted(seeds) == [0, 1, 2, 3, 4]
    with pytest.raises(InsufficientEligibleNodes):
        draw_seeds(g, RdsDesign(6, 6, seed_regime=SeedRegime.ALL_INFECTED), 1)


def test_random_seeds_uniform_on_regular_graph():
    ring = [(i, (i + 1) % 10) for i in range(10)]
    g = graph(10, ring)
    rng = np.random.default_rng(4)
    hits = np.bincount([draw_seeds(g, RdsDesign(1, 1), rng)[0] for _ in range(5000)], minlength=10)
    assert chisquare(hits).pvalue > 0.001


def test_seed_pps_on_degree():
    # node 0 has degree 1, node 1 has degree 3 (one edge plus a loop)
    g = graph(2, [(0, 1), (1, 1)])
    assert g.degrees.tolist() == [1, 3]
    rng = np.random.default_rng(5)
    T = 8000
    share = np.mean([draw_seeds(g, RdsDesign(1, 1), rng)[0] == 1 for _ in range(T)])
    assert abs(share - 0.75) < 4 * np.sqrt(0.75 * 0.25 / T)


def test_path_graph_chain():
    # only node 0 is infected, so ALL_INFECTED forces the seed
    g = graph(3, [(0, 1), (1, 2)], [1, 0, 0])
    s = run_rds(g, RdsDesign(3, 1, seed_regime=SeedRegime.ALL_INFECTED), 0)
    assert [r.id for r in s] == ["0", "1", "2"]
    assert [r.wave for r in s] == [0, 1, 2]
    assert [r.recruiter_id for r in s] == [None, "0", "1"]
    assert not s.exhausted


def test_star_center_recruits_uniform_pair():
    z = [1, 0, 0, 0, 0, 0, 0]
    g = graph(7, [(0, i) for i in range(1, 7)], z)
    design = RdsDesign(3, 1, 2, SeedRegime.ALL_INFECTED)
    rng = np.random.default_rng(6)
    pairs = {}
    for _ in range(3000):
        s = run_rds(g, design, rng)
        assert s.n == 3 and s.records[0].id == "0"
        key = tuple(sorted(r.id for r in s.records[1:]))
        pairs[key] = pairs.get(key, 0) + 1
    assert len(pairs) == 15
    assert chisquare(list(pairs.values())).pvalue > 0.001


def test_disconnected_exhausts():
    z = [1, 1, 1, 0, 0, 0]
    g = graph(6, [(0, 1), (1, 2), (3, 4), (4, 5)], z)
    s = run_rds(g, RdsDesign(5, 1, 2, SeedRegime.ALL_INFECTED), 1)
    assert s.exhausted and s.n == 3
    s = run_rds(g, RdsDesign(5, 1, 2, SeedRegime.ALL_INFECTED, reseed=True), 1)
    assert not s.exhausted and s.n == 5


def test_multi_edge_weighting():
    # node 0 links to 1 three times and to 2 once
    g = graph(3, [(0, 1), (0, 1), (0, 1), (0, 2)], [1, 0, 0])
    rng = np.random.default_rng(8)
    T = 6000
    share = np.mean([run_rds(g, RdsDesign(2, 1, 1, SeedRegime.ALL_INFECTED), rng).records[1].id == "1"
                     for _ in range(T)])
    assert abs(share - 0.75) < 4 * np.sqrt(0.75 * 0.25 / T)


@pytest.mark.invariant
@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32), st.integers(10, 120), st.integers(1, 4))
def test_sample_structure(seed, target, coupons):
    g = sample_mixing_graph(NetParams(150, 0.2, 5, 1.4, 3), seed)
    s = run_rds(g, RdsDesign(target, 5, coupons), seed)
    assert validate_sample(s, 150) == []
    ids = [r.id for r in s]
    assert len(set(ids)) == len(ids)
    if not s.exhausted:
        assert s.n == target
    assert run_rds(g, RdsDesign(target, 5, coupons), seed).records == s.records


@pytest.mark.invariant
def test_full_coupons_give_bfs_census():
    N = 30
    rng = np.random.default_rng(2)
    edges = [(i, i + 1) for i in range(N - 1)] + [tuple(rng.choice(N, 2, replace=False)) for _ in range(20)]
    z = np.zeros(N, dtype=np.int8)
    z[0] = 1
    g = graph(N, edges, z)
    s = run_rds(g, RdsDesign(N, 1, N, SeedRegime.ALL_INFECTED), 3)
    assert s.n == N and not s.exhausted
    # waves equal BFS distances from the seed
    dist = {0: 0}
    frontier = [0]
    while frontier:
        nxt = []
        for u in frontier:
            for v in g.neighbors(u).tolist():
                if v not in dist:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
        frontier = nxt
    assert all(r.wave == dist[int(r.id)] for r in s)
