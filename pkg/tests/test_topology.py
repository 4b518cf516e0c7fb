"""Tests for social graph generators and per-episode schedulers.

networkx serves as the independent oracle for lattice structure and
clustering; scheduler dynamics are checked against hand-derived sequences.
"""
import networkx as nx
import numpy as np
import pytest

from socialdqn.topology import (
    PairedVisitScheduler,
    PeriodicScheduler,
    SocialGraph,
    StaticScheduler,
    fully_connected,
    no_sharing,
    ring,
    small_world,
    topology_scheduler,
)


def to_nx(graph: SocialGraph) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(graph.n_agents))
    g.add_edges_from(graph.edges())
    return g


def check_simple(graph: SocialGraph):
    adj = graph.adjacency
    assert adj.dtype == np.bool_
    assert np.array_equal(adj, adj.T)
    assert not adj.diagonal().any()


def test_fully_connected():
    assert fully_connected(3).edges() == [(0, 1), (0, 2), (1, 2)]
    g = fully_connected(10)
    check_simple(g)
    assert (g.degrees() == 9).all()
    assert fully_connected(1).edges() == []
    with pytest.raises(ValueError):
        fully_connected(0)


def test_no_sharing_graph_is_empty():
    g = no_sharing(7)
    check_simple(g)
    assert g.edges() == []
    assert (g.degrees() == 0).all()


def test_ring():
    assert ring(4).edges() == [(0, 1), (0, 3), (1, 2), (2, 3)]
    g = ring(10)
    check_simple(g)
    assert len(g.edges()) == 10
    assert (g.degrees() == 2).all()
    assert np.array_equal(ring(3).adjacency, fully_connected(3).adjacency)
    with pytest.raises(ValueError):
        ring(2)


def test_graph_validation_and_immutability():
    bad = np.zeros((3, 3), dtype=bool)
    bad[0, 1] = True  # asymmetric
    with pytest.raises(ValueError):
        SocialGraph(bad)
    loop = np.zeros((2, 2), dtype=bool)
    loop[0, 0] = True
    with pytest.raises(ValueError):
        SocialGraph(loop)
    g = ring(5)
    with pytest.raises(ValueError):
        g.adjacency[0, 1] = False
    assert g.neighbors(0).tolist() == [1, 4]


def test_small_world_zero_beta_is_lattice():
    g = small_world(10, 4, 0.0, np.random.default_rng(0))
    check_simple(g)
    assert (g.degrees() == 4).all()
    expected = nx.watts_strogatz_graph(10, 4, 0.0)
    assert set(g.edges()) == {tuple(sorted(e)) for e in expected.edges()}


def test_small_world_preserves_edge_count():
    for beta in (0.0, 0.2, 0.5, 1.0):
        for seed in range(5):
            g = small_world(10, 4, beta, np.random.default_rng(seed))
            check_simple(g)
            assert len(g.edges()) == 20


def test_small_world_reproducible():
    a = small_world(20, 4, 0.2, np.random.default_rng(99))
    b = small_world(20, 4, 0.2, np.random.default_rng(99))
    c = small_world(20, 4, 0.2, np.random.default_rng(100))
    assert np.array_equal(a.adjacency, b.adjacency)
    assert not np.array_equal(a.adjacency, c.adjacency)


def test_small_world_rewiring_lowers_clustering():
    lattice = nx.average_clustering(to_nx(small_world(20, 4, 0.0, np.random.default_rng(0))))
    rewired = np.mean(
        [
            nx.average_clustering(to_nx(small_world(20, 4, 1.0, np.random.default_rng(s))))
            for s in range(100)
        ]
    )
    assert rewired < lattice


def test_small_world_parameter_validation():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        small_world(10, 3, 0.2, rng)  # odd n
    with pytest.raises(ValueError):
        small_world(4, 4, 0.2, rng)  # n >= K


def pair_matching_adjacency(k):
    adj = np.zeros((k, k), dtype=bool)
    for i in range(0, k, 2):
        adj[i, i + 1] = adj[i + 1, i] = True
    return adj


def test_paired_visits_idle_is_matching():
    sched = PairedVisitScheduler(8, visit_prob=0.0, visit_length=5,
                                 rng=np.random.default_rng(1))
    for _ in range(20):
        g = sched.step()
        check_simple(g)
        assert np.array_equal(g.adjacency, pair_matching_adjacency(8))
    assert sched.visit is None


def test_paired_visits_structure_during_visit():
    sched = PairedVisitScheduler(8, visit_prob=1.0, visit_length=3,
                                 rng=np.random.default_rng(2))
    g = sched.step()
    check_simple(g)
    assert sched.visit is not None
    visitor, host = sched.visit
    partner = visitor ^ 1  # pairs are (0,1), (2,3), ...
    host_a, host_b = 2 * host, 2 * host + 1
    assert visitor not in (host_a, host_b)
    adj = g.adjacency
    assert adj[visitor, host_a] and adj[visitor, host_b]
    assert adj[host_a, host_b]
    assert not adj[visitor, partner]
    assert g.degrees()[partner] == 0
    assert len(g.edges()) == 8 // 2 + 1
    # all uninvolved pairs keep their edge
    for i in range(0, 8, 2):
        if i not in (host_a,) and visitor not in (i, i + 1):
            assert adj[i, i + 1]


def test_paired_visits_duration_and_restoration():
    sched = PairedVisitScheduler(6, visit_prob=1.0, visit_length=2,
                                 rng=np.random.default_rng(3))
    kinds = []
    for _ in range(9):
        g = sched.step()
        kinds.append("visit" if sched.visit is not None else "home")
        if sched.visit is None:
            assert np.array_equal(g.adjacency, pair_matching_adjacency(6))
    # visits last exactly 2 episodes, then one restored episode, then repeat
    assert kinds == ["visit", "visit", "home"] * 3


def test_paired_visits_initiation_frequency():
    p = 0.05
    sched = PairedVisitScheduler(8, visit_prob=p, visit_length=1,
                                 rng=np.random.default_rng(4))
    idle_entries = 0
    starts = 0
    for _ in range(100_000):
        was_idle = sched.visit is None
        sched.step()
        if was_idle:
            idle_entries += 1
            starts += sched.visit is not None
    sigma = np.sqrt(idle_entries * p * (1 - p))
    assert abs(starts - idle_entries * p) < 3 * sigma


def test_paired_visits_visitor_and_host_are_uniform():
    rng = np.random.default_rng(5)
    visitors = np.zeros(6)
    hosts = np.zeros(3)
    for _ in range(2000):
        sched = PairedVisitScheduler(6, visit_prob=1.0, visit_length=1, rng=rng)
        sched.step()
        visitor, host = sched.visit
        visitors[visitor] += 1
        hosts[host] += 1
        assert host != visitor // 2  # host subgroup excludes the visitor's own
    assert (visitors > 0).all()
    assert (hosts > 0).all()


def test_paired_visits_requires_even_k():
    with pytest.raises(ValueError):
        PairedVisitScheduler(5, visit_prob=0.1, visit_length=2,
                             rng=np.random.default_rng(0))


def test_periodic_alternation():
    sched = PeriodicScheduler(4, high_length=1, low_length=1)
    counts = []
    for _ in range(6):
        counts.append(len(sched.step().edges()))
    assert counts == [6, 0, 6, 0, 6, 0]


def test_periodic_phase_layout():
    high, low = 3, 5
    sched = PeriodicScheduler(5, high_length=high, low_length=low)
    kinds = ["full" if len(sched.step().edges()) else "empty" for _ in range(2 * (high + low))]
    assert kinds == (["full"] * high + ["empty"] * low) * 2


def test_periodic_validation():
    with pytest.raises(ValueError):
        PeriodicScheduler(4, high_length=0, low_length=1)
    with pytest.raises(ValueError):
        PeriodicScheduler(4, high_length=1, low_length=0)


def test_schedulers_always_emit_simple_graphs():
    rng = np.random.default_rng(6)
    schedulers = [
        StaticScheduler(fully_connected(6)),
        StaticScheduler(ring(6)),
        PairedVisitScheduler(6, visit_prob=0.3, visit_length=3, rng=rng),
        PeriodicScheduler(6, high_length=2, low_length=3),
    ]
    for sched in schedulers:
        for _ in range(10_000):
            check_simple(sched.step())


def test_static_scheduler_returns_same_graph():
    g = ring(5)
    sched = StaticScheduler(g)
    assert sched.step() is g
    assert sched.step() is g


def test_topology_scheduler_factory():
    rng = np.random.default_rng(7)
    cases = {
        "no_sharing": 0,
        "fully_connected": 15,
        "ring": 6,
        "small_world": 12,
    }
    for name, n_edges in cases.items():
        sched = topology_scheduler(name, 6, rng=rng)
        g = sched.step()
        assert g.n_agents == 6
        assert len(g.edges()) == n_edges
    dyn = topology_scheduler("dynamic_pairs", 6, rng=rng, visit_prob=0.0, visit_length=2)
    assert np.array_equal(dyn.step().adjacency, pair_matching_adjacency(6))
    per = topology_scheduler("periodic", 6, rng=rng, high_length=1, low_length=1)
    assert len(per.step().edges()) == 15
    assert len(per.step().edges()) == 0
    with pytest.raises(ValueError):
        topology_scheduler("mesh", 6, rng=rng)
