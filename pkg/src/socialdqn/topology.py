"""Social graphs and the per-episode schedulers that emit them.

A SocialGraph is an immutable undirected adjacency matrix over agent ids.
Static topologies (none, full, ring, small-world) are wrapped by
StaticScheduler; the two dynamic regimes are a paired-subgroup scheduler
where a lone visitor occasionally joins another pair, and a periodic
scheduler oscillating between full connectivity and isolation.
"""
from __future__ import annotations

import numpy as np


class SocialGraph:
    """Undirected simple graph over K agents, immutable once built."""

    def __init__(self, adjacency: np.ndarray):
        adj = np.array(adjacency, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency must be a square matrix")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        if adj.diagonal().any():
            raise ValueError("self-loops are not allowed")
        adj.flags.writeable = False
        self.adjacency = adj

    @property
    def n_agents(self) -> int:
        return self.adjacency.shape[0]

    def neighbors(self, agent: int) -> np.ndarray:
        return np.flatnonzero(self.adjacency[agent])

    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    def edges(self) -> list[tuple[int, int]]:
        """Sorted (low, high) pairs, one per undirected edge."""
        i, j = np.nonzero(np.triu(self.adjacency, k=1))
        return list(zip(i.tolist(), j.tolist()))


def no_sharing(n_agents: int) -> SocialGraph:
    if n_agents < 1:
        raise ValueError("n_agents must be >= 1")
    return SocialGraph(np.zeros((n_agents, n_agents), dtype=bool))


def fully_connected(n_agents: int) -> SocialGraph:
    if n_agents < 1:
        raise ValueError("n_agents must be >= 1")
    adj = np.ones((n_agents, n_agents), dtype=bool)
    np.fill_diagonal(adj, False)
    return SocialGraph(adj)


def ring(n_agents: int) -> SocialGraph:
    if n_agents < 3:
        raise ValueError("a ring needs at least 3 agents")
    adj = np.zeros((n_agents, n_agents), dtype=bool)
    idx = np.arange(n_agents)
    adj[idx, (idx + 1) % n_agents] = True
    adj[(idx + 1) % n_agents, idx] = True
    return SocialGraph(adj)


def small_world(
    n_agents: int, n_neighbors: int = 4, beta: float = 0.2,
    rng: np.random.Generator | None = None,
) -> SocialGraph:
    """Ring lattice with each edge's far endpoint rewired with probability beta.

    Starts from the lattice where node u connects to its n_neighbors nearest
    nodes, then sweeps offsets 1..n/2 and nodes in order, moving edge
    (u, u+j) to (u, w) with a uniformly drawn w that avoids self-loops and
    duplicates. Edge count is preserved; a node already connected to
    everything keeps its edge.
    """
    if n_neighbors % 2 != 0:
        raise ValueError("n_neighbors must be even")
    if n_neighbors >= n_agents:
        raise ValueError("n_neighbors must be smaller than n_agents")
    if rng is None:
        rng = np.random.default_rng()
    adj = np.zeros((n_agents, n_agents), dtype=bool)
    for j in range(1, n_neighbors // 2 + 1):
        for u in range(n_agents):
            v = (u + j) % n_agents
            adj[u, v] = adj[v, u] = True
    for j in range(1, n_neighbors // 2 + 1):
        for u in range(n_agents):
            if rng.random() >= beta:
                continue
            if adj[u].sum() >= n_agents - 1:
                continue  # saturated node: nowhere to rewire to
            v = (u + j) % n_agents
            w = int(rng.integers(n_agents))
            while w == u or adj[u, w]:
                w = int(rng.integers(n_agents))
            adj[u, v] = adj[v, u] = False
            adj[u, w] = adj[w, u] = True
    return SocialGraph(adj)


class StaticScheduler:
    """Emits the same graph at every episode barrier."""

    def __init__(self, graph: SocialGraph):
        self.graph = graph

    def step(self) -> SocialGraph:
        return self.graph


class PairedVisitScheduler:
    """Disjoint pairs with occasional solo visits to another pair.

    Agents (0,1), (2,3), ... form home pairs. While idle, each step starts a
    visit with probability visit_prob: a uniform visitor leaves its partner
    isolated and connects to both members of a uniformly chosen other pair.
    A visit spans exactly visit_length episodes, after which the home
    matching is restored for at least one episode; at most one visit is
    active at a time.
    """

    def __init__(self, n_agents: int, visit_prob: float, visit_length: int,
                 rng: np.random.Generator):
        if n_agents < 2 or n_agents % 2 != 0:
            raise ValueError("paired visits need an even number of agents >= 2")
        if not 0.0 <= visit_prob <= 1.0:
            raise ValueError("visit_prob must be in [0, 1]")
        if visit_length < 1:
            raise ValueError("visit_length must be >= 1")
        self.n_agents = n_agents
        self.visit_prob = visit_prob
        self.visit_length = visit_length
        self._rng = rng
        self.visit: tuple[int, int] | None = None  # (visitor, host pair index)
        self._remaining = 0
        self._matching = self._build(None)

    def _build(self, visit: tuple[int, int] | None) -> SocialGraph:
        adj = np.zeros((self.n_agents, self.n_agents), dtype=bool)
        for i in range(0, self.n_agents, 2):
            adj[i, i + 1] = adj[i + 1, i] = True
        if visit is not None:
            visitor, host = visit
            partner = visitor ^ 1
            adj[visitor, partner] = adj[partner, visitor] = False
            for member in (2 * host, 2 * host + 1):
                adj[visitor, member] = adj[member, visitor] = True
        return SocialGraph(adj)

    def step(self) -> SocialGraph:
        if self.visit is not None:
            self._remaining -= 1
            if self._remaining == 0:
                self.visit = None
                return self._matching
            return self._current
        if self._rng.random() < self.visit_prob:
            visitor = int(self._rng.integers(self.n_agents))
            own = visitor // 2
            others = [p for p in range(self.n_agents // 2) if p != own]
            host = others[int(self._rng.integers(len(others)))]
            self.visit = (visitor, host)
            self._remaining = self.visit_length
            self._current = self._build(self.visit)
            return self._current
        return self._matching


class PeriodicScheduler:
    """Alternates between full connectivity and isolation on a fixed clock."""

    def __init__(self, n_agents: int, high_length: int, low_length: int):
        if high_length < 1 or low_length < 1:
            raise ValueError("phase lengths must be >= 1")
        self.high_length = high_length
        self.low_length = low_length
        self._clock = 0
        self._full = fully_connected(n_agents)
        self._empty = no_sharing(n_agents)

    def step(self) -> SocialGraph:
        phase = self._clock % (self.high_length + self.low_length)
        self._clock += 1
        return self._full if phase < self.high_length else self._empty


def topology_scheduler(name: str, n_agents: int, rng: np.random.Generator | None = None,
                       **params):
    """Build the scheduler for a topology name used in experiment configs."""
    if name == "no_sharing":
        return StaticScheduler(no_sharing(n_agents))
    if name == "fully_connected":
        return StaticScheduler(fully_connected(n_agents))
    if name == "ring":
        return StaticScheduler(ring(n_agents))
    if name == "small_world":
        return StaticScheduler(
            small_world(
                n_agents,
                params.get("n_neighbors", 4),
                params.get("beta", 0.2),
                rng,
            )
        )
    if name == "dynamic_pairs":
        return PairedVisitScheduler(
            n_agents,
            params.get("visit_prob", 0.05),
            params.get("visit_length", 10),
            rng if rng is not None else np.random.default_rng(),
        )
    if name == "periodic":
        return PeriodicScheduler(
            n_agents,
            params.get("high_length", 10),
            params.get("low_length", 100),
        )
    raise ValueError(f"unknown topology {name!r}")
