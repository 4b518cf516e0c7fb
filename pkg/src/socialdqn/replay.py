"""Experience replay: a stacked per-agent ring store plus a scalar facade.

CohortReplay keeps one ring buffer per agent in contiguous arrays so a whole
cohort can insert in one call per environment step. Sampling is per agent with
that agent's own generator, uniform without replacement or proportional to
priority^alpha with importance weights. An optional 16-byte fingerprint column
rides along with each transition for the mnemonic metrics.
"""
from __future__ import annotations

import numpy as np

from .wordcraft import Transition

FINGERPRINT_BYTES = 16


class CohortReplay:
    def __init__(
        self,
        n_agents: int,
        capacity: int,
        obs_size: int,
        store_fingerprints: bool = False,
        prioritized: bool = False,
        priority_alpha: float = 0.6,
        priority_beta: float = 0.4,
    ):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.n_agents = n_agents
        self.capacity = capacity
        self.obs_size = obs_size
        self.prioritized = prioritized
        self.priority_alpha = priority_alpha
        self.priority_beta = priority_beta
        self.states = np.zeros((n_agents, capacity, obs_size), dtype=np.float32)
        self.actions = np.zeros((n_agents, capacity), dtype=np.int64)
        self.rewards = np.zeros((n_agents, capacity), dtype=np.float64)
        self.next_states = np.zeros((n_agents, capacity, obs_size), dtype=np.float32)
        self.terminals = np.zeros((n_agents, capacity), dtype=bool)
        self.counts = np.zeros(n_agents, dtype=np.int64)  # total ever inserted
        self.fingerprints = (
            np.zeros((n_agents, capacity, FINGERPRINT_BYTES), dtype=np.uint8)
            if store_fingerprints
            else None
        )
        self.priorities = (
            np.zeros((n_agents, capacity), dtype=np.float64) if prioritized else None
        )

    @property
    def sizes(self) -> np.ndarray:
        return np.minimum(self.counts, self.capacity)

    def insert(
        self,
        mask: np.ndarray,
        states: np.ndarray,
        actions: np.ndarray,
        rewards: np.ndarray,
        next_states: np.ndarray,
        terminals: np.ndarray,
        fingerprints: np.ndarray | None = None,
    ) -> None:
        """Insert one transition per masked agent, evicting FIFO at capacity."""
        rows = np.flatnonzero(mask)
        if rows.size == 0:
            return
        slots = self.counts[rows] % self.capacity
        self.states[rows, slots] = states[rows]
        self.actions[rows, slots] = actions[rows]
        self.rewards[rows, slots] = rewards[rows]
        self.next_states[rows, slots] = next_states[rows]
        self.terminals[rows, slots] = terminals[rows]
        if self.fingerprints is not None:
            if fingerprints is None:
                raise ValueError("store_fingerprints is on; insert needs fingerprints")
            self.fingerprints[rows, slots] = fingerprints[rows]
        if self.priorities is not None:
            for row, slot in zip(rows, slots):
                size = min(self.counts[row], self.capacity)
                self.priorities[row, slot] = (
                    self.priorities[row, :size].max() if size else 1.0
                )
        self.counts[rows] += 1

    def insert_one(self, agent: int, state, action, reward, next_state, terminal,
                   fingerprint=None) -> None:
        """Single-agent convenience wrapper over insert()."""
        mask = np.zeros(self.n_agents, dtype=bool)
        mask[agent] = True
        k = self.n_agents
        fps = None
        if fingerprint is not None:
            fps = np.zeros((k, FINGERPRINT_BYTES), dtype=np.uint8)
            fps[agent] = np.frombuffer(bytes(fingerprint), dtype=np.uint8)
        states = np.zeros((k, self.obs_size), dtype=np.float32)
        nexts = np.zeros((k, self.obs_size), dtype=np.float32)
        states[agent] = state
        nexts[agent] = next_state
        self.insert(
            mask,
            states,
            np.full(k, action, dtype=np.int64),
            np.full(k, reward, dtype=np.float64),
            nexts,
            np.full(k, terminal, dtype=bool),
            fps,
        )

    def insert_many(
        self,
        agent: int,
        states: np.ndarray,
        actions: np.ndarray,
        rewards: np.ndarray,
        next_states: np.ndarray,
        terminals: np.ndarray,
        fingerprints: np.ndarray | None = None,
    ) -> None:
        """Append a block of transitions for one agent, FIFO at capacity.

        Equivalent to inserting the rows one at a time: in prioritized mode
        every arrival takes the receiver's current max priority.
        """
        n = len(actions)
        if n == 0:
            return
        if n > self.capacity:  # only the last capacity rows can survive
            cut = slice(n - self.capacity, None)
            states, actions, rewards = states[cut], actions[cut], rewards[cut]
            next_states, terminals = next_states[cut], terminals[cut]
            if fingerprints is not None:
                fingerprints = fingerprints[cut]
            self.counts[agent] += n - self.capacity
            n = self.capacity
        slots = (self.counts[agent] + np.arange(n)) % self.capacity
        self.states[agent, slots] = states
        self.actions[agent, slots] = actions
        self.rewards[agent, slots] = rewards
        self.next_states[agent, slots] = next_states
        self.terminals[agent, slots] = terminals
        if self.fingerprints is not None:
            if fingerprints is None:
                raise ValueError("store_fingerprints is on; insert needs fingerprints")
            self.fingerprints[agent, slots] = fingerprints
        if self.priorities is not None:
            size = min(int(self.counts[agent]), self.capacity)
            value = self.priorities[agent, :size].max() if size else 1.0
            self.priorities[agent, slots] = value
        self.counts[agent] += n

    def gather(self, agent: int, idx: np.ndarray):
        """Copy out a batch of transitions by slot index."""
        return (
            self.states[agent, idx],
            self.actions[agent, idx],
            self.rewards[agent, idx],
            self.next_states[agent, idx],
            self.terminals[agent, idx],
        )

    def sample_uniform(self, agent: int, n: int, rng: np.random.Generator) -> np.ndarray:
        size = int(self.sizes[agent])
        if size == 0:
            raise ValueError("cannot sample from an empty buffer")
        return rng.choice(size, size=n, replace=n > size)

    def sample_prioritized(
        self, agent: int, n: int, rng: np.random.Generator
    ) -> tuple[np.ndarray, np.ndarray]:
        if self.priorities is None:
            raise ValueError("buffer was built without prioritized mode")
        size = int(self.sizes[agent])
        if size == 0:
            raise ValueError("cannot sample from an empty buffer")
        p = self.priorities[agent, :size] ** self.priority_alpha
        p /= p.sum()
        idx = rng.choice(size, size=n, replace=True, p=p)
        weights = (size * p[idx]) ** -self.priority_beta
        weights /= weights.max()
        return idx, weights

    def update_priorities(self, agent: int, idx: np.ndarray, priorities: np.ndarray) -> None:
        if self.priorities is None:
            raise ValueError("buffer was built without prioritized mode")
        priorities = np.asarray(priorities, dtype=np.float64)
        if (priorities <= 0).any():
            raise ValueError("priorities must be strictly positive")
        self.priorities[agent, idx] = priorities

    def fingerprints_of(self, agent: int) -> np.ndarray:
        """Snapshot copy of the agent's stored fingerprints (size, 16)."""
        if self.fingerprints is None:
            raise ValueError("buffer was built without fingerprint storage")
        return self.fingerprints[agent, : self.sizes[agent]].copy()


class ReplayBuffer:
    """Single-agent facade over CohortReplay with the Transition interface."""

    def __init__(
        self,
        capacity: int,
        obs_size: int,
        prioritized: bool = False,
        priority_alpha: float = 0.6,
        priority_beta: float = 0.4,
        store_fingerprints: bool = False,
    ):
        self._c = CohortReplay(
            1,
            capacity,
            obs_size,
            store_fingerprints=store_fingerprints,
            prioritized=prioritized,
            priority_alpha=priority_alpha,
            priority_beta=priority_beta,
        )

    def __len__(self) -> int:
        return int(self._c.sizes[0])

    @property
    def core(self) -> CohortReplay:
        """The backing one-row cohort store (used by the sharing phase)."""
        return self._c

    @property
    def capacity(self) -> int:
        return self._c.capacity

    @property
    def prioritized(self) -> bool:
        return self._c.prioritized

    @property
    def priority_beta(self) -> float:
        return self._c.priority_beta

    @property
    def priorities(self) -> np.ndarray:
        return self._c.priorities[0, : len(self)]

    def insert(self, transition: Transition, fingerprint: bytes | None = None) -> None:
        self._c.insert_one(
            0,
            transition.state,
            transition.action,
            transition.reward,
            transition.next_state,
            transition.terminal,
            fingerprint,
        )

    def sample(self, n: int, rng: np.random.Generator):
        idx = self._c.sample_uniform(0, n, rng)
        return self._c.gather(0, idx)

    def sample_prioritized(self, n: int, rng: np.random.Generator):
        return self._c.sample_prioritized(0, n, rng)

    def gather(self, idx: np.ndarray):
        return self._c.gather(0, idx)

    def update_priorities(self, idx: np.ndarray, priorities: np.ndarray) -> None:
        self._c.update_priorities(0, idx, priorities)

    def fingerprints(self) -> np.ndarray:
        return self._c.fingerprints_of(0)
