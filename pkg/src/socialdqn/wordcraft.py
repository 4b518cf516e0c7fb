"""Crafting environment over a recipe book.

Observations are flat float32 vectors: inventory bits for all elements
followed by the current-selection bits. Actions are element ids. A craft
attempt takes two selection actions; the recipe fires on the second one if
both components are in the inventory and the pair is in the book. A crafted
element pays its reward only the first time it appears in an episode, and the
episode ends when the selection counter reaches the task horizon.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .recipes import TaskSpec


@dataclass
class Transition:
    """One experience tuple as stored in replay buffers."""

    state: np.ndarray
    action: int
    next_state: np.ndarray
    reward: float
    terminal: bool


class WordcraftEnv:
    """Single-agent episodic environment for one TaskSpec."""

    def __init__(self, task: TaskSpec):
        self.task = task
        self._book = task.recipe_book
        self._n = len(self._book.elements)
        self._initial = np.zeros(self._n, dtype=bool)
        self._initial[self._book.initial_set] = True
        self._inventory = self._initial.copy()
        self._current: int | None = None
        self._steps = task.horizon  # before reset the env reads as terminal
        self._trajectory: list[int] = []

    @property
    def observation_size(self) -> int:
        return 2 * self._n

    @property
    def n_actions(self) -> int:
        return self._n

    @property
    def steps(self) -> int:
        return self._steps

    @property
    def terminal(self) -> bool:
        return self._steps >= self.task.horizon

    @property
    def trajectory(self) -> tuple[int, ...]:
        """Element ids crafted this episode, in craft order."""
        return tuple(self._trajectory)

    def _observation(self) -> np.ndarray:
        obs = np.zeros(2 * self._n, dtype=np.float32)
        obs[: self._n] = self._inventory
        if self._current is not None:
            obs[self._n + self._current] = 1.0
        return obs

    def reset(self) -> np.ndarray:
        self._inventory = self._initial.copy()
        self._current = None
        self._steps = 0
        self._trajectory = []
        return self._observation()

    def step(self, action: int) -> tuple[np.ndarray, float, bool]:
        if self.terminal:
            raise RuntimeError("episode is terminal; call reset()")
        action = int(action)
        if not 0 <= action < self._n:
            raise ValueError(f"action {action} outside [0, {self._n})")
        reward = 0.0
        if self._current is None:
            self._current = action
        else:
            out = self._book.lookup(self._current, action)
            if (
                out is not None
                and self._inventory[self._current]
                and self._inventory[action]
                and not self._inventory[out]
            ):
                self._inventory[out] = True
                reward = float(self._book.rewards[out])
                self._trajectory.append(out)
            self._current = None
        self._steps += 1
        return self._observation(), reward, self.terminal


class VectorWordcraft:
    """Lockstep batch of identical crafting environments.

    All episodes share the task horizon, so agents finish simultaneously;
    stepping an already-finished batch is a no-op for every done agent,
    and step() takes an optional boolean mask freezing further agents in
    place (used to cap per-agent step budgets mid-episode). Recipe lookup
    is a dense (|X|, |X|) table for vectorized stepping.
    """

    def __init__(self, task: TaskSpec, n_envs: int):
        if n_envs < 1:
            raise ValueError("n_envs must be >= 1")
        self.task = task
        self.n_envs = n_envs
        book = task.recipe_book
        n = len(book.elements)
        self._n = n
        self._table = np.full((n, n), -1, dtype=np.int32)
        for (a, b), out in book.entries.items():
            self._table[a, b] = out
            self._table[b, a] = out
        self._reward_vec = np.zeros(n, dtype=np.float64)
        for eid, r in book.rewards.items():
            self._reward_vec[eid] = r
        self._initial = np.zeros(n, dtype=bool)
        self._initial[book.initial_set] = True
        self._inventory = np.tile(self._initial, (n_envs, 1))
        self._current = np.full(n_envs, -1, dtype=np.int64)
        self.steps = np.full(n_envs, task.horizon, dtype=np.int64)
        self.dones = np.ones(n_envs, dtype=bool)
        self._trajectories: list[list[int]] = [[] for _ in range(n_envs)]

    @property
    def observation_size(self) -> int:
        return 2 * self._n

    @property
    def n_actions(self) -> int:
        return self._n

    @property
    def trajectories(self) -> list[tuple[int, ...]]:
        return [tuple(t) for t in self._trajectories]

    def _observations(self) -> np.ndarray:
        obs = np.zeros((self.n_envs, 2 * self._n), dtype=np.float32)
        obs[:, : self._n] = self._inventory
        rows = np.flatnonzero(self._current >= 0)
        obs[rows, self._n + self._current[rows]] = 1.0
        return obs

    def reset_all(self) -> np.ndarray:
        self._inventory[:] = self._initial
        self._current[:] = -1
        self.steps[:] = 0
        self.dones[:] = self.task.horizon == 0
        self._trajectories = [[] for _ in range(self.n_envs)]
        return self._observations()

    def step(
        self, actions: np.ndarray, active: np.ndarray | None = None
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        actions = np.asarray(actions, dtype=np.int64)
        if actions.shape != (self.n_envs,):
            raise ValueError(f"actions must have shape ({self.n_envs},)")
        if ((actions < 0) | (actions >= self._n)).any():
            raise ValueError("action outside the element range")
        rewards = np.zeros(self.n_envs, dtype=np.float64)
        acting = ~self.dones
        if active is not None:
            acting &= np.asarray(active, dtype=bool)
        first = acting & (self.steps % 2 == 0)
        second = acting & ~first
        self._current[first] = actions[first]
        idx = np.flatnonzero(second)
        if idx.size:
            cur = self._current[idx]
            act = actions[idx]
            out = self._table[cur, act]
            valid = (
                (out >= 0)
                & self._inventory[idx, cur]
                & self._inventory[idx, act]
            )
            new = valid & ~self._inventory[idx, np.where(out >= 0, out, 0)]
            hit = idx[new]
            crafted = out[new]
            self._inventory[hit, crafted] = True
            rewards[hit] = self._reward_vec[crafted]
            for row, eid in zip(hit, crafted):
                self._trajectories[row].append(int(eid))
            self._current[idx] = -1
        self.steps[acting] += 1
        self.dones = self.steps >= self.task.horizon
        return self._observations(), rewards, self.dones.copy()
