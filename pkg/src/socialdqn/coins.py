"""Deceptive corridor gridworld.

A 13-cell corridor with the agent starting at cell 6. The left arm holds one
diamond (cell 4) and a terminal fire bonus of +1 at cell 0, totalling 2; the
right arm holds three diamonds (cells 9-11) and a terminal fire bonus of +2 at
cell 12, totalling 5. Entering cell 4 or cell 10 raises a one-way barrier so
the agent cannot change arms afterwards; a blocked move stays in place and
still consumes a step. Episodes time out after 14 steps. The left diamond is
two moves from the start and the right arm's first diamond three, so greedy
exploration is pulled toward the poorer arm.
"""
from __future__ import annotations

import numpy as np

LEFT, RIGHT = 0, 1
COMMITTED_NONE, COMMITTED_LEFT, COMMITTED_RIGHT = 0, 1, 2

N_CELLS = 13
START_CELL = 6
TIMEOUT = 14
DIAMOND_CELLS = (4, 9, 10, 11)
LEFT_FIRE_CELL, RIGHT_FIRE_CELL = 0, 12
LEFT_FIRE_BONUS, RIGHT_FIRE_BONUS = 1.0, 2.0
LEFT_COMMIT_CELL, RIGHT_COMMIT_CELL = 4, 10

OBSERVATION_SIZE = N_CELLS + len(DIAMOND_CELLS) + 3
_DIAMOND_INDEX = {cell: i for i, cell in enumerate(DIAMOND_CELLS)}


class CoinsEnv:
    """Single-agent episodic corridor environment."""

    def __init__(self):
        self.position = START_CELL
        self.collected = np.zeros(len(DIAMOND_CELLS), dtype=bool)
        self.committed = COMMITTED_NONE
        self.steps = 0
        self._done = True  # unusable until reset

    @property
    def observation_size(self) -> int:
        return OBSERVATION_SIZE

    @property
    def n_actions(self) -> int:
        return 2

    @property
    def terminal(self) -> bool:
        return self._done

    def _observation(self) -> np.ndarray:
        obs = np.zeros(OBSERVATION_SIZE, dtype=np.float32)
        obs[self.position] = 1.0
        obs[N_CELLS : N_CELLS + len(DIAMOND_CELLS)] = self.collected
        obs[N_CELLS + len(DIAMOND_CELLS) + self.committed] = 1.0
        return obs

    def reset(self) -> np.ndarray:
        self.position = START_CELL
        self.collected[:] = False
        self.committed = COMMITTED_NONE
        self.steps = 0
        self._done = False
        return self._observation()

    def step(self, action: int) -> tuple[np.ndarray, float, bool]:
        if self._done:
            raise RuntimeError("episode is terminal; call reset()")
        action = int(action)
        if action not in (LEFT, RIGHT):
            raise ValueError(f"action must be {LEFT} or {RIGHT}, got {action}")
        target = self.position + (1 if action == RIGHT else -1)
        if not 0 <= target < N_CELLS:
            target = self.position
        if self.committed == COMMITTED_LEFT and target > LEFT_COMMIT_CELL:
            target = self.position
        if self.committed == COMMITTED_RIGHT and target < RIGHT_COMMIT_CELL:
            target = self.position
        self.position = target
        if self.committed == COMMITTED_NONE:
            if self.position == LEFT_COMMIT_CELL:
                self.committed = COMMITTED_LEFT
            elif self.position == RIGHT_COMMIT_CELL:
                self.committed = COMMITTED_RIGHT
        reward = 0.0
        slot = _DIAMOND_INDEX.get(self.position)
        if slot is not None and not self.collected[slot]:
            self.collected[slot] = True
            reward += 1.0
        if self.position == LEFT_FIRE_CELL:
            reward += LEFT_FIRE_BONUS
            self._done = True
        elif self.position == RIGHT_FIRE_CELL:
            reward += RIGHT_FIRE_BONUS
            self._done = True
        self.steps += 1
        if self.steps >= TIMEOUT:
            self._done = True
        return self._observation(), reward, self._done


    def render(self) -> str:
        cells = []
        for c in range(N_CELLS):
            if c == self.position:
                cells.append("@")
            elif c in (LEFT_FIRE_CELL, RIGHT_FIRE_CELL):
                cells.append("F")
            elif c in _DIAMOND_INDEX and not self.collected[_DIAMOND_INDEX[c]]:
                cells.append("d")
            else:
                cells.append(".")
        bar = {COMMITTED_NONE: "", COMMITTED_LEFT: " |left", COMMITTED_RIGHT: " |right"}
        return "[" + "".join(cells) + "]" + bar[self.committed]


class VectorCoins:
    """Lockstep batch of corridor environments with per-agent termination.

    Agents whose episode ended (fire or timeout) are frozen by step() until
    reset_all(); their rewards read 0 and their done flags stay set. step()
    also takes an optional boolean mask freezing further agents in place
    (used to cap per-agent step budgets mid-episode).
    """

    def __init__(self, n_envs: int):
        if n_envs < 1:
            raise ValueError("n_envs must be >= 1")
        self.n_envs = n_envs
        self.positions = np.full(n_envs, START_CELL, dtype=np.int64)
        self.collected = np.zeros((n_envs, len(DIAMOND_CELLS)), dtype=bool)
        self.committed = np.zeros(n_envs, dtype=np.int64)
        self.steps = np.zeros(n_envs, dtype=np.int64)
        self.dones = np.ones(n_envs, dtype=bool)
        self._diamond_slot = np.full(N_CELLS, -1, dtype=np.int64)
        for cell, i in _DIAMOND_INDEX.items():
            self._diamond_slot[cell] = i
        self._trajectories: list[list[int]] = [[] for _ in range(n_envs)]

    @property
    def trajectories(self) -> list[tuple[int, ...]]:
        """Per agent, the diamond cells collected this episode, in order."""
        return [tuple(t) for t in self._trajectories]

    @property
    def observation_size(self) -> int:
        return OBSERVATION_SIZE

    @property
    def n_actions(self) -> int:
        return 2

    def _observations(self) -> np.ndarray:
        obs = np.zeros((self.n_envs, OBSERVATION_SIZE), dtype=np.float32)
        rows = np.arange(self.n_envs)
        obs[rows, self.positions] = 1.0
        obs[:, N_CELLS : N_CELLS + len(DIAMOND_CELLS)] = self.collected
        obs[rows, N_CELLS + len(DIAMOND_CELLS) + self.committed] = 1.0
        return obs

    def reset_all(self) -> np.ndarray:
        self.positions[:] = START_CELL
        self.collected[:] = False
        self.committed[:] = COMMITTED_NONE
        self.steps[:] = 0
        self.dones[:] = False
        self._trajectories = [[] for _ in range(self.n_envs)]
        return self._observations()

    def step(
        self, actions: np.ndarray, active: np.ndarray | None = None
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        actions = np.asarray(actions, dtype=np.int64)
        if actions.shape != (self.n_envs,):
            raise ValueError(f"actions must have shape ({self.n_envs},)")
        if ((actions < 0) | (actions > 1)).any():
            raise ValueError("actions must be 0 (left) or 1 (right)")
        acting = ~self.dones
        if active is not None:
            acting &= np.asarray(active, dtype=bool)
        rewards = np.zeros(self.n_envs, dtype=np.float64)
        target = self.positions + np.where(actions == RIGHT, 1, -1)
        blocked = (
            (target < 0)
            | (target >= N_CELLS)
            | ((self.committed == COMMITTED_LEFT) & (target > LEFT_COMMIT_CELL))
            | ((self.committed == COMMITTED_RIGHT) & (target < RIGHT_COMMIT_CELL))
        )
        target = np.where(blocked, self.positions, target)
        self.positions[acting] = target[acting]
        none = acting & (self.committed == COMMITTED_NONE)
        self.committed[none & (self.positions == LEFT_COMMIT_CELL)] = COMMITTED_LEFT
        self.committed[none & (self.positions == RIGHT_COMMIT_CELL)] = COMMITTED_RIGHT
        slot = self._diamond_slot[self.positions]
        rows = np.arange(self.n_envs)
        fresh = acting & (slot >= 0) & ~self.collected[rows, np.maximum(slot, 0)]
        self.collected[rows[fresh], slot[fresh]] = True
        rewards[fresh] += 1.0
        for row in rows[fresh]:
            self._trajectories[row].append(int(self.positions[row]))
        left_fire = acting & (self.positions == LEFT_FIRE_CELL)
        right_fire = acting & (self.positions == RIGHT_FIRE_CELL)
        rewards[left_fire] += LEFT_FIRE_BONUS
        rewards[right_fire] += RIGHT_FIRE_BONUS
        self.steps[acting] += 1
        self.dones |= left_fire | right_fire | (self.steps >= TIMEOUT)
        return self._observations(), rewards, self.dones.copy()
