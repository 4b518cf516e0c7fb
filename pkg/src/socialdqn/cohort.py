"""Lockstep group-training engine for one trial.

Runs a cohort of independent learners, each in its own environment copy,
in episode rounds: every agent with remaining step budget plays one
episode (agents advance together one step at a time, which is exactly
equivalent to running them sequentially because nothing couples agents
between barriers), then the topology scheduler advances and one sharing
phase runs over the emitted graph. Greedy evaluations with sharing
deactivated fire whenever the slowest agent's step count crosses a
multiple of the evaluation interval; each evaluation records one
normalized episode return, final element, and trajectory per agent, and
optionally a fingerprint snapshot of every replay buffer.

A trial ends when every agent has taken exactly ``t_train`` environment
steps; an episode in progress is frozen mid-way for any agent whose
budget runs out, so budgets are matched exactly across agents.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, NamedTuple

import numpy as np

from .dqn import CohortDqn
from .metrics import BufferSnapshot, EvalRecord, fingerprint_batch
from .replay import FINGERPRINT_BYTES
from .sharing import SharingConfig, share_phase


class ShareEvent(NamedTuple):
    """One delivery logged at an episode barrier."""

    episode: int
    step: int
    sender: int
    receiver: int
    count: int


@dataclass
class TrainResult:
    eval_records: List[EvalRecord] = field(default_factory=list)
    share_events: List[ShareEvent] = field(default_factory=list)
    snapshots: List[BufferSnapshot] = field(default_factory=list)
    episodes: int = 0
    total_steps: np.ndarray | None = None


class GroupTrainer:
    """Drives one seeded trial: episodes, sharing barriers, evaluations.

    ``env_factory`` builds a vector environment for ``n_agents`` lockstep
    episodes; one instance is used for training and a separate one for
    evaluation so evaluation never perturbs training state. The sharing
    generator is a stream of its own, so turning sharing on or off never
    shifts any learner's randomness.
    """

    def __init__(
        self,
        env_factory: Callable[[], object],
        dqn: CohortDqn,
        scheduler,
        sharing: SharingConfig,
        share_rng: np.random.Generator,
        t_train: int,
        eval_interval: int,
        optimal_return: float,
        collect_mnemonics: bool = True,
    ):
        if t_train < 1:
            raise ValueError("t_train must be >= 1")
        if eval_interval < 1 or t_train % eval_interval != 0:
            raise ValueError("t_train must be a positive multiple of eval_interval")
        if optimal_return <= 0:
            raise ValueError("optimal_return must be positive")
        if collect_mnemonics and not dqn.config.store_fingerprints:
            raise ValueError("mnemonic metrics need store_fingerprints enabled")
        self.train_env = env_factory()
        self.eval_env = env_factory()
        if getattr(self.train_env, "n_envs", None) != dqn.n_agents:
            raise ValueError("environment batch size must equal the agent count")
        self.dqn = dqn
        self.scheduler = scheduler
        self.sharing = sharing
        self.share_rng = share_rng
        self.t_train = t_train
        self.eval_interval = eval_interval
        self.optimal_return = float(optimal_return)
        self.collect_mnemonics = collect_mnemonics
        self.total_steps = np.zeros(dqn.n_agents, dtype=np.int64)
        self.episodes = 0
        self.result = TrainResult()

    def run(self) -> TrainResult:
        """Train to the step budget; returns all collected records."""
        n_evals = 0
        while (self.total_steps < self.t_train).any():
            self._episode_round()
            self.episodes += 1
            graph = self.scheduler.step()
            barrier_step = int(self.total_steps.min())
            deliveries = share_phase(self.dqn.buffer, graph, self.sharing, self.share_rng)
            for sender, receiver, count in deliveries:
                self.result.share_events.append(
                    ShareEvent(self.episodes, barrier_step, sender, receiver, count)
                )
            while (n_evals + 1) * self.eval_interval <= self.total_steps.min():
                n_evals += 1
                self.evaluate(n_evals * self.eval_interval)
        self.result.episodes = self.episodes
        self.result.total_steps = self.total_steps.copy()
        return self.result

    def _episode_round(self) -> None:
        """One episode for every agent that still has step budget."""
        env = self.train_env
        batch = self.dqn.config.batch_size
        obs = env.reset_all()
        while True:
            acting = ~env.dones & (self.total_steps < self.t_train)
            if not acting.any():
                break
            actions = self.dqn.act(obs, greedy=False, active=acting)
            next_obs, rewards, dones = env.step(actions, active=acting)
            fingerprints = None
            if self.collect_mnemonics:
                rows = np.flatnonzero(acting)
                fingerprints = np.zeros(
                    (self.dqn.n_agents, FINGERPRINT_BYTES), dtype=np.uint8
                )
                fingerprints[rows] = fingerprint_batch(
                    obs[rows], actions[rows], rewards[rows], next_obs[rows], dones[rows]
                )
            self.dqn.observe(
                acting, obs, actions, rewards, next_obs, dones, fingerprints=fingerprints
            )
            self.total_steps[acting] += 1
            trainable = acting & (self.dqn.buffer.sizes >= batch)
            if trainable.any():
                self.dqn.train_step(trainable)
            obs = next_obs

    def evaluate(self, step: int) -> None:
        """One greedy episode per agent with sharing off; appends records.

        Greedy action selection consumes no randomness and nothing is
        written to any replay buffer, so evaluation cadence cannot change
        the course of training.
        """
        env = self.eval_env
        obs = env.reset_all()
        returns = np.zeros(self.dqn.n_agents)
        while not env.dones.all():
            actions = self.dqn.act(obs, greedy=True)
            obs, rewards, _ = env.step(actions)
            returns += rewards
        trajectories = env.trajectories
        for agent in range(self.dqn.n_agents):
            trajectory = tuple(trajectories[agent])
            self.result.eval_records.append(
                EvalRecord(
                    step=step,
                    agent=agent,
                    episode_return=float(returns[agent] / self.optimal_return),
                    final_element=trajectory[-1] if trajectory else -1,
                    trajectory=trajectory,
                )
            )
        if self.collect_mnemonics:
            self.result.snapshots.append(
                BufferSnapshot.from_replay(self.dqn.buffer, step=step)
            )
