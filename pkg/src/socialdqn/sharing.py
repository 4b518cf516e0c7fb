"""Experience exchange over a social graph at episode barriers.

Each agent fires one Bernoulli(share_prob) per phase; a firing agent sends an
independent sample of its buffer to every current neighbor. All samples are
drawn from the buffers as they stood when the phase began, and the insertions
are applied afterwards in ascending (sender, receiver) order, so nothing
received during a phase can be relayed within the same phase and the whole
phase is reproducible from one generator.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .replay import CohortReplay, ReplayBuffer
from .topology import SocialGraph

MODES = ("uniform", "prioritized")


@dataclass
class SharingConfig:
    share_prob: float = 1.0  # per-agent, per-episode Bernoulli
    batch_length: int = 6  # transitions per (sender, receiver) delivery
    mode: str = "uniform"

    def __post_init__(self):
        if not 0.0 <= self.share_prob <= 1.0:
            raise ValueError("share_prob must be in [0, 1]")
        if self.batch_length < 1:
            raise ValueError("batch_length must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")


def _buffer_rows(buffers) -> list[tuple[CohortReplay, int]]:
    if isinstance(buffers, CohortReplay):
        return [(buffers, k) for k in range(buffers.n_agents)]
    rows = []
    for item in buffers:
        core = item.core if isinstance(item, ReplayBuffer) else item
        if isinstance(core, CohortReplay) and core.n_agents == 1:
            rows.append((core, 0))
        else:
            raise TypeError("buffers must be a CohortReplay or a list of ReplayBuffer")
    return rows


def share_phase(
    buffers,
    graph: SocialGraph,
    config: SharingConfig,
    rng: np.random.Generator,
) -> list[tuple[int, int, int]]:
    """Run one exchange phase; returns (sender, receiver, count) triples.

    Exactly one Bernoulli draw is consumed per agent whether or not it fires,
    then one sample draw per (firing sender, neighbor) with a non-empty
    buffer. A delivery is min(batch_length, sender size) transitions, sampled
    without replacement, uniformly or in proportion to raw priorities.
    """
    rows = _buffer_rows(buffers)
    n_agents = graph.n_agents
    if len(rows) != n_agents:
        raise ValueError(f"got {len(rows)} buffers for a {n_agents}-agent graph")
    log: list[tuple[int, int, int]] = []
    pending = []
    for sender in range(n_agents):
        fired = rng.random() < config.share_prob
        if not fired:
            continue
        core, row = rows[sender]
        size = int(core.sizes[row])
        count = min(config.batch_length, size)
        for receiver in graph.neighbors(sender).tolist():
            if count == 0:
                log.append((sender, receiver, 0))
                continue
            if config.mode == "prioritized":
                if core.priorities is None:
                    raise ValueError(
                        "prioritized sharing needs prioritized replay buffers"
                    )
                prio = core.priorities[row, :size]
                idx = rng.choice(size, size=count, replace=False, p=prio / prio.sum())
            else:
                idx = rng.choice(size, size=count, replace=False)
            batch = core.gather(row, idx)
            fps = (
                core.fingerprints[row, idx].copy()
                if core.fingerprints is not None
                else None
            )
            pending.append((receiver, batch, fps))
            log.append((sender, receiver, count))
    for receiver, batch, fps in pending:
        core, row = rows[receiver]
        if core.fingerprints is None:
            fps = None
        core.insert_many(row, *batch, fingerprints=fps)
    return log
