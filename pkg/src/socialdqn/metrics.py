"""Performance, behavioral, and buffer-content metrics for cohort runs.

Evaluation-side metrics (success, reward curves, conformity, volatility)
operate on streams of :class:`EvalRecord`. Buffer-side metrics (diversity
and alignment) operate on :class:`BufferSnapshot`, which stores one
fingerprint multiset per agent.

A transition fingerprint is a 16-byte blake2b digest of the canonical
byte encoding of ``(state, action, reward, next_state, terminal)``.
Observations in this package are {0,1}-valued vectors, so states are
packed to bits before hashing; the digest is injective on that domain up
to hash collision, whose probability is below 2**-64 per pair (128-bit
digest, so roughly 2**-128).
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .replay import FINGERPRINT_BYTES

SUCCESS_TOLERANCE = 1e-9

_SCALAR_FIELDS = struct.Struct("<idB")


def is_success(normalized_return: float) -> bool:
    """True when a normalized episode return counts as reaching the optimum."""
    return normalized_return >= 1.0 - SUCCESS_TOLERANCE


@dataclass(frozen=True)
class EvalRecord:
    """One agent's greedy evaluation outcome at one training step.

    ``episode_return`` is normalized by the task optimum, so 1.0 means the
    best achievable episode. ``final_element`` is the last id collected
    during the episode, or -1 when nothing was collected. ``trajectory``
    is the ordered tuple of ids collected during the episode.
    """

    step: int
    agent: int
    episode_return: float
    final_element: int
    trajectory: Tuple[int, ...]


def _grouped_by_step(records: Iterable[EvalRecord]) -> List[Tuple[int, List[EvalRecord]]]:
    groups: Dict[int, List[EvalRecord]] = {}
    for rec in records:
        groups.setdefault(rec.step, []).append(rec)
    return sorted(groups.items())


def group_success(records: Sequence[EvalRecord]) -> int:
    """1 iff any agent's evaluation return ever reaches the optimum."""
    if not records:
        raise ValueError("group_success requires at least one evaluation record")
    return int(any(is_success(rec.episode_return) for rec in records))


def reward_curves(
    records: Sequence[EvalRecord],
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per evaluation step, the max and mean agent return.

    Returns ``(steps, r_max, r_mean)`` with steps in ascending order. The
    curves are not forced to be monotone; returns may dip between
    evaluation points.
    """
    if not records:
        raise ValueError("reward_curves requires at least one evaluation record")
    steps: List[int] = []
    r_max: List[float] = []
    r_mean: List[float] = []
    for step, group in _grouped_by_step(records):
        returns = np.array([rec.episode_return for rec in group], dtype=np.float64)
        steps.append(step)
        r_max.append(float(returns.max()))
        r_mean.append(float(returns.mean()))
    return np.array(steps, dtype=np.int64), np.array(r_max), np.array(r_mean)


def success_times(records: Sequence[EvalRecord], t_train: int) -> Tuple[int, int, int]:
    """First-success, all-success, and spread times for one trial.

    Returns ``(t_first, t_all, t_spread)``: the first step at which any
    agent reached the optimum, the first step by which every agent had
    reached it, and their difference. An event that never happens is
    reported as ``t_train``; when nothing succeeds both times collapse to
    ``t_train`` and the spread is 0.
    """
    first: Dict[int, int] = {}
    agents = set()
    for rec in sorted(records, key=lambda r: r.step):
        agents.add(rec.agent)
        if rec.agent not in first and is_success(rec.episode_return):
            first[rec.agent] = rec.step
    t_first = min(first.values()) if first else t_train
    if agents and len(first) == len(agents):
        t_all = max(first.values())
    else:
        t_all = t_train
    return t_first, t_all, t_all - t_first


def conformity(records_at_step: Sequence[EvalRecord]) -> float:
    """Fraction of agents in the largest cohort sharing a final element.

    Takes the records of a single evaluation step, one per agent. Agents
    that collected nothing carry the sentinel final element -1 and form a
    cohort of their own.
    """
    if not records_at_step:
        raise ValueError("conformity requires at least one record")
    if len({rec.step for rec in records_at_step}) != 1:
        raise ValueError("conformity records must share one evaluation step")
    counts: Dict[int, int] = {}
    for rec in records_at_step:
        counts[rec.final_element] = counts.get(rec.final_element, 0) + 1
    return max(counts.values()) / len(records_at_step)


def volatility(trajectories: Sequence[Tuple[int, ...]]) -> np.ndarray:
    """Cumulative count of trajectory changes between consecutive evals.

    ``trajectories`` is one agent's evaluation trajectory at each
    evaluation point, in step order. Entry t of the result counts the
    consecutive pairs up to t that differ as sequences.
    """
    if len(trajectories) < 2:
        raise ValueError("volatility requires at least two evaluation points")
    series = np.zeros(len(trajectories), dtype=np.int64)
    previous = tuple(trajectories[0])
    for i in range(1, len(trajectories)):
        current = tuple(trajectories[i])
        series[i] = series[i - 1] + (current != previous)
        previous = current
    return series


# ---------------------------------------------------------------------------
# transition fingerprints


def transition_fingerprint(
    state: np.ndarray,
    action: int,
    reward: float,
    next_state: np.ndarray,
    terminal: bool,
) -> bytes:
    """16-byte digest identifying a transition by its content.

    States are thresholded at 0.5 and bit-packed, so any representation
    of the same {0,1} observation vector hashes identically.
    """
    digest = hashlib.blake2b(digest_size=FINGERPRINT_BYTES)
    digest.update(np.packbits(np.asarray(state) > 0.5).tobytes())
    digest.update(_SCALAR_FIELDS.pack(int(action), float(reward), bool(terminal)))
    digest.update(np.packbits(np.asarray(next_state) > 0.5).tobytes())
    return digest.digest()


def fingerprint_batch(
    states: np.ndarray,
    actions: np.ndarray,
    rewards: np.ndarray,
    next_states: np.ndarray,
    terminals: np.ndarray,
) -> np.ndarray:
    """Row-wise :func:`transition_fingerprint`, returned as (n, 16) uint8."""
    packed_states = np.packbits(np.asarray(states) > 0.5, axis=1)
    packed_next = np.packbits(np.asarray(next_states) > 0.5, axis=1)
    n = len(packed_states)
    out = np.empty((n, FINGERPRINT_BYTES), dtype=np.uint8)
    for i in range(n):
        digest = hashlib.blake2b(digest_size=FINGERPRINT_BYTES)
        digest.update(packed_states[i].tobytes())
        digest.update(_SCALAR_FIELDS.pack(int(actions[i]), float(rewards[i]), bool(terminals[i])))
        digest.update(packed_next[i].tobytes())
        out[i] = np.frombuffer(digest.digest(), dtype=np.uint8)
    return out


# ---------------------------------------------------------------------------
# buffer snapshots


@dataclass(frozen=True)
class BufferSnapshot:
    """Per-agent replay-buffer fingerprint multisets at one training step."""

    step: int
    fingerprints: Tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        frozen = []
        for rows in self.fingerprints:
            rows = np.asarray(rows)
            if rows.ndim != 2 or rows.shape[1] != FINGERPRINT_BYTES:
                raise ValueError(
                    f"fingerprint arrays must have shape (n, {FINGERPRINT_BYTES})"
                )
            if rows.dtype != np.uint8:
                raise ValueError("fingerprint arrays must be uint8")
            rows = rows.copy()
            rows.flags.writeable = False
            frozen.append(rows)
        object.__setattr__(self, "fingerprints", tuple(frozen))

    @property
    def n_agents(self) -> int:
        return len(self.fingerprints)

    @classmethod
    def from_replay(cls, core, step: int) -> "BufferSnapshot":
        """Snapshot a cohort replay that stores fingerprints."""
        if getattr(core, "fingerprints", None) is None:
            raise ValueError("replay does not store fingerprints")
        rows = tuple(core.fingerprints_of(k) for k in range(core.n_agents))
        return cls(step=step, fingerprints=rows)


def _unique_keys(rows: np.ndarray) -> frozenset:
    data = np.ascontiguousarray(rows).tobytes()
    return frozenset(
        data[i : i + FINGERPRINT_BYTES] for i in range(0, len(data), FINGERPRINT_BYTES)
    )


def diversity(snapshot: BufferSnapshot, agent: int) -> int:
    """Number of distinct transitions in one agent's buffer."""
    return len(_unique_keys(snapshot.fingerprints[agent]))


def group_diversity(snapshot: BufferSnapshot) -> int:
    """Number of distinct transitions across the whole group's buffers."""
    union: set = set()
    for rows in snapshot.fingerprints:
        union |= _unique_keys(rows)
    return len(union)


def intra_alignment(snapshot: BufferSnapshot) -> float:
    """Mean pairwise buffer overlap within a group.

    For each unordered agent pair, the number of shared distinct
    transitions divided by the smaller distinct count; averaged over all
    pairs. Undefined (raises) for groups of one or when any buffer is
    empty.
    """
    if snapshot.n_agents < 2:
        raise ValueError("intra_alignment requires at least two agents")
    keys = [_unique_keys(rows) for rows in snapshot.fingerprints]
    if any(len(k) == 0 for k in keys):
        raise ValueError("intra_alignment is undefined when a buffer is empty")
    total = 0.0
    n_pairs = 0
    for i in range(len(keys)):
        for j in range(i + 1, len(keys)):
            total += len(keys[i] & keys[j]) / min(len(keys[i]), len(keys[j]))
            n_pairs += 1
    return total / n_pairs


def inter_alignment(snapshot_a: BufferSnapshot, snapshot_b: BufferSnapshot) -> float:
    """Overlap between two groups' pooled buffers.

    Each group's buffers are pooled into one distinct set; the shared
    count is divided by the smaller pooled set.
    """
    union_a: set = set()
    for rows in snapshot_a.fingerprints:
        union_a |= _unique_keys(rows)
    union_b: set = set()
    for rows in snapshot_b.fingerprints:
        union_b |= _unique_keys(rows)
    if not union_a or not union_b:
        raise ValueError("inter_alignment requires non-empty groups")
    return len(union_a & union_b) / min(len(union_a), len(union_b))
