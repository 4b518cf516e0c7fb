"""Replay storage tests: FIFO ring semantics, uniform and prioritized
sampling distributions, and the per-agent stacked store."""
import numpy as np
import pytest

from socialdqn.replay import CohortReplay, ReplayBuffer
from socialdqn.wordcraft import Transition


def make_transition(tag, obs_size=4):
    state = np.zeros(obs_size, dtype=np.float32)
    state[tag % obs_size] = 1.0
    next_state = np.roll(state, 1)
    return Transition(state, tag, next_state, float(tag), bool(tag % 2))


def test_fifo_eviction():
    buf = ReplayBuffer(capacity=2, obs_size=4)
    for tag in range(3):
        buf.insert(make_transition(tag))
    assert len(buf) == 2
    rng = np.random.default_rng(0)
    states, actions, rewards, next_states, terminals = buf.sample(2, rng)
    assert sorted(actions.tolist()) == [1, 2]  # item 0 evicted first


def test_insert_fields_roundtrip():
    buf = ReplayBuffer(capacity=8, obs_size=4)
    t = make_transition(3)
    buf.insert(t)
    states, actions, rewards, next_states, terminals = buf.sample(1, np.random.default_rng(1))
    assert np.array_equal(states[0], t.state)
    assert actions[0] == t.action
    assert rewards[0] == t.reward
    assert np.array_equal(next_states[0], t.next_state)
    assert terminals[0] == t.terminal


def test_uniform_sample_full_size_is_permutation():
    buf = ReplayBuffer(capacity=16, obs_size=4)
    for tag in range(10):
        buf.insert(make_transition(tag))
    _, actions, _, _, _ = buf.sample(10, np.random.default_rng(2))
    assert sorted(actions.tolist()) == list(range(10))


def test_sample_errors():
    buf = ReplayBuffer(capacity=4, obs_size=4)
    with pytest.raises(ValueError):
        buf.sample(1, np.random.default_rng(0))


def test_oversample_allowed_with_replacement():
    buf = ReplayBuffer(capacity=4, obs_size=4)
    buf.insert(make_transition(0))
    _, actions, _, _, _ = buf.sample(6, np.random.default_rng(0))
    assert actions.shape == (6,)
    assert (actions == 0).all()


def test_batches_are_snapshots():
    buf = ReplayBuffer(capacity=2, obs_size=4)
    buf.insert(make_transition(0))
    states, *_ = buf.sample(1, np.random.default_rng(0))
    before = states.copy()
    buf.insert(make_transition(1))
    buf.insert(make_transition(2))  # overwrites slot 0
    assert np.array_equal(states, before)


def test_cohort_sizes_and_masked_insert():
    buf = CohortReplay(n_agents=3, capacity=4, obs_size=2)
    states = np.ones((3, 2), dtype=np.float32)
    nexts = np.zeros((3, 2), dtype=np.float32)
    mask = np.array([True, False, True])
    buf.insert(mask, states, np.array([0, 1, 2]), np.array([1.0, 2.0, 3.0]), nexts,
               np.array([False, True, False]))
    assert buf.sizes.tolist() == [1, 0, 1]
    _, actions, rewards, _, terminals = buf.gather(2, np.array([0]))
    assert actions[0] == 2 and rewards[0] == 3.0 and not terminals[0]


def test_cohort_ring_wraps_per_agent():
    buf = CohortReplay(n_agents=2, capacity=3, obs_size=2)
    obs = np.zeros((2, 2), dtype=np.float32)
    for tag in range(5):
        mask = np.array([True, tag % 2 == 0])
        buf.insert(mask, obs, np.array([tag, tag + 100]), np.zeros(2), obs, np.zeros(2, bool))
    assert buf.sizes.tolist() == [3, 3]
    _, a0, _, _, _ = buf.gather(0, np.arange(3))
    assert sorted(a0.tolist()) == [2, 3, 4]  # agent 0 saw tags 0..4, keeps last 3
    _, a1, _, _, _ = buf.gather(1, np.arange(3))
    assert sorted(a1.tolist()) == [100, 102, 104]


def test_uniform_sampling_is_unbiased():
    buf = ReplayBuffer(capacity=8, obs_size=2)
    for tag in range(8):
        buf.insert(make_transition(tag, obs_size=2))
    rng = np.random.default_rng(3)
    counts = np.zeros(8)
    draws = 40_000
    for _ in range(draws // 4):
        _, actions, _, _, _ = buf.sample(4, rng)
        for a in actions:
            counts[a] += 1
    expected = draws / 8
    # 3 sigma binomial bound per cell
    sigma = np.sqrt(draws * (1 / 8) * (7 / 8))
    assert (np.abs(counts - expected) < 3 * sigma + 1).all()


def test_prioritized_frequencies_follow_priority_power():
    alpha = 0.6
    buf = ReplayBuffer(capacity=4, obs_size=2, prioritized=True, priority_alpha=alpha)
    for tag in range(4):
        buf.insert(make_transition(tag, obs_size=2))
    priorities = np.array([4.0, 2.0, 1.0, 0.5])
    buf.update_priorities(np.arange(4), priorities)
    p = priorities**alpha
    p /= p.sum()
    rng = np.random.default_rng(4)
    draws = 100_000
    counts = np.zeros(4)
    idx, weights = buf.sample_prioritized(draws, rng)
    for i in idx:
        counts[i] += 1
    sigma = np.sqrt(draws * p * (1 - p))
    assert (np.abs(counts - draws * p) < 4 * sigma).all()
    # importance weights: (N P(i))^-beta, normalized to max 1 within the batch
    w_exact = (len(buf) * p[idx]) ** -buf.priority_beta
    assert np.allclose(weights, w_exact / w_exact.max())
    assert weights.max() == 1.0


def test_new_inserts_get_max_priority():
    buf = ReplayBuffer(capacity=8, obs_size=2, prioritized=True)
    buf.insert(make_transition(0, obs_size=2))
    buf.update_priorities(np.array([0]), np.array([9.0]))
    buf.insert(make_transition(1, obs_size=2))
    assert buf.priorities[1] == 9.0
    with pytest.raises(ValueError):
        buf.update_priorities(np.array([0]), np.array([0.0]))


def test_fingerprint_column_tracks_fifo():
    buf = CohortReplay(n_agents=1, capacity=2, obs_size=2, store_fingerprints=True)
    obs = np.zeros((1, 2), dtype=np.float32)
    for tag in range(3):
        fp = np.full((1, 16), tag, dtype=np.uint8)
        buf.insert(np.array([True]), obs, np.array([tag]), np.zeros(1), obs,
                   np.zeros(1, bool), fingerprints=fp)
    fps = buf.fingerprints_of(0)
    assert fps.shape == (2, 16)
    assert sorted(fps[:, 0].tolist()) == [1, 2]


def test_cohort_uniform_sample_without_replacement():
    buf = CohortReplay(n_agents=1, capacity=16, obs_size=2)
    obs = np.zeros((1, 2), dtype=np.float32)
    for tag in range(10):
        buf.insert(np.array([True]), obs, np.array([tag]), np.zeros(1), obs, np.zeros(1, bool))
    rng = np.random.default_rng(5)
    for _ in range(50):
        idx = buf.sample_uniform(0, 6, rng)
        assert len(set(idx.tolist())) == 6
        assert ((0 <= idx) & (idx < 10)).all()
