"""From-scratch deep Q-learning: stacked MLP value networks, Adam, ε-greedy
behavior, target networks, and replay-backed training.

Everything carries a leading agent axis so a whole cohort of independent
learners advances with batched array ops; a single agent is the K=1 case.
Per-agent generators keep the stacked computation bit-identical to running
each agent alone with its own seed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .replay import CohortReplay, ReplayBuffer
from .wordcraft import Transition

__all__ = [
    "AdamState",
    "CohortDqn",
    "DqnAgent",
    "DqnConfig",
    "ParamLayout",
    "glorot_params",
    "mlp_forward",
    "q_loss",
    "q_loss_grad",
]


class ParamLayout:
    """Offsets of the per-layer tensors inside a flat parameter vector.

    Order: W1, b1, W2, b2, W3, b3 for input→hidden→hidden→output. views()
    returns zero-copy reshapes into a (..., size) array, writable in place.
    """

    def __init__(self, obs_size: int, n_actions: int, hidden: int = 64):
        self.obs_size = obs_size
        self.n_actions = n_actions
        self.hidden = hidden
        self.shapes = [
            (obs_size, hidden),
            (hidden,),
            (hidden, hidden),
            (hidden,),
            (hidden, n_actions),
            (n_actions,),
        ]
        self._slots = []
        offset = 0
        for shape in self.shapes:
            n = int(np.prod(shape))
            self._slots.append((shape, offset, n))
            offset += n
        self.size = offset

    def views(self, flat: np.ndarray) -> list[np.ndarray]:
        lead = flat.shape[:-1]
        return [
            flat[..., off : off + n].reshape(lead + shape)
            for shape, off, n in self._slots
        ]


def glorot_params(
    layout: ParamLayout, rngs: Sequence[np.random.Generator], dtype=np.float64
) -> np.ndarray:
    """Per-agent uniform init in ±sqrt(6/(fan_in+fan_out)); biases zero."""
    params = np.zeros((len(rngs), layout.size), dtype=dtype)
    W1, _, W2, _, W3, _ = layout.views(params)
    for k, rng in enumerate(rngs):
        for W in (W1, W2, W3):
            fan_in, fan_out = W.shape[1:]
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            W[k] = rng.uniform(-limit, limit, size=(fan_in, fan_out))
    return params


def _forward_hidden(layout: ParamLayout, params: np.ndarray, obs: np.ndarray,
                    views: list[np.ndarray] | None = None):
    W1, b1, W2, b2, W3, b3 = layout.views(params) if views is None else views
    h1 = obs @ W1
    h1 += b1[:, None, :]
    np.maximum(h1, 0.0, out=h1)
    h2 = h1 @ W2
    h2 += b2[:, None, :]
    np.maximum(h2, 0.0, out=h2)
    q = h2 @ W3
    q += b3[:, None, :]
    return h1, h2, q


def mlp_forward(layout: ParamLayout, params: np.ndarray, obs: np.ndarray,
                views: list[np.ndarray] | None = None) -> np.ndarray:
    """Q-values for observations shaped (K, obs) or (K, batch, obs)."""
    obs = np.asarray(obs)
    if obs.shape[-1] != layout.obs_size:
        raise ValueError(
            f"observation width {obs.shape[-1]} != network input {layout.obs_size}"
        )
    single = obs.ndim == 2
    if single:
        obs = obs[:, None, :]
    obs = obs.astype(params.dtype, copy=False)
    _, _, q = _forward_hidden(layout, params, obs, views)
    return q[:, 0, :] if single else q


def _select(q: np.ndarray, actions: np.ndarray) -> np.ndarray:
    return np.take_along_axis(q, actions[..., None], axis=2)[..., 0]


def q_loss(layout, params, obs, actions, targets, weights=None) -> np.ndarray:
    """Per-agent (weighted) mean squared TD error; shapes (K,B,·)→(K,)."""
    obs = np.asarray(obs).astype(params.dtype, copy=False)
    targets = np.asarray(targets, dtype=params.dtype)
    q = mlp_forward(layout, params, obs)
    residual = _select(q, actions) - targets
    sq = residual * residual
    if weights is not None:
        sq = weights * sq
    return sq.mean(axis=1)


def q_loss_grad(layout, params, obs, actions, targets, weights=None, views=None):
    """Loss, flat gradient, and raw residual (Q(s,a) − target) per sample."""
    obs = np.asarray(obs).astype(params.dtype, copy=False)
    targets = np.asarray(targets, dtype=params.dtype)
    W1, b1, W2, b2, W3, b3 = layout.views(params) if views is None else views
    h1, h2, q = _forward_hidden(layout, params, obs, views)
    residual = _select(q, actions) - targets
    batch = obs.shape[1]
    weighted = residual if weights is None else weights * residual
    losses = (weighted * residual).mean(axis=1)
    dsel = (2.0 / batch) * weighted
    dq = np.zeros_like(q)
    np.put_along_axis(dq, actions[..., None], dsel[..., None].astype(q.dtype), axis=2)
    grads = np.empty_like(params)  # every view below is fully assigned
    gW1, gb1, gW2, gb2, gW3, gb3 = layout.views(grads)
    np.matmul(h2.transpose(0, 2, 1), dq, out=gW3)
    gb3[:] = dq.sum(axis=1)
    dh = dq @ W3.transpose(0, 2, 1)
    dh *= h2 > 0
    np.matmul(h1.transpose(0, 2, 1), dh, out=gW2)
    gb2[:] = dh.sum(axis=1)
    dh = dh @ W2.transpose(0, 2, 1)
    dh *= h1 > 0
    np.matmul(obs.transpose(0, 2, 1), dh, out=gW1)
    gb1[:] = dh.sum(axis=1)
    return losses, grads, residual


class AdamState:
    """Stacked Adam with bias correction folded into the step size.

    The update is θ ← θ − a_t·m/(√v + e_t) with a_t = lr·√(1−β₂ᵗ)/(1−β₁ᵗ)
    and e_t = eps·(1−β₂ᵗ)/(1−β₁ᵗ), algebraically equal to the classic
    m̂/(√v̂ + ε̂) form and cheaper on stacked parameters. t is per agent so
    masked updates keep every agent's schedule independent.
    """

    # Entries whose gradients go quiet decay geometrically toward zero and
    # would crawl through the subnormal range, where elementwise ops stall by
    # an order of magnitude on common hardware. Every FLUSH_EVERY updates,
    # moment magnitudes below _TINY are snapped to zero. The thresholds leave
    # enough headroom that nothing reaches the subnormal boundary between
    # flushes, and they sit so far below the ε-floor of the denominator and
    # one ulp of any reachable parameter that parameter trajectories are
    # unaffected.
    FLUSH_EVERY = 32
    _TINY = {4: 1e-35, 8: 1e-305}

    def __init__(
        self,
        n_agents: int,
        n_params: int,
        lr: float = 0.001,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
        dtype=np.float64,
    ):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = np.zeros((n_agents, n_params), dtype=dtype)
        self.v = np.zeros((n_agents, n_params), dtype=dtype)
        self.t = np.zeros(n_agents, dtype=np.int64)
        self._tiny = self._TINY[np.dtype(dtype).itemsize]
        self._calls = 0

    def _scalars(self, t: np.ndarray, dtype) -> tuple[np.ndarray, np.ndarray]:
        # schedule factors computed in float64 for accuracy, then folded to the
        # parameter dtype so the broadcasts below stay on the fast ufunc path
        c1 = 1.0 - self.beta1**t
        c2 = 1.0 - self.beta2**t
        e_t = (self.eps * c2 / c1).astype(dtype)
        a_t = (self.lr * np.sqrt(c2) / c1).astype(dtype)
        return e_t, a_t

    def update(self, params: np.ndarray, grads: np.ndarray, mask: np.ndarray | None = None):
        self._calls += 1
        if self._calls % self.FLUSH_EVERY == 0:
            self.m[np.abs(self.m) < self._tiny] = 0.0
            self.v[np.abs(self.v) < self._tiny] = 0.0
        full = mask is None or bool(mask.all())
        if full:
            self.t += 1
            t = self.t[:, None].astype(np.float64)
            e_t, a_t = self._scalars(t, params.dtype)
            np.multiply(self.m, self.beta1, out=self.m)
            self.m += (1.0 - self.beta1) * grads
            np.multiply(self.v, self.beta2, out=self.v)
            self.v += (1.0 - self.beta2) * np.square(grads)
            denom = np.sqrt(self.v)
            denom += e_t
            step = self.m / denom
            step *= a_t
            params -= step
        else:
            rows = np.flatnonzero(mask)
            if rows.size == 0:
                return
            self.t[rows] += 1
            t = self.t[rows][:, None].astype(np.float64)
            e_t, a_t = self._scalars(t, params.dtype)
            g = grads[rows]
            m = self.m[rows] * self.beta1
            m += (1.0 - self.beta1) * g
            v = self.v[rows] * self.beta2
            v += (1.0 - self.beta2) * np.square(g)
            self.m[rows] = m
            self.v[rows] = v
            denom = np.sqrt(v)
            denom += e_t
            step = m / denom
            step *= a_t
            params[rows] -= step


@dataclass
class DqnConfig:
    obs_size: int
    n_actions: int
    hidden: int = 64
    lr: float = 0.001
    gamma: float = 0.9
    epsilon: float = 0.01
    batch_size: int = 32
    buffer_capacity: int = 5000
    target_interval: int = 1000  # gradient steps between hard target copies
    prioritized: bool = False
    priority_alpha: float = 0.6
    priority_beta: float = 0.4
    store_fingerprints: bool = False
    dtype: object = np.float64


class _UniformCache:
    """Per-agent blocks of pre-drawn uniforms, two consumed per ε-greedy act."""

    BLOCK = 1024

    def __init__(self, generators: Sequence[np.random.Generator]):
        self._gens = list(generators)
        k = len(self._gens)
        self._buf = np.empty((k, self.BLOCK), dtype=np.float64)
        self._pos = np.full(k, self.BLOCK, dtype=np.int64)

    def draw_pairs(self, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        for k in rows[self._pos[rows] >= self.BLOCK]:
            self._buf[k] = self._gens[k].random(self.BLOCK)
            self._pos[k] = 0
        pos = self._pos[rows]
        u1 = self._buf[rows, pos]
        u2 = self._buf[rows, pos + 1]
        self._pos[rows] += 2
        return u1, u2


def _as_agent_seeds(seed, n_agents: int) -> list[np.random.SeedSequence]:
    if isinstance(seed, (list, tuple)):
        if len(seed) != n_agents:
            raise ValueError(f"need {n_agents} per-agent seeds, got {len(seed)}")
        return [
            s if isinstance(s, np.random.SeedSequence) else np.random.SeedSequence(s)
            for s in seed
        ]
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return root.spawn(n_agents)


class CohortDqn:
    """K independent deep Q-learners advanced in lockstep.

    Each agent owns its parameter row, optimizer row, replay ring, and three
    private random streams (init, action, sampling) spawned from its seed.
    Nothing couples agents inside this class, so results are identical to
    running each agent alone; batching is purely an execution strategy.
    """

    def __init__(self, config: DqnConfig, n_agents: int, seed=0):
        self.config = config
        self.n_agents = n_agents
        self.layout = ParamLayout(config.obs_size, config.n_actions, config.hidden)
        agent_seeds = _as_agent_seeds(seed, n_agents)
        init_rngs, act_rngs, sample_rngs = [], [], []
        for s in agent_seeds:
            init_ss, act_ss, sample_ss = s.spawn(3)
            init_rngs.append(np.random.default_rng(init_ss))
            act_rngs.append(np.random.default_rng(act_ss))
            sample_rngs.append(np.random.default_rng(sample_ss))
        dtype = np.dtype(config.dtype)
        self.params = glorot_params(self.layout, init_rngs, dtype=dtype)
        self.target_params = self.params.copy()
        self.adam = AdamState(n_agents, self.layout.size, lr=config.lr, dtype=dtype)
        self.buffer = CohortReplay(
            n_agents,
            config.buffer_capacity,
            config.obs_size,
            store_fingerprints=config.store_fingerprints,
            prioritized=config.prioritized,
            priority_alpha=config.priority_alpha,
            priority_beta=config.priority_beta,
        )
        self.grad_steps = np.zeros(n_agents, dtype=np.int64)
        self._cache = _UniformCache(act_rngs)
        self._sample_rngs = sample_rngs
        self._all_rows = np.arange(n_agents)
        # params/target_params are only ever updated in place, so their layout
        # views stay valid for the lifetime of the cohort
        self._param_views = self.layout.views(self.params)
        self._target_views = self.layout.views(self.target_params)

    def q_values(self, obs: np.ndarray) -> np.ndarray:
        return mlp_forward(self.layout, self.params, obs, views=self._param_views)

    def act(self, obs: np.ndarray, greedy: bool = False, active: np.ndarray | None = None):
        """ε-greedy actions, one per agent; greedy mode consumes no randomness.

        Each non-greedy call consumes exactly two uniforms per active agent
        (explore test and action choice) so trajectories replay exactly.
        """
        q = self.q_values(obs)
        actions = q.argmax(axis=1)
        if greedy:
            return actions
        rows = self._all_rows if active is None else np.flatnonzero(active)
        if rows.size == 0:
            return actions
        u1, u2 = self._cache.draw_pairs(rows)
        explore = u1 < self.config.epsilon
        actions[rows[explore]] = (u2[explore] * self.config.n_actions).astype(np.int64)
        return actions

    def observe(self, mask, states, actions, rewards, next_states, terminals,
                fingerprints=None) -> None:
        self.buffer.insert(mask, states, actions, rewards, next_states, terminals,
                           fingerprints)

    def td_targets(self, next_states, rewards, terminals) -> np.ndarray:
        q_next = mlp_forward(self.layout, self.target_params, next_states,
                             views=self._target_views)
        best = q_next.max(axis=2)
        return rewards + self.config.gamma * best * ~np.asarray(terminals)

    def train_step(self, mask: np.ndarray | None = None) -> np.ndarray:
        """One sampled gradient step per (masked) agent; returns per-agent loss."""
        rows = self._all_rows if mask is None else np.flatnonzero(mask)
        cfg = self.config
        batch = cfg.batch_size
        if (self.buffer.sizes[rows] < batch).any():
            raise ValueError("buffer smaller than batch size for a training agent")
        k = self.n_agents
        idx = np.zeros((k, batch), dtype=np.int64)
        weights = np.ones((k, batch)) if cfg.prioritized else None
        for r in rows:
            if cfg.prioritized:
                idx[r], weights[r] = self.buffer.sample_prioritized(
                    r, batch, self._sample_rngs[r]
                )
            else:
                idx[r] = self.buffer.sample_uniform(r, batch, self._sample_rngs[r])
        sel = rows[:, None]
        if rows.size == k:
            obs = self.buffer.states[sel, idx]
            actions = self.buffer.actions[sel, idx]
            rewards = self.buffer.rewards[sel, idx]
            next_obs = self.buffer.next_states[sel, idx]
            terminals = self.buffer.terminals[sel, idx]
        else:
            obs = np.zeros((k, batch, cfg.obs_size), dtype=self.buffer.states.dtype)
            actions = np.zeros((k, batch), dtype=np.int64)
            rewards = np.zeros((k, batch))
            next_obs = np.zeros((k, batch, cfg.obs_size), dtype=self.buffer.states.dtype)
            terminals = np.zeros((k, batch), dtype=bool)
            obs[rows] = self.buffer.states[sel, idx[rows]]
            actions[rows] = self.buffer.actions[sel, idx[rows]]
            rewards[rows] = self.buffer.rewards[sel, idx[rows]]
            next_obs[rows] = self.buffer.next_states[sel, idx[rows]]
            terminals[rows] = self.buffer.terminals[sel, idx[rows]]
        targets = self.td_targets(next_obs, rewards, terminals)
        losses, grads, residual = q_loss_grad(
            self.layout, self.params, obs, actions, targets, weights,
            views=self._param_views,
        )
        update_mask = None
        if rows.size != k:
            update_mask = np.zeros(k, dtype=bool)
            update_mask[rows] = True
        self.adam.update(self.params, grads, mask=update_mask)
        if cfg.prioritized:
            for r in rows:
                self.buffer.update_priorities(r, idx[r], np.abs(residual[r]) + 1e-6)
        self.grad_steps[rows] += 1
        due = rows[self.grad_steps[rows] % cfg.target_interval == 0]
        if due.size:
            self.target_params[due] = self.params[due]
        out = np.zeros(k)
        out[rows] = losses[rows]
        return out

    def save(self, path) -> None:
        np.savez(
            path,
            params=self.params,
            target_params=self.target_params,
            adam_m=self.adam.m,
            adam_v=self.adam.v,
            adam_t=self.adam.t,
            grad_steps=self.grad_steps,
        )

    def load(self, path) -> None:
        with np.load(path) as data:
            for name, dst in [
                ("params", self.params),
                ("target_params", self.target_params),
                ("adam_m", self.adam.m),
                ("adam_v", self.adam.v),
                ("adam_t", self.adam.t),
                ("grad_steps", self.grad_steps),
            ]:
                src = data[name]
                if src.shape != dst.shape:
                    raise ValueError(f"checkpoint field {name} has shape {src.shape}, "
                                     f"expected {dst.shape}")
                dst[:] = src


class DqnAgent:
    """Single-agent interface over the stacked implementation."""

    def __init__(self, config: DqnConfig, seed=0):
        self._m = CohortDqn(config, 1, seed)
        self.config = config

    @property
    def model(self) -> CohortDqn:
        return self._m

    @property
    def params(self) -> np.ndarray:
        return self._m.params[0]

    @property
    def target_params(self) -> np.ndarray:
        return self._m.target_params[0]

    @property
    def buffer_size(self) -> int:
        return int(self._m.buffer.sizes[0])

    @property
    def grad_steps(self) -> int:
        return int(self._m.grad_steps[0])

    def q_values(self, obs: np.ndarray) -> np.ndarray:
        return self._m.q_values(np.asarray(obs)[None, :])[0]

    def act(self, obs: np.ndarray, greedy: bool = False) -> int:
        return int(self._m.act(np.asarray(obs)[None, :], greedy=greedy)[0])

    def observe(self, transition: Transition, fingerprint: bytes | None = None) -> None:
        self._m.buffer.insert_one(
            0,
            transition.state,
            transition.action,
            transition.reward,
            transition.next_state,
            transition.terminal,
            fingerprint,
        )

    def td_targets(self, batch) -> np.ndarray:
        _, _, rewards, next_states, terminals = batch
        return self._m.td_targets(next_states[None], rewards[None], terminals[None])[0]

    def train_step(self) -> float:
        return float(self._m.train_step()[0])

    def save(self, path) -> None:
        self._m.save(path)

    def load(self, path) -> None:
        self._m.load(path)
