"""Proportional prioritized replay over joint multi-agent transitions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Transition:
    s: np.ndarray
    obs: np.ndarray  # (N_U, D_obs)
    actions: np.ndarray  # (N_U,) composite indices
    global_r: float
    individual_r: np.ndarray  # (N_U,)
    s_next: np.ndarray
    obs_next: np.ndarray
    done: bool


@dataclass
class Batch:
    s: np.ndarray  # (B, D_s)
    obs: np.ndarray  # (B, N_U, D_obs)
    actions: np.ndarray  # (B, N_U)
    global_r: np.ndarray  # (B,)
    individual_r: np.ndarray  # (B, N_U)
    s_next: np.ndarray
    obs_next: np.ndarray
    done: np.ndarray  # (B,) bool

    def __len__(self):
        return len(self.global_r)


class SumTree:
    """Binary tree of partial sums over ``capacity`` leaves (padded to a power of two)."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        size = 1
        while size < capacity:
            size *= 2
        self.n_leaves = size
        self.tree = np.zeros(2 * size)

    @property
    def total(self) -> float:
        return float(self.tree[1])

    def leaf(self, idx) -> np.ndarray:
        return self.tree[self.n_leaves + np.asarray(idx)]

    def update(self, idx: int, value: float) -> None:
        i = idx + self.n_leaves
        self.tree[i] = value
        i //= 2
        while i >= 1:
            self.tree[i] = self.tree[2 * i] + self.tree[2 * i + 1]
            i //= 2

    def find(self, mass: float) -> int:
        """Leaf index whose cumulative interval contains ``mass``."""
        i = 1
        tree = self.tree
        while i < self.n_leaves:
            left = 2 * i
            if mass < tree[left] or tree[left + 1] <= 0.0:
                i = left
            else:
                mass -= tree[left]
                i = left + 1
        return i - self.n_leaves


class PriorityBuffer:
    def __init__(self, capacity: int, alpha: float = 0.6, beta: float = 0.4,
                 eps_priority: float = 1e-3):
        if capacity <= 0:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.alpha = alpha
        self.beta = beta
        self.eps_priority = eps_priority
        self.max_priority = 1.0
        self.tree = SumTree(capacity)
        self.priorities = np.zeros(capacity)
        self.size = 0
        self.next_idx = 0
        self._store: dict[str, np.ndarray] | None = None

    def __len__(self):
        return self.size

    def _allocate(self, t: Transition) -> None:
        n = self.capacity
        self._store = {
            "s": np.zeros((n,) + np.shape(t.s)),
            "obs": np.zeros((n,) + np.shape(t.obs)),
            "actions": np.zeros((n,) + np.shape(t.actions), dtype=np.int64),
            "global_r": np.zeros(n),
            "individual_r": np.zeros((n,) + np.shape(t.individual_r)),
            "s_next": np.zeros((n,) + np.shape(t.s_next)),
            "obs_next": np.zeros((n,) + np.shape(t.obs_next)),
            "done": np.zeros(n, dtype=bool),
        }

    def push(self, t: Transition) -> None:
        if self._store is None:
            self._allocate(t)
        i = self.next_idx
        for name, arr in self._store.items():
            arr[i] = getattr(t, name)
        self._set_priority(i, self.max_priority)
        self.next_idx = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def _set_priority(self, idx: int, priority: float) -> None:
        self.priorities[idx] = priority
        self.tree.update(idx, priority ** self.alpha)

    def probabilities(self) -> np.ndarray:
        """Sampling law over the live slots."""
        p = self.tree.leaf(np.arange(self.size))
        return p / p.sum()

    def sample(self, batch: int, rng: np.random.Generator) -> tuple[Batch, np.ndarray, np.ndarray]:
        """Stratified proportional draw; returns (batch, slot indices, IS weights in (0, 1])."""
        if batch > self.size:
            raise ValueError(f"cannot sample {batch} from a buffer holding {self.size}")
        total = self.tree.total
        seg = total / batch
        marks = (np.arange(batch) + rng.random(batch)) * seg
        idx = np.empty(batch, dtype=np.int64)
        for k, m in enumerate(marks):
            j = self.tree.find(min(m, total))
            # rounding can land on an empty padded leaf
            idx[k] = min(j, self.size - 1)
        probs = self.tree.leaf(idx) / total
        w = (self.size * probs) ** (-self.beta)
        w = w / w.max()
        st = self._store
        out = Batch(**{name: arr[idx] for name, arr in st.items()})
        return out, idx, w

    def update_priorities(self, indices, td_errors) -> None:
        for i, td in zip(np.asarray(indices), np.asarray(td_errors, dtype=float)):
            p = abs(float(td)) + self.eps_priority
            self._set_priority(int(i), p)
            self.max_priority = max(self.max_priority, p)
