"""Small numpy MLP with manual backprop, Adam, Huber loss and running normalization."""

from __future__ import annotations

from typing import Sequence

import numpy as np


class MlpNet:
    """Fully connected net, ReLU on hidden layers and identity on the output.

    ``params`` is a flat list ``[W0, b0, W1, b1, ...]`` with ``W`` of shape
    (fan_in, fan_out); inputs are batches of row vectors.
    """

    def __init__(self, sizes: Sequence[int], rng: np.random.Generator | None = None):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        self.sizes = [int(s) for s in sizes]
        self.params: list[np.ndarray] = []
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            if rng is None:
                w = np.zeros((fan_in, fan_out))
            else:
                limit = np.sqrt(6.0 / fan_in)
                w = rng.uniform(-limit, limit, size=(fan_in, fan_out))
            self.params += [w, np.zeros(fan_out)]

    @property
    def n_layers(self) -> int:
        return len(self.sizes) - 1

    def n_params(self) -> int:
        return sum(p.size for p in self.params)

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        """Forward pass returning the output and the per-layer inputs for backprop."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.sizes[0]:
            raise ValueError(f"input width {x.shape[1]} != {self.sizes[0]}")
        cache = []
        for layer in range(self.n_layers):
            w, b = self.params[2 * layer], self.params[2 * layer + 1]
            cache.append(x)
            x = x @ w + b
            if layer < self.n_layers - 1:
                x = np.maximum(x, 0.0)
        return x, cache

    def __call__(self, x: np.ndarray) -> np.ndarray:
        single = np.ndim(x) == 1
        out, _ = self.forward(x)
        return out[0] if single else out

    def backward(self, cache: list[np.ndarray], grad_out: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
        """Gradients of ``sum(output * grad_out)`` w.r.t. params and input."""
        g = np.atleast_2d(np.asarray(grad_out, dtype=float))
        grads: list[np.ndarray] = [None] * len(self.params)  # type: ignore[list-item]
        for layer in reversed(range(self.n_layers)):
            x_in = cache[layer]
            w = self.params[2 * layer]
            grads[2 * layer] = x_in.T @ g
            grads[2 * layer + 1] = g.sum(axis=0)
            g = g @ w.T
            if layer > 0:
                # x_in is the ReLU output of the layer below
                g = g * (x_in > 0.0)
        return grads, g

    def copy(self) -> "MlpNet":
        net = MlpNet.__new__(MlpNet)
        net.sizes = list(self.sizes)
        net.params = [p.copy() for p in self.params]
        return net

    def load_params(self, params: Sequence[np.ndarray]) -> None:
        if len(params) != len(self.params):
            raise ValueError("parameter count mismatch")
        for dst, src in zip(self.params, params):
            if dst.shape != src.shape:
                raise ValueError(f"shape mismatch {dst.shape} vs {src.shape}")
            dst[...] = src


class Adam:
    def __init__(self, params: Sequence[np.ndarray], lr: float, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params: list[np.ndarray], grads: Sequence[np.ndarray]) -> None:
        """One bias-corrected Adam update, in place."""
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1 ** self.t
        c2 = 1.0 - b2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def clip_grad_norm(grads: list[np.ndarray], max_norm: float) -> float:
    """Scale ``grads`` in place so their joint L2 norm is at most ``max_norm``."""
    norm = float(np.sqrt(sum(float(np.sum(g * g)) for g in grads)))
    if norm > max_norm:
        scale = max_norm / norm
        for g in grads:
            g *= scale
    return norm


def huber(residual, delta: float = 1.0):
    """Huber loss and its derivative w.r.t. the residual (elementwise)."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    r = np.asarray(residual, dtype=float)
    a = np.abs(r)
    quad = a <= delta
    loss = np.where(quad, 0.5 * r * r, delta * (a - 0.5 * delta))
    grad = np.where(quad, r, delta * np.sign(r))
    if loss.ndim == 0:
        return float(loss), float(grad)
    return loss, grad


class Normalizer:
    """Running mean/variance (parallel Welford) with clipped standardization."""

    def __init__(self, dim: int, eps: float = 1e-8, clip: float = 10.0):
        self.dim = dim
        self.eps = eps
        self.clip = clip
        self.mean = np.zeros(dim)
        self.var = np.ones(dim)
        self.count = 0

    def observe(self, x: np.ndarray) -> None:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.dim:
            raise ValueError(f"expected width {self.dim}, got {x.shape[1]}")
        n_b = x.shape[0]
        mean_b = x.mean(axis=0)
        m2_b = ((x - mean_b) ** 2).sum(axis=0)
        if self.count == 0:
            self.mean = mean_b
            self.var = m2_b / n_b
            self.count = n_b
            return
        n_a = self.count
        n = n_a + n_b
        delta = mean_b - self.mean
        m2 = self.var * n_a + m2_b + delta * delta * n_a * n_b / n
        self.mean = self.mean + delta * n_b / n
        self.var = np.maximum(m2 / n, 0.0)
        self.count = n

    def apply(self, x: np.ndarray) -> np.ndarray:
        if self.count == 0:
            return np.asarray(x, dtype=float)
        z = (x - self.mean) / np.sqrt(self.var + self.eps)
        return np.clip(z, -self.clip, self.clip)

    def copy(self) -> "Normalizer":
        out = Normalizer(self.dim, self.eps, self.clip)
        out.mean, out.var, out.count = self.mean.copy(), self.var.copy(), self.count
        return out
