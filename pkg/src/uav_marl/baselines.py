"""Rule-based comparison policies.

Every policy has the signature ``policy(world, agent_idx, obs, mask, rng) -> int``
and returns a composite action index allowed by ``mask``.
"""

from __future__ import annotations

import math
from functools import partial
from typing import Callable

import numpy as np

from .config import RunConfig
from .env import DOWN, MOVE_DIRS, STAY, UP, World, decode_action, encode_action

Policy = Callable[[World, int, np.ndarray, np.ndarray, np.random.Generator], int]


def random_policy(world, agent_idx, obs, mask, rng) -> int:
    allowed = np.flatnonzero(mask)
    if len(allowed) == 0:
        raise ValueError("mask allows no action")
    return int(allowed[rng.integers(len(allowed))])


def closest_midpoint(world: World, agent_idx: int) -> np.ndarray:
    p = world.uav_pos[agent_idx]
    mids = world.midpoints()
    d = np.hypot(mids[:, 0] - p[0], mids[:, 1] - p[1])
    return mids[int(np.argmin(d))]


def goal_direction(world: World, agent_idx: int, cfg: RunConfig) -> np.ndarray:
    """Unit vector toward the closest pair midpoint at cruise altitude.

    Components inside half a step of the goal are zeroed so the UAV settles
    instead of oscillating around it.
    """
    p = world.uav_pos[agent_idx]
    m = closest_midpoint(world, agent_idx)
    v = np.array([m[0] - p[0], m[1] - p[1], cfg.cruise_altitude - p[2]])
    if math.hypot(v[0], v[1]) < 0.5 * cfg.step_xy:
        v[:2] = 0.0
    if abs(v[2]) < 0.5 * cfg.step_z:
        v[2] = 0.0
    n = np.linalg.norm(v)
    return v / n if n > 0 else v


def repulsion(world: World, agent_idx: int, cfg: RunConfig) -> np.ndarray:
    p = world.uav_pos[agent_idx]
    f = np.zeros(3)
    for j in range(world.n_uavs):
        if j == agent_idx:
            continue
        diff = p - world.uav_pos[j]
        d = np.linalg.norm(diff)
        if 0 < d < cfg.d_safe_rep:
            f += cfg.k_rep * (cfg.d_safe_rep / d) ** 2 * diff / d
    return f


def spacing_force(world: World, agent_idx: int, cfg: RunConfig) -> np.ndarray:
    p = world.uav_pos[agent_idx]
    f = np.zeros(3)
    for j in range(world.n_uavs):
        if j == agent_idx:
            continue
        diff = world.uav_pos[j] - p
        d = np.linalg.norm(diff)
        if d > 0:
            f += cfg.k_sp * math.tanh((d - cfg.d_ideal) / cfg.s_sp) * diff / d
    return f


def best_move(world: World, agent_idx: int, direction: np.ndarray, mask: np.ndarray,
              cfg: RunConfig) -> int:
    """Allowed primitive best aligned with ``direction``.

    Vertical primitives are candidates only while off the cruise altitude, and
    only toward it. Ties go to the lower move index; Stay scores zero.
    """
    n_power = len(cfg.power_levels)
    z = world.uav_pos[agent_idx, 2]
    best, best_score = STAY, 0.0
    for move in range(1, len(MOVE_DIRS)):
        if not mask[n_power * move]:
            continue
        if move == UP and not z < cfg.cruise_altitude:
            continue
        if move == DOWN and not z > cfg.cruise_altitude:
            continue
        score = float(MOVE_DIRS[move] @ direction)
        if score > best_score:
            best, best_score = move, score
    return best


def safe_greedy_policy(world, agent_idx, obs, mask, rng, *, cfg: RunConfig) -> int:
    direction = goal_direction(world, agent_idx, cfg) + repulsion(world, agent_idx, cfg)
    move = best_move(world, agent_idx, direction, mask, cfg)
    return encode_action(move, len(cfg.power_levels) - 1, len(cfg.power_levels))


def spacing_coop_policy(world, agent_idx, obs, mask, rng, *, cfg: RunConfig) -> int:
    direction = goal_direction(world, agent_idx, cfg) + spacing_force(world, agent_idx, cfg)
    move = best_move(world, agent_idx, direction, mask, cfg)
    return encode_action(move, len(cfg.power_levels) - 1, len(cfg.power_levels))


def power_constrained(base: Policy, n_power: int = 3) -> Policy:
    """Same moves as ``base`` at the lowest transmit power."""

    def policy(world, agent_idx, obs, mask, rng) -> int:
        move = decode_action(base(world, agent_idx, obs, mask, rng), n_power).move
        return encode_action(move, 0, n_power)

    return policy


BASELINES = ("random", "safe_greedy", "spacing_coop", "safe_greedy_p1", "spacing_coop_p1")


def make_policy(name: str, cfg: RunConfig) -> Policy:
    n_power = len(cfg.power_levels)
    table = {
        "random": random_policy,
        "safe_greedy": partial(safe_greedy_policy, cfg=cfg),
        "spacing_coop": partial(spacing_coop_policy, cfg=cfg),
    }
    if name.endswith("_p1") and name[:-3] in table:
        return power_constrained(table[name[:-3]], n_power)
    if name not in table:
        raise ValueError(f"unknown baseline policy {name!r}; choose from {BASELINES}")
    return table[name]
