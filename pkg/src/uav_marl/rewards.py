"""Global and individual rewards, penalty terms and the homeostatic weight schedule."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .config import RunConfig
from .env import World, assign_gcvs, decode_action, pair_rates, step_energy


@dataclass(frozen=True)
class RewardWeights:
    w_thr: float
    w_coop: float
    w_col: float
    w_fly: float

    @classmethod
    def from_config(cls, cfg: RunConfig) -> "RewardWeights":
        return cls(cfg.w_thr, cfg.w_coop, cfg.w_col, cfg.w_fly)


@dataclass(frozen=True)
class IndividualCoeffs:
    a_thr: float
    a_assign: float
    a_col: float

    @classmethod
    def from_config(cls, cfg: RunConfig) -> "IndividualCoeffs":
        return cls(cfg.a_thr, cfg.a_assign, cfg.a_col)


@dataclass(frozen=True)
class RewardBreakdown:
    global_r: float
    individual_r: np.ndarray
    throughput_total: float  # normalized, sum of log2(1 + sinr) bottlenecks
    throughput_bps: float
    coop_bonus: float
    p_col: float
    p_fly: float
    assignment: np.ndarray
    per_agent_throughput: np.ndarray


def collision_penalty(world: World, d_safe: float) -> float:
    if d_safe <= 0:
        raise ValueError("d_safe must be positive")
    pos = world.uav_pos
    total = 0.0
    for i in range(len(pos)):
        for j in range(i + 1, len(pos)):
            d = math.dist(pos[i], pos[j])
            if d < d_safe:
                total += 1.0 - d / d_safe
    return total


def flight_penalty(actions: Sequence[int], cfg: RunConfig) -> float:
    n_power = len(cfg.power_levels)
    return sum(step_energy(decode_action(a, n_power).move, cfg) for a in actions)


def assignment_counts(assignment: np.ndarray, n_uavs: int) -> np.ndarray:
    return np.bincount(np.asarray(assignment, dtype=np.int64), minlength=n_uavs)


def cooperation_bonus(world: World, assignment: np.ndarray, cfg: RunConfig) -> float:
    """Equal mix of workload balance and a Gaussian inter-UAV spacing score, in [0, 1]."""
    n_u = world.n_uavs
    counts = assignment_counts(assignment, n_u).astype(float)
    worst = np.zeros(n_u)
    worst[0] = world.n_pairs
    var_max = worst.var()
    balance = 1.0 - counts.var() / var_max if var_max > 0 else 1.0

    kernel = []
    for i in range(n_u):
        for j in range(i + 1, n_u):
            d = math.dist(world.uav_pos[i], world.uav_pos[j])
            kernel.append(math.exp(-((d - cfg.d_ideal) ** 2) / (2.0 * cfg.spacing_sigma ** 2)))
    spacing = sum(kernel) / len(kernel) if kernel else 1.0
    return 0.5 * balance + 0.5 * spacing


def global_reward(throughput_total: float, coop: float, p_col: float, p_fly: float,
                  w: RewardWeights) -> float:
    return w.w_thr * throughput_total + w.w_coop * coop - w.w_col * p_col - w.w_fly * p_fly


def individual_reward(agent_idx: int, per_agent_throughput: float, assignment: np.ndarray,
                      p_col: float, c: IndividualCoeffs) -> float:
    n_assigned = int(np.count_nonzero(np.asarray(assignment) == agent_idx))
    return c.a_thr * per_agent_throughput + c.a_assign * n_assigned - c.a_col * p_col


def homeostatic_update(w: RewardWeights, recent_collision_rate: float, recent_throughput: float,
                       progress: float, cfg: RunConfig) -> RewardWeights:
    """Shift weight from safety toward throughput once training is far enough along.

    Before ``cfg.curriculum_start`` the weights are returned untouched. After it,
    a collision rate under target relaxes ``w_col`` and raises ``w_thr``; a rate
    above target does the opposite. ``recent_throughput`` is logged by callers
    but does not enter the rule.
    """
    if not 0.0 <= progress <= 1.0:
        raise ValueError("progress must be a fraction")
    if progress < cfg.curriculum_start:
        return w
    lo, hi = cfg.weight_floor, cfg.weight_ceiling
    if recent_collision_rate < cfg.collision_target:
        col, thr = cfg.homeostatic_down, cfg.homeostatic_up
    else:
        col, thr = cfg.homeostatic_up, cfg.homeostatic_down
    return replace(
        w,
        w_col=min(max(w.w_col * col, lo), hi),
        w_thr=min(max(w.w_thr * thr, lo), hi),
    )


def compute_rewards(world: World, actions: Sequence[int], weights: RewardWeights,
                    cfg: RunConfig) -> RewardBreakdown:
    """Full reward breakdown for the post-transition world and the actions that led there."""
    assignment = assign_gcvs(world)
    rates_bps = pair_rates(world, cfg, assignment)
    rates = rates_bps / cfg.bandwidth
    per_agent = np.zeros(world.n_uavs)
    np.add.at(per_agent, assignment, rates)
    thr = float(rates.sum())
    coop = cooperation_bonus(world, assignment, cfg)
    p_col = collision_penalty(world, cfg.d_safe)
    p_fly = flight_penalty(actions, cfg)
    coeffs = IndividualCoeffs.from_config(cfg)
    indiv = np.array([individual_reward(i, per_agent[i], assignment, p_col, coeffs)
                      for i in range(world.n_uavs)])
    return RewardBreakdown(
        global_r=global_reward(thr, coop, p_col, p_fly, weights),
        individual_r=indiv,
        throughput_total=thr,
        throughput_bps=float(rates_bps.sum()),
        coop_bonus=coop,
        p_col=p_col,
        p_fly=p_fly,
        assignment=assignment,
        per_agent_throughput=per_agent,
    )
