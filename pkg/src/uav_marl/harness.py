"""Evaluation rollouts, run manifests and the glue used by the CLI."""

from __future__ import annotations

from pathlib import Path
from typing import Callable

import numpy as np
import yaml

from .baselines import BASELINES, Policy, make_policy
from .checkpoint import load_checkpoint, save_checkpoint  # noqa: F401  (re-exported)
from .config import RunConfig
from .env import apply_actions, observe_all, reset_world, safety_mask, step_gcvs
from .metrics import EpisodeMetrics, EpisodeTracker, export_metrics, smooth  # noqa: F401
from .rewards import RewardWeights, compute_rewards
from .trainer import CtdeAgents, env_rng, masked_greedy, policy_rng

POLICIES = BASELINES + ("ctde",)


def ctde_policy(agents: CtdeAgents) -> Policy:
    """Greedy (epsilon = 0) masked policy from trained actors."""

    def policy(world, agent_idx, obs, mask, rng) -> int:
        q = agents.actors[agent_idx](agents.obs_norm.apply(obs))
        return masked_greedy(q, mask)

    return policy


def resolve_policy(name: str, cfg: RunConfig, checkpoint: str | Path | None = None) -> Policy:
    if name == "ctde":
        if checkpoint is None:
            raise ValueError("the ctde policy needs a checkpoint")
        agents = load_checkpoint(checkpoint)
        if len(agents.actors) != cfg.n_uavs:
            raise ValueError(f"checkpoint has {len(agents.actors)} actors, config {cfg.n_uavs} UAVs")
        return ctde_policy(agents)
    return make_policy(name, cfg)


def run_episode(policy: Policy, cfg: RunConfig, seed: int, episode: int,
                on_decision: Callable | None = None,
                weights: RewardWeights | None = None) -> EpisodeMetrics:
    """Roll one episode with fixed reward weights; deterministic given (seed, episode).

    ``weights`` defaults to the configured initial weights.
    """
    e_rng, p_rng = env_rng(seed, episode), policy_rng(seed, episode)
    world = reset_world(cfg, e_rng)
    if weights is None:
        weights = RewardWeights.from_config(cfg)
    tracker = EpisodeTracker(episode)
    obs = observe_all(world, cfg)
    for _ in range(cfg.episode_length):
        masks = [safety_mask(world, i, cfg) for i in range(cfg.n_uavs)]
        actions = [policy(world, i, obs[i], masks[i], p_rng) for i in range(cfg.n_uavs)]
        if on_decision is not None:
            on_decision(world, actions, masks)
        world = step_gcvs(apply_actions(world, actions, cfg), e_rng, cfg)
        rb = compute_rewards(world, actions, weights, cfg)
        tracker.record(world, rb)
        obs = observe_all(world, cfg)
    return tracker.finish((episode + 1) * cfg.episode_length, 0.0, weights)


def run_eval(policy: str | Policy, cfg: RunConfig, episodes: int, seed: int = 0,
             checkpoint: str | Path | None = None, start_episode: int = 0,
             on_decision: Callable | None = None) -> list[EpisodeMetrics]:
    """Evaluate a named (or given) policy over ``episodes`` consecutive episode seeds."""
    if isinstance(policy, str):
        policy = resolve_policy(policy, cfg, checkpoint)
    rows = [run_episode(policy, cfg, seed, e, on_decision)
            for e in range(start_episode, start_episode + episodes)]
    return smooth(rows, cfg.smoothing_window)


def write_manifest(out_dir: str | Path, cfg: RunConfig, seed: int, **extra) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "manifest.yaml"
    doc = {"seed": seed, **{k: (str(v) if isinstance(v, Path) else v) for k, v in extra.items()},
           "config": cfg.to_dict()}
    path.write_text(yaml.safe_dump(doc, sort_keys=False))
    return path


def mean_of(rows: list[EpisodeMetrics], field: str) -> float:
    return float(np.mean([getattr(r, field) for r in rows]))
