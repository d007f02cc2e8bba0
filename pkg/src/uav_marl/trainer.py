"""Centralized critic, decentralized Double-DQN actors, and the training loop."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .config import RunConfig
from .env import apply_actions, global_state, observe_all, reset_world, safety_mask, step_gcvs
from .metrics import EpisodeMetrics, EpisodeTracker, smooth
from .nn import Adam, MlpNet, Normalizer, clip_grad_norm, huber
from .replay import Batch, PriorityBuffer, Transition
from .rewards import RewardWeights, compute_rewards, homeostatic_update

log = logging.getLogger(__name__)


class TrainingDiverged(FloatingPointError):
    pass


def env_rng(seed: int, episode: int) -> np.random.Generator:
    """Environment randomness for one episode; shared by training and evaluation."""
    return np.random.default_rng((seed, 0, episode))


def policy_rng(seed: int, episode: int) -> np.random.Generator:
    return np.random.default_rng((seed, 1, episode))


@dataclass
class CtdeAgents:
    actors: list[MlpNet]
    actor_targets: list[MlpNet]
    critic: MlpNet
    critic_target: MlpNet
    obs_norm: Normalizer
    state_norm: Normalizer
    actor_opts: list[Adam] = field(default_factory=list)
    critic_opt: Adam | None = None

    @classmethod
    def build(cls, cfg: RunConfig, rng: np.random.Generator) -> "CtdeAgents":
        actors = [MlpNet([cfg.obs_dim, *cfg.actor_hidden, cfg.n_actions], rng)
                  for _ in range(cfg.n_uavs)]
        critic = MlpNet([cfg.state_dim, *cfg.critic_hidden, 1], rng)
        agents = cls(
            actors=actors,
            actor_targets=[a.copy() for a in actors],
            critic=critic,
            critic_target=critic.copy(),
            obs_norm=Normalizer(cfg.obs_dim, cfg.norm_eps, cfg.norm_clip),
            state_norm=Normalizer(cfg.state_dim, cfg.norm_eps, cfg.norm_clip),
        )
        agents.attach_optimizers(cfg)
        return agents

    def attach_optimizers(self, cfg: RunConfig) -> None:
        kw = dict(beta1=cfg.adam_beta1, beta2=cfg.adam_beta2, eps=cfg.adam_eps)
        self.actor_opts = [Adam(a.params, cfg.actor_lr, **kw) for a in self.actors]
        self.critic_opt = Adam(self.critic.params, cfg.critic_lr, **kw)

    def value(self, s: np.ndarray, target: bool = False) -> np.ndarray:
        net = self.critic_target if target else self.critic
        return net(self.state_norm.apply(np.atleast_2d(s)))[:, 0]


# ---------------------------------------------------------------- acting

def masked_greedy(q: np.ndarray, mask: np.ndarray) -> int:
    return int(np.argmax(np.where(mask, q, -np.inf)))


def select_action(actor: MlpNet, obs: np.ndarray, eps: float, mask: np.ndarray,
                  rng: np.random.Generator) -> int:
    """Masked epsilon-greedy; ``obs`` is already normalized."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("mask allows no action")
    if rng.random() < eps:
        allowed = np.flatnonzero(mask)
        return int(allowed[rng.integers(len(allowed))])
    return masked_greedy(actor(obs), mask)


def epsilon_at(step: int, cfg: RunConfig) -> float:
    horizon = cfg.eps_decay_fraction * cfg.total_steps
    if horizon <= 0:
        return cfg.eps_end
    frac = min(step / horizon, 1.0)
    return cfg.eps_start + frac * (cfg.eps_end - cfg.eps_start)


def beta_at(step: int, cfg: RunConfig) -> float:
    frac = min(step / cfg.total_steps, 1.0)
    return cfg.per_beta_start + frac * (cfg.per_beta_end - cfg.per_beta_start)


# ---------------------------------------------------------------- targets and losses

def critic_target(global_r, s_next, done, agents: CtdeAgents, gamma: float) -> np.ndarray:
    """TD target R + gamma * V_target(s'), with no bootstrap on terminal rows."""
    r = np.atleast_1d(np.asarray(global_r, dtype=float))
    done = np.atleast_1d(np.asarray(done, dtype=bool))
    v_next = agents.value(s_next, target=True)
    return np.where(done, r, r + gamma * v_next)


def advantage(global_r, s, s_next, done, agents: CtdeAgents, gamma: float) -> np.ndarray:
    """Team advantage: target-critic TD target minus the online critic's V(s)."""
    return critic_target(global_r, s_next, done, agents, gamma) - agents.value(s)


def actor_target(individual_r, adv, obs_next, done, actor_online: MlpNet,
                 actor_target_net: MlpNet, gamma: float, lam: float) -> np.ndarray:
    """Composite Double-DQN target ``r_i + lam * A + gamma * Q_target(o', argmax Q_online(o'))``.

    ``obs_next`` must already be normalized. The argmax runs over the full
    action set.
    """
    r = np.atleast_1d(np.asarray(individual_r, dtype=float))
    adv = np.atleast_1d(np.asarray(adv, dtype=float))
    done = np.atleast_1d(np.asarray(done, dtype=bool))
    o2 = np.atleast_2d(obs_next)
    a_star = np.argmax(actor_online(o2), axis=1)
    q_next = actor_target_net(o2)[np.arange(len(o2)), a_star]
    base = r + lam * adv
    return np.where(done, base, base + gamma * q_next)


def _check_finite(loss: float, what: str) -> None:
    if not np.isfinite(loss):
        raise TrainingDiverged(f"non-finite {what} loss: {loss!r}")


def critic_update(agents: CtdeAgents, batch: Batch, weights: np.ndarray,
                  cfg: RunConfig) -> tuple[float, np.ndarray, np.ndarray]:
    """One importance-weighted Huber step on the critic.

    Returns the pre-step loss, the targets ``y_v`` and the residuals
    ``y_v - V(s)``; the residuals are also the team advantage for this batch.
    """
    y_v = critic_target(batch.global_r, batch.s_next, batch.done, agents, cfg.gamma)
    out, cache = agents.critic.forward(agents.state_norm.apply(batch.s))
    resid = y_v - out[:, 0]
    loss_el, dloss = huber(resid, cfg.huber_delta)
    w = np.asarray(weights, dtype=float)
    n = len(resid)
    loss = float(np.sum(w * loss_el) / n)
    _check_finite(loss, "critic")
    grad_out = (-w * dloss / n)[:, None]
    grads, _ = agents.critic.backward(cache, grad_out)
    clip_grad_norm(grads, cfg.grad_clip)
    agents.critic_opt.step(agents.critic.params, grads)
    return loss, y_v, resid


def actor_update(agents: CtdeAgents, agent_idx: int, batch: Batch, weights: np.ndarray,
                 adv: np.ndarray, cfg: RunConfig) -> tuple[float, np.ndarray, np.ndarray]:
    """One importance-weighted Huber step on actor ``agent_idx`` through the taken action only.

    Returns the pre-step loss, the targets ``y_q`` and the residuals.
    """
    actor = agents.actors[agent_idx]
    o = agents.obs_norm.apply(batch.obs[:, agent_idx])
    o2 = agents.obs_norm.apply(batch.obs_next[:, agent_idx])
    y_q = actor_target(batch.individual_r[:, agent_idx], adv, o2, batch.done, actor,
                       agents.actor_targets[agent_idx], cfg.gamma, cfg.advantage_scale)
    q, cache = actor.forward(o)
    rows = np.arange(len(q))
    taken = batch.actions[:, agent_idx]
    resid = y_q - q[rows, taken]
    loss_el, dloss = huber(resid, cfg.huber_delta)
    w = np.asarray(weights, dtype=float)
    n = len(resid)
    loss = float(np.sum(w * loss_el) / n)
    _check_finite(loss, f"actor {agent_idx}")
    grad_out = np.zeros_like(q)
    grad_out[rows, taken] = -w * dloss / n
    grads, _ = actor.backward(cache, grad_out)
    clip_grad_norm(grads, cfg.grad_clip)
    agents.actor_opts[agent_idx].step(actor.params, grads)
    return loss, y_q, resid


def polyak_update(online: MlpNet, target: MlpNet, tau: float) -> None:
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [0, 1]")
    for p, tp in zip(online.params, target.params):
        if tau == 1.0:
            tp[...] = p
        elif tau > 0.0:
            tp *= 1.0 - tau
            tp += tau * p


def td_error_for_priority(critic_resid: np.ndarray, actor_resids: np.ndarray) -> np.ndarray:
    """|critic residual| plus the mean absolute actor residual; ``actor_resids`` is (N_U, B)."""
    return np.abs(critic_resid) + np.mean(np.abs(actor_resids), axis=0)


@dataclass
class LearnStats:
    batch: Batch
    weights: np.ndarray
    critic_loss: float
    actor_losses: list[float]
    y_v: np.ndarray
    advantage: np.ndarray
    y_q: np.ndarray  # (N_U, B)
    priorities: np.ndarray


def learn_step(agents: CtdeAgents, buf: PriorityBuffer, rng: np.random.Generator,
               cfg: RunConfig) -> LearnStats:
    """Sample a batch, update the critic, then every actor, then the priorities."""
    batch, idx, w = buf.sample(cfg.batch_size, rng)
    critic_loss, y_v, adv = critic_update(agents, batch, w, cfg)
    actor_losses, y_qs, actor_resids = [], [], []
    for i in range(len(agents.actors)):
        loss, y_q, resid = actor_update(agents, i, batch, w, adv, cfg)
        actor_losses.append(loss)
        y_qs.append(y_q)
        actor_resids.append(resid)
    prio = td_error_for_priority(adv, np.array(actor_resids))
    buf.update_priorities(idx, prio)
    return LearnStats(batch, w, critic_loss, actor_losses, y_v, adv, np.array(y_qs), prio)


def sync_targets(agents: CtdeAgents, tau: float) -> None:
    polyak_update(agents.critic, agents.critic_target, tau)
    for a, t in zip(agents.actors, agents.actor_targets):
        polyak_update(a, t, tau)


# ---------------------------------------------------------------- loop

@dataclass
class TrainResult:
    agents: CtdeAgents
    rows: list[EpisodeMetrics]
    n_updates: int


def train(cfg: RunConfig, seed: int = 0, checkpoint_dir: str | Path | None = None,
          on_episode: Callable[[EpisodeMetrics], None] | None = None,
          on_learn: Callable[[LearnStats], None] | None = None) -> TrainResult:
    """Run CTDE training for ``cfg.total_steps`` environment steps.

    Episodes use the same per-episode environment seeds as evaluation, so a
    policy evaluated from episode ``e`` sees the scenes training saw.
    ``on_learn`` sees every learning step's batch and targets.
    """
    from .checkpoint import save_checkpoint

    agents = CtdeAgents.build(cfg, np.random.default_rng((seed, 3)))
    buf = PriorityBuffer(cfg.buffer_capacity, cfg.per_alpha, cfg.per_beta_start, cfg.per_eps)
    sample_rng = np.random.default_rng((seed, 2))
    weights = RewardWeights.from_config(cfg)
    recent_col: deque[float] = deque(maxlen=cfg.collision_window)
    rows: list[EpisodeMetrics] = []
    step = 0
    n_updates = 0
    episode = 0

    while step < cfg.total_steps:
        e_rng, p_rng = env_rng(seed, episode), policy_rng(seed, episode)
        world = reset_world(cfg, e_rng)
        tracker = EpisodeTracker(episode)
        obs = observe_all(world, cfg)
        s = global_state(world, cfg)
        eps = epsilon_at(step, cfg)
        for t in range(cfg.episode_length):
            if step >= cfg.total_steps:
                break
            eps = epsilon_at(step, cfg)
            agents.obs_norm.observe(obs)
            agents.state_norm.observe(s)
            nobs = agents.obs_norm.apply(obs)
            actions = [select_action(agents.actors[i], nobs[i], eps,
                                     safety_mask(world, i, cfg), p_rng)
                       for i in range(cfg.n_uavs)]
            nxt = step_gcvs(apply_actions(world, actions, cfg), e_rng, cfg)
            rb = compute_rewards(nxt, actions, weights, cfg)
            if not np.isfinite(rb.global_r) or not np.all(np.isfinite(rb.individual_r)):
                raise TrainingDiverged(f"non-finite reward at step {step}")
            obs_next = observe_all(nxt, cfg)
            s_next = global_state(nxt, cfg)
            done = t == cfg.episode_length - 1
            tr = Transition(s, obs, np.array(actions), rb.global_r, rb.individual_r,
                            s_next, obs_next, done)
            buf.push(tr)
            tracker.record(nxt, rb)
            recent_col.append(rb.p_col)
            step += 1

            if step > cfg.warmup and len(buf) >= cfg.batch_size:
                buf.beta = beta_at(step, cfg)
                stats = learn_step(agents, buf, sample_rng, cfg)
                n_updates += 1
                if on_learn is not None:
                    on_learn(stats)
            if step % cfg.target_update_period == 0:
                sync_targets(agents, cfg.tau)
            if checkpoint_dir is not None and step % cfg.checkpoint_period == 0:
                save_checkpoint(agents, Path(checkpoint_dir) / f"ckpt_{step:08d}.npz")
            world, obs, s = nxt, obs_next, s_next

        row = tracker.finish(step, eps, weights)
        rows.append(row)
        if on_episode is not None:
            on_episode(row)
        log.info("episode %d steps %d reward %.4f thr %.4f col %.4f eps %.3f",
                 episode, step, row.mean_global_reward, row.throughput_norm,
                 row.collision_penalty, eps)
        weights = homeostatic_update(weights, float(np.mean(recent_col)), row.throughput_norm,
                                     min(step / cfg.total_steps, 1.0), cfg)
        episode += 1

    if checkpoint_dir is not None:
        save_checkpoint(agents, Path(checkpoint_dir) / "final.npz")
    return TrainResult(agents, smooth(rows, cfg.smoothing_window), n_updates)

