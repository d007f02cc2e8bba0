"""Jammed multi-UAV relay world: entities, dynamics, channel model, observations.

Entity collections are stored struct-of-arrays inside :class:`World`; every
operation returns a fresh world so a step is a pure function of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np

from .config import RunConfig

MOVES = ("Stay", "North", "South", "East", "West", "Up", "Down")
STAY, NORTH, SOUTH, EAST, WEST, UP, DOWN = range(7)
# unit displacement per move; North is +y, East is +x
MOVE_DIRS = np.array(
    [
        [0, 0, 0],
        [0, 1, 0],
        [0, -1, 0],
        [1, 0, 0],
        [-1, 0, 0],
        [0, 0, 1],
        [0, 0, -1],
    ],
    dtype=float,
)


class Action(NamedTuple):
    move: int
    power_index: int


def encode_action(move: int, power_index: int, n_power: int = 3) -> int:
    return n_power * move + power_index


def decode_action(index: int, n_power: int = 3) -> Action:
    return Action(*divmod(int(index), n_power))


def move_vector(move: int, cfg: RunConfig) -> np.ndarray:
    d = MOVE_DIRS[move]
    return np.array([d[0] * cfg.step_xy, d[1] * cfg.step_xy, d[2] * cfg.step_z])


@dataclass(frozen=True)
class World:
    uav_pos: np.ndarray  # (N_U, 3)
    energy: np.ndarray  # (N_U,)
    tau_stay: np.ndarray  # (N_U,) int
    power_index: np.ndarray  # (N_U,) int
    src_pos: np.ndarray  # (N_C, 3), z == 0
    dst_pos: np.ndarray
    src_vel: np.ndarray  # (N_C, 3), z == 0
    dst_vel: np.ndarray
    jammer_pos: np.ndarray  # (J, 3)
    jammer_power: np.ndarray  # (J,)
    step_count: int = 0

    @property
    def n_uavs(self) -> int:
        return len(self.uav_pos)

    @property
    def n_pairs(self) -> int:
        return len(self.src_pos)

    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.src_pos + self.dst_pos)

    def copy(self) -> "World":
        return replace(
            self,
            **{
                name: getattr(self, name).copy()
                for name in ("uav_pos", "energy", "tau_stay", "power_index",
                             "src_pos", "dst_pos", "src_vel", "dst_vel")
            },
        )


def _draw_velocities(rng: np.random.Generator, n: int, v_max: float) -> np.ndarray:
    heading = rng.uniform(0.0, 2.0 * math.pi, size=n)
    speed = rng.uniform(0.0, v_max, size=n)
    vel = np.zeros((n, 3))
    vel[:, 0] = speed * np.cos(heading)
    vel[:, 1] = speed * np.sin(heading)
    return vel


def reset_world(cfg: RunConfig, rng: np.random.Generator) -> World:
    """Random initial scene: separated UAVs on the altitude grid, ground pairs anywhere."""
    L = cfg.arena_size
    n_levels = int(math.floor((cfg.h_max - cfg.h_min) / cfg.step_z)) + 1
    uav_pos = np.zeros((cfg.n_uavs, 3))
    for i in range(cfg.n_uavs):
        for _ in range(10_000):
            p = np.array([
                rng.uniform(0.0, L),
                rng.uniform(0.0, L),
                cfg.h_min + cfg.step_z * rng.integers(n_levels),
            ])
            if all(np.linalg.norm(p - uav_pos[j]) >= cfg.d_safe for j in range(i)):
                break
        else:
            raise RuntimeError("could not place UAVs at safe separation")
        uav_pos[i] = p

    def ground(n):
        pos = np.zeros((n, 3))
        pos[:, :2] = rng.uniform(0.0, L, size=(n, 2))
        return pos

    src, dst = ground(cfg.n_pairs), ground(cfg.n_pairs)
    vel = _draw_velocities(rng, 2 * cfg.n_pairs, cfg.gcv_max_speed)
    jam = np.array(cfg.jammer_positions_m, dtype=float).reshape(-1, 3)
    return World(
        uav_pos=uav_pos,
        energy=np.full(cfg.n_uavs, float(cfg.battery)),
        tau_stay=np.zeros(cfg.n_uavs, dtype=np.int64),
        power_index=np.full(cfg.n_uavs, len(cfg.power_levels) - 1, dtype=np.int64),
        src_pos=src,
        dst_pos=dst,
        src_vel=vel[: cfg.n_pairs],
        dst_vel=vel[cfg.n_pairs:],
        jammer_pos=jam,
        jammer_power=np.full(len(jam), float(cfg.jammer_power)),
    )


# ---------------------------------------------------------------- channel model

def channel_gain(p_x: Sequence[float], p_y: Sequence[float], alpha: float = 2.0) -> float:
    """Deterministic path-loss gain ``d ** -alpha``."""
    d = math.dist(p_x, p_y)
    if d == 0.0:
        raise ValueError("channel gain undefined for coincident points")
    return d ** -alpha


def jamming_interference(p_rx, jammers, alpha: float = 2.0) -> float:
    """Total jamming power at ``p_rx`` from ``(position, power)`` pairs."""
    return sum(power * channel_gain(pos, p_rx, alpha) for pos, power in jammers)


def co_channel_interference(rx, active_tx, alpha: float = 2.0) -> float:
    return sum(power * channel_gain(pos, rx, alpha) for pos, power in active_tx)


def sinr(p_tx, p_tx_power: float, p_rx, noise: float, i_co: float, i_jam: float,
         alpha: float = 2.0) -> float:
    if noise <= 0:
        raise ValueError("noise power must be positive")
    return p_tx_power * channel_gain(p_tx, p_rx, alpha) / (noise + i_co + i_jam)


def link_rate(sinr_value: float, bandwidth: float) -> float:
    """Shannon-Hartley capacity in bits/s."""
    if sinr_value < 0 or bandwidth <= 0:
        raise ValueError("need sinr >= 0 and bandwidth > 0")
    return bandwidth * math.log2(1.0 + sinr_value)


def assign_gcvs(world: World) -> np.ndarray:
    """Relay index for every pair: UAV nearest the pair midpoint, lowest index on ties."""
    mids = world.midpoints()
    d = np.linalg.norm(mids[:, None, :] - world.uav_pos[None, :, :], axis=2)
    return np.argmin(d, axis=1)


def _jammers(world: World):
    return list(zip(world.jammer_pos.tolist(), world.jammer_power.tolist()))


def hop_rates(pair_idx: int, relay_idx: int, world: World, cfg: RunConfig,
              assignment: np.ndarray | None = None) -> tuple[float, float]:
    """(uplink, downlink) rates in bits/s for one pair through one relay.

    Uplink interferers are every other source; downlink interferers are every
    other UAV currently relaying at least one pair. Hops are frequency separated.
    """
    if assignment is None:
        assignment = assign_gcvs(world)
    alpha = cfg.path_loss_exp
    jam = _jammers(world)
    relay = world.uav_pos[relay_idx].tolist()
    src = world.src_pos[pair_idx].tolist()
    dst = world.dst_pos[pair_idx].tolist()

    ul_tx = [(world.src_pos[m].tolist(), cfg.gcv_tx_power)
             for m in range(world.n_pairs) if m != pair_idx]
    ul = sinr(src, cfg.gcv_tx_power, relay, cfg.noise_power,
              co_channel_interference(relay, ul_tx, alpha),
              jamming_interference(relay, jam, alpha), alpha)

    transmitting = sorted(set(int(u) for u in assignment) - {int(relay_idx)})
    dl_tx = [(world.uav_pos[u].tolist(), cfg.power_levels[world.power_index[u]])
             for u in transmitting]
    p_relay = cfg.power_levels[world.power_index[relay_idx]]
    dl = sinr(relay, p_relay, dst, cfg.noise_power,
              co_channel_interference(dst, dl_tx, alpha),
              jamming_interference(dst, jam, alpha), alpha)
    return link_rate(ul, cfg.bandwidth), link_rate(dl, cfg.bandwidth)


def pair_rate(pair_idx: int, relay_idx: int, world: World, cfg: RunConfig,
              assignment: np.ndarray | None = None) -> float:
    """Two-hop bottleneck rate of a pair, bits/s."""
    return min(hop_rates(pair_idx, relay_idx, world, cfg, assignment))


def pair_rates(world: World, cfg: RunConfig, assignment: np.ndarray | None = None) -> np.ndarray:
    if assignment is None:
        assignment = assign_gcvs(world)
    return np.array([pair_rate(n, int(assignment[n]), world, cfg, assignment)
                     for n in range(world.n_pairs)])


# ---------------------------------------------------------------- dynamics

def step_energy(move: int, cfg: RunConfig) -> float:
    e = cfg.energy_hover
    if move != STAY:
        e += cfg.energy_move
    if move == UP:
        e += cfg.energy_climb
    return e


def clamp_position(p: np.ndarray, cfg: RunConfig) -> np.ndarray:
    L = cfg.arena_size
    return np.array([min(max(p[0], 0.0), L), min(max(p[1], 0.0), L),
                     min(max(p[2], cfg.h_min), cfg.h_max)])


def apply_actions(world: World, actions: Sequence[int], cfg: RunConfig) -> World:
    """Move every UAV by its composite action and advance the clock."""
    if len(actions) != world.n_uavs:
        raise ValueError(f"expected {world.n_uavs} actions, got {len(actions)}")
    n_power = len(cfg.power_levels)
    out = world.copy()
    for i, a in enumerate(actions):
        move, power = decode_action(a, n_power)
        if move == STAY:
            out.tau_stay[i] += 1
        else:
            out.uav_pos[i] = clamp_position(world.uav_pos[i] + move_vector(move, cfg), cfg)
            out.tau_stay[i] = 0
        out.energy[i] = max(0.0, world.energy[i] - step_energy(move, cfg))
        out.power_index[i] = power
    return replace(out, step_count=world.step_count + 1)


def _reflect(pos: np.ndarray, vel: np.ndarray, L: float) -> None:
    for axis in (0, 1):
        low = pos[:, axis] < 0.0
        pos[low, axis] = -pos[low, axis]
        vel[low, axis] = -vel[low, axis]
        high = pos[:, axis] > L
        pos[high, axis] = 2.0 * L - pos[high, axis]
        vel[high, axis] = -vel[high, axis]
    np.clip(pos[:, :2], 0.0, L, out=pos[:, :2])


def step_gcvs(world: World, rng: np.random.Generator, cfg: RunConfig) -> World:
    """Random-walk the ground nodes one second, redrawing velocities every turn period."""
    out = world.copy()
    n = world.n_pairs
    if world.step_count % cfg.gcv_turn_period == 0:
        vel = _draw_velocities(rng, 2 * n, cfg.gcv_max_speed)
        out = replace(out, src_vel=vel[:n], dst_vel=vel[n:])
    for pos, vel in ((out.src_pos, out.src_vel), (out.dst_pos, out.dst_vel)):
        pos += vel
        _reflect(pos, vel, cfg.arena_size)
        pos[:, 2] = 0.0
    return out


# ---------------------------------------------------------------- observations

def nearest_pairs(world: World, agent_idx: int, k: int) -> np.ndarray:
    """Indices of the k pairs whose midpoints are closest, ascending, ties by index."""
    d = np.linalg.norm(world.midpoints() - world.uav_pos[agent_idx], axis=1)
    order = np.lexsort((np.arange(len(d)), d))
    return order[:k]


def observe(world: World, agent_idx: int, cfg: RunConfig) -> np.ndarray:
    """Local observation of one agent, length ``5 + 5 * k_nearest``.

    Layout: own position / L (3), energy fraction, tau_stay / episode length,
    then per nearest pair: (midpoint - own position) / L (3) and the source and
    destination gains scaled by ``h_min ** alpha`` (1 when directly overhead at h_min).
    Missing pairs (k > N_C) are zero padded.
    """
    L = cfg.arena_size
    alpha = cfg.path_loss_exp
    pos = world.uav_pos[agent_idx]
    obs = np.zeros(cfg.obs_dim)
    obs[:3] = pos / L
    obs[3] = world.energy[agent_idx] / cfg.battery
    obs[4] = world.tau_stay[agent_idx] / cfg.episode_length
    mids = world.midpoints()
    gain_scale = cfg.h_min ** alpha
    for slot, n in enumerate(nearest_pairs(world, agent_idx, cfg.k_nearest)):
        base = 5 + 5 * slot
        obs[base:base + 3] = (mids[n] - pos) / L
        obs[base + 3] = channel_gain(world.src_pos[n], pos, alpha) * gain_scale
        obs[base + 4] = channel_gain(world.dst_pos[n], pos, alpha) * gain_scale
    return obs


def observe_all(world: World, cfg: RunConfig) -> np.ndarray:
    return np.stack([observe(world, i, cfg) for i in range(world.n_uavs)])


def global_state(world: World, cfg: RunConfig) -> np.ndarray:
    L = cfg.arena_size
    uav = np.column_stack([
        world.uav_pos / L,
        world.energy / cfg.battery,
        world.tau_stay / cfg.episode_length,
    ])
    pairs = np.column_stack([world.src_pos[:, :2] / L, world.dst_pos[:, :2] / L])
    return np.concatenate([uav.ravel(), pairs.ravel()])


def decode_global_state(s: np.ndarray, cfg: RunConfig) -> dict[str, np.ndarray]:
    """Inverse of :func:`global_state` for the positional slots (meters)."""
    L = cfg.arena_size
    n_u = cfg.n_uavs
    uav = s[: 5 * n_u].reshape(n_u, 5)
    pairs = s[5 * n_u:].reshape(cfg.n_pairs, 4)
    return {
        "uav_pos": uav[:, :3] * L,
        "energy": uav[:, 3] * cfg.battery,
        "src_xy": pairs[:, :2] * L,
        "dst_xy": pairs[:, 2:] * L,
    }


# ---------------------------------------------------------------- safety

def move_allowed(world: World, agent_idx: int, move: int, cfg: RunConfig) -> bool:
    if move == STAY:
        return True
    L = cfg.arena_size
    p = world.uav_pos[agent_idx] + move_vector(move, cfg)
    if not (0.0 <= p[0] <= L and 0.0 <= p[1] <= L and cfg.h_min <= p[2] <= cfg.h_max):
        return False
    for j in range(world.n_uavs):
        if j != agent_idx and math.dist(p, world.uav_pos[j]) < cfg.d_safe:
            return False
    return True


def move_mask(world: World, agent_idx: int, cfg: RunConfig) -> np.ndarray:
    return np.array([move_allowed(world, agent_idx, m, cfg) for m in range(len(MOVES))])


def safety_mask(world: World, agent_idx: int, cfg: RunConfig) -> np.ndarray:
    """Boolean mask over the composite actions; power variants share their move's flag."""
    return np.repeat(move_mask(world, agent_idx, cfg), len(cfg.power_levels))
