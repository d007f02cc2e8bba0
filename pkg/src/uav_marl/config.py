"""Run configuration: every tunable of the simulator and the learner in one place."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

import yaml


class ConfigError(ValueError):
    """Raised for unparsable, unknown or inconsistent configuration values."""


@dataclass(frozen=True)
class RunConfig:
    # --- environment geometry and entities
    arena_size: float = 120.0
    h_min: float = 15.0
    h_max: float = 35.0
    n_uavs: int = 5
    n_pairs: int = 5
    # grid units, scaled by jammer_grid_cell into meters
    jammer_positions: tuple = ((2.0, 2.0, 1.5), (8.0, 8.0, 1.5))
    jammer_grid_cell: float = 10.0
    jammer_power: float = 0.5

    # --- radio
    bandwidth: float = 1.23e6
    power_levels: tuple = (0.05, 0.12, 0.25)
    gcv_tx_power: float = 0.25
    noise_power: float = 1e-10
    path_loss_exp: float = 2.0

    # --- dynamics
    step_xy: float = 10.0
    step_z: float = 5.0
    gcv_max_speed: float = 2.0
    gcv_turn_period: int = 10
    k_nearest: int = 3
    d_safe: float = 5.0
    energy_hover: float = 1.0
    energy_move: float = 0.5
    energy_climb: float = 0.5
    battery: float = 1e4

    # --- rewards
    w_thr: float = 1.0
    w_coop: float = 0.2
    w_col: float = 2.0
    w_fly: float = 0.05
    weight_floor: float = 0.1
    weight_ceiling: float = 5.0
    a_thr: float = 1.0
    a_assign: float = 0.1
    a_col: float = 1.0
    d_ideal: float = 30.0
    spacing_sigma: float = 15.0
    collision_target: float = 0.01
    collision_window: int = 200
    curriculum_start: float = 0.8
    homeostatic_down: float = 0.99
    homeostatic_up: float = 1.01

    # --- networks and optimisation
    actor_hidden: tuple = (128, 128)
    critic_hidden: tuple = (256, 256)
    actor_lr: float = 4e-4
    critic_lr: float = 3e-4
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    huber_delta: float = 1.0
    grad_clip: float = 10.0
    norm_clip: float = 10.0
    norm_eps: float = 1e-8

    # --- prioritized replay
    buffer_capacity: int = 100_000
    per_alpha: float = 0.6
    per_beta_start: float = 0.4
    per_beta_end: float = 1.0
    per_eps: float = 1e-3

    # --- training schedule
    total_steps: int = 1_200_000
    batch_size: int = 320
    gamma: float = 0.95
    tau: float = 0.010
    target_update_period: int = 200
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay_fraction: float = 0.8
    advantage_scale: float = 0.5
    warmup: int = 5_000
    episode_length: int = 400
    checkpoint_period: int = 50_000

    # --- baselines
    cruise_altitude: float = 25.0
    k_rep: float = 2.0
    d_safe_rep: float = 15.0
    k_sp: float = 1.0
    s_sp: float = 10.0

    # --- reporting
    smoothing_window: int = 50

    def __post_init__(self):
        validate(self)

    @property
    def n_jammers(self) -> int:
        return len(self.jammer_positions)

    @property
    def jammer_positions_m(self) -> list[tuple[float, float, float]]:
        c = self.jammer_grid_cell
        return [(x * c, y * c, z * c) for x, y, z in self.jammer_positions]

    @property
    def n_actions(self) -> int:
        return 7 * len(self.power_levels)

    @property
    def obs_dim(self) -> int:
        return 5 + 5 * self.k_nearest

    @property
    def state_dim(self) -> int:
        return 5 * self.n_uavs + 4 * self.n_pairs

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **_coerce(changes))

    def to_dict(self) -> dict[str, Any]:
        out = {}
        for f in fields(self):
            out[f.name] = _plain(getattr(self, f.name))
        return out


def _plain(v):
    if isinstance(v, tuple):
        return [_plain(x) for x in v]
    return v


def _tuplify(v):
    if isinstance(v, (list, tuple)):
        return tuple(_tuplify(x) for x in v)
    return v


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(values: dict) -> dict:
    out = {}
    for k, v in values.items():
        if k not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key: {k!r}")
        kind = _FIELD_TYPES[k]
        if kind == "tuple":
            v = _tuplify(v)
        elif kind == "int":
            if isinstance(v, float) and v.is_integer():
                v = int(v)
            if not isinstance(v, int) or isinstance(v, bool):
                raise ConfigError(f"{k} must be an integer, got {v!r}")
        elif kind == "float":
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{k} must be a number, got {v!r}")
            v = float(v)
        out[k] = v
    return out


def validate(cfg: RunConfig) -> None:
    positive = [
        "arena_size", "n_uavs", "n_pairs", "bandwidth", "gcv_tx_power", "noise_power",
        "path_loss_exp", "step_xy", "step_z", "gcv_turn_period", "k_nearest", "d_safe",
        "battery", "jammer_grid_cell", "jammer_power", "actor_lr", "critic_lr", "huber_delta",
        "grad_clip", "buffer_capacity", "total_steps", "batch_size", "target_update_period",
        "episode_length", "spacing_sigma", "collision_window", "smoothing_window", "per_eps",
        "s_sp", "d_safe_rep", "weight_floor",
    ]
    for name in positive:
        if not getattr(cfg, name) > 0:
            raise ConfigError(f"{name} must be positive, got {getattr(cfg, name)!r}")
    if cfg.h_min < 0 or cfg.h_min >= cfg.h_max:
        raise ConfigError(f"need 0 <= h_min < h_max, got [{cfg.h_min}, {cfg.h_max}]")
    if not cfg.power_levels:
        raise ConfigError("power_levels must not be empty")
    if any(p <= 0 for p in cfg.power_levels):
        raise ConfigError("power levels must be positive")
    if cfg.batch_size > cfg.buffer_capacity:
        raise ConfigError("batch_size exceeds buffer_capacity")
    if any(len(p) != 3 for p in cfg.jammer_positions):
        raise ConfigError("jammer positions must be 3-vectors")
    if not 0 <= cfg.gamma < 1:
        raise ConfigError("gamma must lie in [0, 1)")
    if not 0 <= cfg.tau <= 1:
        raise ConfigError("tau must lie in [0, 1]")
    if not 0 < cfg.eps_end <= cfg.eps_start <= 1:
        raise ConfigError("need 0 < eps_end <= eps_start <= 1")
    if not 0 <= cfg.curriculum_start <= 1:
        raise ConfigError("curriculum_start must be a fraction")
    if cfg.weight_floor > cfg.weight_ceiling:
        raise ConfigError("weight_floor above weight_ceiling")
    if not cfg.h_min <= cfg.cruise_altitude <= cfg.h_max:
        raise ConfigError("cruise_altitude outside altitude band")
    for name in ["gcv_max_speed", "energy_hover", "energy_move", "energy_climb", "w_thr",
                 "w_coop", "w_col", "w_fly", "a_thr", "a_assign", "a_col", "warmup",
                 "per_alpha", "per_beta_start", "per_beta_end", "advantage_scale"]:
        if getattr(cfg, name) < 0:
            raise ConfigError(f"{name} must be nonnegative")


def load_config(path: str | Path | None = None, **overrides) -> RunConfig:
    """Read a YAML mapping of overrides on top of the defaults.

    An empty file gives the defaults. Unknown keys are rejected.
    """
    values: dict = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from exc
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a key-value mapping")
        values.update(data)
    values.update(overrides)
    return RunConfig(**_coerce(values))
