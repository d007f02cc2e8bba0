"""Checkpoint file: one ``.npz`` archive with a version tag, per-net layer sizes and
parameters in layer order, and both normalizers' statistics."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .nn import MlpNet, Normalizer

CHECKPOINT_VERSION = "uav_marl-ckpt-v1"


class CheckpointError(ValueError):
    pass


def _put_net(store: dict, key: str, net: MlpNet) -> None:
    store[f"{key}/sizes"] = np.array(net.sizes, dtype=np.int64)
    for k, p in enumerate(net.params):
        store[f"{key}/p{k}"] = p


def _get_net(data, key: str) -> MlpNet:
    sizes = [int(s) for s in data[f"{key}/sizes"]]
    net = MlpNet(sizes)
    net.load_params([data[f"{key}/p{k}"] for k in range(2 * (len(sizes) - 1))])
    return net


def _put_norm(store: dict, key: str, norm: Normalizer) -> None:
    store[f"{key}/mean"] = norm.mean
    store[f"{key}/var"] = norm.var
    store[f"{key}/meta"] = np.array([norm.count, norm.eps, norm.clip], dtype=float)


def _get_norm(data, key: str) -> Normalizer:
    count, eps, clip = data[f"{key}/meta"]
    mean = data[f"{key}/mean"]
    norm = Normalizer(len(mean), float(eps), float(clip))
    norm.mean, norm.var, norm.count = mean.copy(), data[f"{key}/var"].copy(), int(count)
    return norm


def save_checkpoint(agents, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    store: dict[str, np.ndarray] = {
        "version": np.array(CHECKPOINT_VERSION),
        "n_agents": np.array(len(agents.actors), dtype=np.int64),
    }
    for i, (a, t) in enumerate(zip(agents.actors, agents.actor_targets)):
        _put_net(store, f"actor{i}", a)
        _put_net(store, f"actor_target{i}", t)
    _put_net(store, "critic", agents.critic)
    _put_net(store, "critic_target", agents.critic_target)
    _put_norm(store, "obs_norm", agents.obs_norm)
    _put_norm(store, "state_norm", agents.state_norm)
    with path.open("wb") as fh:
        np.savez(fh, **store)
    return path


def load_checkpoint(path: str | Path):
    """Rebuild agents from a checkpoint; optimizers start fresh."""
    from .trainer import CtdeAgents

    with np.load(Path(path), allow_pickle=False) as data:
        if "version" not in data.files or str(data["version"]) != CHECKPOINT_VERSION:
            found = str(data["version"]) if "version" in data.files else None
            raise CheckpointError(f"unsupported checkpoint version {found!r}, "
                                  f"expected {CHECKPOINT_VERSION!r}")
        n = int(data["n_agents"])
        return CtdeAgents(
            actors=[_get_net(data, f"actor{i}") for i in range(n)],
            actor_targets=[_get_net(data, f"actor_target{i}") for i in range(n)],
            critic=_get_net(data, "critic"),
            critic_target=_get_net(data, "critic_target"),
            obs_norm=_get_norm(data, "obs_norm"),
            state_norm=_get_norm(data, "state_norm"),
        )
