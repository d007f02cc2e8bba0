import sys

import numpy as np
import pytest
from hypothesis import settings

from uav_marl.config import RunConfig
from uav_marl.env import World, reset_world

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def cfg():
    return RunConfig()


@pytest.fixture
def small_cfg():
    return RunConfig(n_uavs=3, n_pairs=3, jammer_positions=((2.0, 2.0, 1.5),))


def make_world(uavs, pairs=(), jammers=(), power_index=None, cfg=None):
    """World from explicit coordinates; pairs are ((sx, sy), (dx, dy))."""
    cfg = cfg or RunConfig()
    uavs = np.asarray(uavs, dtype=float).reshape(-1, 3)
    n_c = len(pairs)
    src = np.zeros((n_c, 3))
    dst = np.zeros((n_c, 3))
    for n, (s, d) in enumerate(pairs):
        src[n, :2] = s
        dst[n, :2] = d
    jam = np.asarray([j[0] for j in jammers], dtype=float).reshape(-1, 3)
    jam_p = np.asarray([j[1] for j in jammers], dtype=float)
    if power_index is None:
        power_index = [len(cfg.power_levels) - 1] * len(uavs)
    return World(
        uav_pos=uavs,
        energy=np.full(len(uavs), cfg.battery),
        tau_stay=np.zeros(len(uavs), dtype=np.int64),
        power_index=np.asarray(power_index, dtype=np.int64),
        src_pos=src,
        dst_pos=dst,
        src_vel=np.zeros((n_c, 3)),
        dst_vel=np.zeros((n_c, 3)),
        jammer_pos=jam,
        jammer_power=jam_p,
    )


@pytest.fixture
def random_world(cfg):
    return reset_world(cfg, np.random.default_rng(7))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, title, detail = results[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n:2d}. {title}: {detail}")
