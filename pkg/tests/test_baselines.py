import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_world
from uav_marl.baselines import (
    BASELINES, make_policy, power_constrained, random_policy, repulsion, safe_greedy_policy,
    spacing_coop_policy, spacing_force,
)
from uav_marl.config import RunConfig
from uav_marl.env import (
    DOWN, MOVE_DIRS, NORTH, SOUTH, STAY, UP, decode_action, observe_all, pair_rate, reset_world,
    safety_mask,
)


def _move(a, n_power=3):
    return decode_action(a, n_power).move


def _policy_move(policy, world, i, cfg):
    mask = safety_mask(world, i, cfg)
    return _move(policy(world, i, observe_all(world, cfg)[i], mask, np.random.default_rng(0)))


# ---------------------------------------------------------------- random

def test_random_single_allowed_action():
    mask = np.zeros(21, dtype=bool)
    mask[13] = True
    rng = np.random.default_rng(0)
    assert all(random_policy(None, 0, None, mask, rng) == 13 for _ in range(50))


def test_random_uniform_over_all_actions():
    rng = np.random.default_rng(0)
    mask = np.ones(21, dtype=bool)
    draws = [random_policy(None, 0, None, mask, rng) for _ in range(100_000)]
    freq = np.bincount(draws, minlength=21) / len(draws)
    assert np.abs(freq - 1 / 21).max() < 0.02


@given(st.lists(st.booleans(), min_size=21, max_size=21), st.integers(0, 1000))
def test_random_respects_mask(mask, seed):
    mask[0] = True
    mask = np.array(mask)
    rng = np.random.default_rng(seed)
    assert all(mask[random_policy(None, 0, None, mask, rng)] for _ in range(20))


def test_random_refuses_empty_mask():
    with pytest.raises(ValueError):
        random_policy(None, 0, None, np.zeros(21, dtype=bool), np.random.default_rng(0))


# ---------------------------------------------------------------- safe greedy

def test_safe_greedy_heads_north_without_neighbors():
    cfg = RunConfig()
    w = make_world([(60, 60, 25)], pairs=[((60, 100), (60, 100))])
    a = safe_greedy_policy(w, 0, None, safety_mask(w, 0, cfg), None, cfg=cfg)
    assert decode_action(a) == (NORTH, 2)


def test_repulsion_flips_choice():
    base = RunConfig(d_safe_rep=30.0)
    world = make_world([(60, 60, 25), (60, 80, 25)], pairs=[((60, 100), (60, 100))])
    calm = base.replace(k_rep=0.0)
    assert _policy_move(make_policy("safe_greedy", calm), world, 0, calm) == NORTH
    strong = base.replace(k_rep=5.0)
    assert _policy_move(make_policy("safe_greedy", strong), world, 0, strong) == SOUTH


def test_repulsion_magnitude_and_range():
    cfg = RunConfig()
    w = make_world([(0, 0, 25), (10, 0, 25), (0, 40, 25)])
    f = repulsion(w, 0, cfg)
    np.testing.assert_allclose(f, [-cfg.k_rep * (15 / 10) ** 2, 0, 0], rtol=1e-15)


def test_spacing_force_signs():
    cfg = RunConfig()
    at_ideal = make_world([(0, 0, 25), (30, 0, 25)])
    assert np.array_equal(spacing_force(at_ideal, 0, cfg), [0.0, 0.0, 0.0])
    far = make_world([(0, 0, 25), (80, 0, 25)])
    assert spacing_force(far, 0, cfg)[0] == pytest.approx(math.tanh(5.0))
    near = make_world([(0, 0, 25), (10, 0, 25)])
    assert spacing_force(near, 0, cfg)[0] < 0


def test_spacing_neighbor_at_ideal_is_pure_greedy():
    cfg = RunConfig()
    w = make_world([(60, 60, 25), (90, 60, 25)], pairs=[((60, 100), (60, 100))])
    assert _policy_move(make_policy("spacing_coop", cfg), w, 0, cfg) == NORTH


def _oracle_move(world, i, mask, cfg, pairwise):
    """Exhaustive primitive maximization written from the textual rule."""
    p = world.uav_pos[i]
    mids = (world.src_pos + world.dst_pos) / 2
    dists = [math.hypot(m[0] - p[0], m[1] - p[1]) for m in mids]
    m = mids[dists.index(min(dists))]
    g = [m[0] - p[0], m[1] - p[1], cfg.cruise_altitude - p[2]]
    if math.hypot(g[0], g[1]) < cfg.step_xy / 2:
        g[0] = g[1] = 0.0
    if abs(g[2]) < cfg.step_z / 2:
        g[2] = 0.0
    n = math.sqrt(sum(c * c for c in g))
    vec = [c / n for c in g] if n > 0 else g
    for j in range(len(world.uav_pos)):
        if j == i:
            continue
        q = world.uav_pos[j]
        d = math.dist(p, q)
        if d == 0:
            continue
        if pairwise == "rep":
            if d < cfg.d_safe_rep:
                s = cfg.k_rep * (cfg.d_safe_rep / d) ** 2
                vec = [vec[k] + s * (p[k] - q[k]) / d for k in range(3)]
        else:
            s = cfg.k_sp * math.tanh((d - cfg.d_ideal) / cfg.s_sp)
            vec = [vec[k] + s * (q[k] - p[k]) / d for k in range(3)]
    scores = {STAY: 0.0}
    for mv in range(1, 7):
        if not mask[3 * mv]:
            continue
        if mv == UP and p[2] >= cfg.cruise_altitude:
            continue
        if mv == DOWN and p[2] <= cfg.cruise_altitude:
            continue
        scores[mv] = sum(MOVE_DIRS[mv][k] * vec[k] for k in range(3))
    top = max(scores.values())
    return min(mv for mv, s in scores.items() if s == top)


@pytest.mark.parametrize("name, pairwise", [("safe_greedy", "rep"), ("spacing_coop", "sp")])
def test_greedy_policies_match_exhaustive_oracle(name, pairwise):
    cfg = RunConfig()
    policy = make_policy(name, cfg)
    for seed in range(40):
        w = reset_world(cfg, np.random.default_rng(seed))
        for i in range(cfg.n_uavs):
            mask = safety_mask(w, i, cfg)
            a = policy(w, i, None, mask, None)
            assert decode_action(a).power_index == 2
            assert _move(a) == _oracle_move(w, i, mask, cfg, pairwise)


# ---------------------------------------------------------------- shared properties

@given(st.integers(0, 2 ** 20))
def test_baselines_respect_mask(seed):
    cfg = RunConfig()
    w = reset_world(cfg, np.random.default_rng(seed))
    obs = observe_all(w, cfg)
    for name in BASELINES:
        policy = make_policy(name, cfg)
        for i in range(cfg.n_uavs):
            mask = safety_mask(w, i, cfg)
            assert mask[policy(w, i, obs[i], mask, np.random.default_rng(seed))]


def test_rule_policies_consume_no_randomness():
    cfg = RunConfig()
    w = reset_world(cfg, np.random.default_rng(3))
    for name in ("safe_greedy", "spacing_coop"):
        rng = np.random.default_rng(11)
        state = rng.bit_generator.state
        a = [make_policy(name, cfg)(w, i, None, safety_mask(w, i, cfg), rng) for i in range(5)]
        assert rng.bit_generator.state == state
        assert a == [make_policy(name, cfg)(w, i, None, safety_mask(w, i, cfg), None)
                     for i in range(5)]


def test_power_constrained_random_keeps_moves():
    mask = np.ones(21, dtype=bool)
    wrapped = power_constrained(random_policy)
    r1, r2 = np.random.default_rng(5), np.random.default_rng(5)
    for _ in range(500):
        a, b = random_policy(None, 0, None, mask, r1), wrapped(None, 0, None, mask, r2)
        assert decode_action(b) == (decode_action(a).move, 0)


def test_low_power_never_raises_rate_without_cochannel():
    cfg = RunConfig()
    rng = np.random.default_rng(0)
    for _ in range(100):
        uav = (rng.uniform(0, 120), rng.uniform(0, 120), rng.uniform(15, 35))
        pair = ((rng.uniform(0, 120), rng.uniform(0, 120)), (rng.uniform(0, 120), rng.uniform(0, 120)))
        jam = [((20.0, 20.0, 1.5), 0.5)]
        hi = make_world([uav], pairs=[pair], jammers=jam, power_index=[2])
        lo = make_world([uav], pairs=[pair], jammers=jam, power_index=[0])
        assert pair_rate(0, 0, lo, cfg) <= pair_rate(0, 0, hi, cfg)


def test_unknown_policy_name():
    with pytest.raises(ValueError):
        make_policy("greedy", RunConfig())
