"""Independent straight-line recomputations used as test oracles.

Nothing here imports the package's channel or network code; only plain
Python arithmetic on coordinates and weight arrays.
"""

import math

import numpy as np


def dist(a, b):
    return math.sqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2 + (a[2] - b[2]) ** 2)


def rate_oracle(world, cfg, pair, relay, assignment):
    """Bottleneck rate recomputed term by term from raw positions."""
    alpha = cfg.path_loss_exp
    W = cfg.bandwidth
    relay_p = [float(c) for c in world.uav_pos[relay]]
    src = [float(c) for c in world.src_pos[pair]]
    dst = [float(c) for c in world.dst_pos[pair]]

    jam_at_relay = 0.0
    jam_at_dst = 0.0
    for jp, jw in zip(world.jammer_pos, world.jammer_power):
        jam_at_relay += jw / dist(jp, relay_p) ** alpha
        jam_at_dst += jw / dist(jp, dst) ** alpha

    co_ul = 0.0
    for m in range(len(world.src_pos)):
        if m != pair:
            co_ul += cfg.gcv_tx_power / dist(world.src_pos[m], relay_p) ** alpha
    ul_sinr = (cfg.gcv_tx_power / dist(src, relay_p) ** alpha) / (cfg.noise_power + co_ul + jam_at_relay)

    relays = set(int(u) for u in assignment)
    co_dl = 0.0
    for u in sorted(relays):
        if u != relay:
            co_dl += cfg.power_levels[world.power_index[u]] / dist(world.uav_pos[u], dst) ** alpha
    p_relay = cfg.power_levels[world.power_index[relay]]
    dl_sinr = (p_relay / dist(relay_p, dst) ** alpha) / (cfg.noise_power + co_dl + jam_at_dst)
    return min(W * math.log2(1 + ul_sinr), W * math.log2(1 + dl_sinr))


def assign_oracle(world):
    out = []
    for n in range(len(world.src_pos)):
        mid = [(world.src_pos[n][k] + world.dst_pos[n][k]) / 2 for k in range(3)]
        best, best_d = None, math.inf
        for u in range(len(world.uav_pos)):
            d = dist(world.uav_pos[u], mid)
            if d < best_d:
                best, best_d = u, d
        out.append(best)
    return out


def mlp_oracle(params, x):
    """Forward pass with explicit loops over neurons."""
    h = [float(v) for v in x]
    n_layers = len(params) // 2
    for layer in range(n_layers):
        W, b = params[2 * layer], params[2 * layer + 1]
        out = []
        for j in range(W.shape[1]):
            s = float(b[j])
            for i in range(W.shape[0]):
                s += h[i] * float(W[i, j])
            if layer < n_layers - 1:
                s = max(s, 0.0)
            out.append(s)
        h = out
    return np.array(h)


def finite_difference_grads(net, x, grad_out, h=1e-5):
    """Central differences of sum(net(x) * grad_out) w.r.t. every parameter."""
    grads = []
    for p in net.params:
        g = np.zeros_like(p)
        it = np.nditer(p, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = p[idx]
            p[idx] = orig + h
            f_plus = float(np.sum(net(x) * grad_out))
            p[idx] = orig - h
            f_minus = float(np.sum(net(x) * grad_out))
            p[idx] = orig
            g[idx] = (f_plus - f_minus) / (2 * h)
        grads.append(g)
    return grads


def relative_error(a, b, floor=1e-6):
    """Elementwise |a - b| / max(|a|, |b|, floor).

    The floor stops round-off in near-zero entries from reading as large
    relative error.
    """
    a, b = np.asarray(a), np.asarray(b)
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
