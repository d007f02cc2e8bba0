"""Evaluate every rule-based policy on the same episodes and tabulate the means.

    python3 scripts/baseline_sweep.py --episodes 100 --out runs/baselines
"""

import argparse
from pathlib import Path

from uav_marl.baselines import BASELINES
from uav_marl.config import load_config
from uav_marl.harness import mean_of, run_eval, write_manifest
from uav_marl.metrics import export_metrics

FIELDS = ("mean_global_reward", "throughput_norm", "collision_penalty", "mean_jammer_distance")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=None)
    ap.add_argument("--episodes", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="runs/baselines")
    args = ap.parse_args()

    cfg = load_config(args.config)
    out = Path(args.out)
    write_manifest(out, cfg, args.seed, mode="baseline_sweep", episodes=args.episodes)
    print(f"{'policy':<18}" + "".join(f"{f:>22}" for f in FIELDS))
    for name in BASELINES:
        rows = run_eval(name, cfg, args.episodes, args.seed)
        export_metrics(rows, out / f"metrics_{name}.csv", cfg.smoothing_window)
        print(f"{name:<18}" + "".join(f"{mean_of(rows, f):>22.4f}" for f in FIELDS))


if __name__ == "__main__":
    main()
