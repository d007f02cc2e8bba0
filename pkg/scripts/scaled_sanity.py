"""Reduced-scale learning run compared against the rule-based policies.

Trains CTDE on 3 UAVs / 3 pairs / 1 jammer, then replays the final tenth of the
training episodes with Random (scored under the weights each episode trained
with) and Safe-Greedy. Writes metrics CSVs and a summary YAML to --out.

    python3 scripts/scaled_sanity.py --steps 50000 --out runs/scaled
"""

import argparse
import logging
from pathlib import Path

import yaml

from uav_marl.config import RunConfig
from uav_marl.harness import mean_of, run_episode, write_manifest
from uav_marl.baselines import make_policy
from uav_marl.metrics import export_metrics
from uav_marl.rewards import RewardWeights
from uav_marl.trainer import train


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=50_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="runs/scaled")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    cfg = RunConfig(n_uavs=3, n_pairs=3, jammer_positions=((2.0, 2.0, 1.5),),
                    total_steps=args.steps)
    out = Path(args.out)
    write_manifest(out, cfg, args.seed, mode="scaled_sanity")
    res = train(cfg, args.seed, checkpoint_dir=out / "checkpoints")
    export_metrics(res.rows, out / "metrics.csv", cfg.smoothing_window)

    final = res.rows[-max(1, len(res.rows) // 10):]
    rand, greedy = make_policy("random", cfg), make_policy("safe_greedy", cfg)
    rand_rows = [run_episode(rand, cfg, args.seed, r.episode,
                             weights=RewardWeights(r.w_thr, r.w_coop, r.w_col, r.w_fly))
                 for r in final]
    sg_rows = [run_episode(greedy, cfg, args.seed, r.episode) for r in final]
    export_metrics(rand_rows, out / "metrics_random.csv", cfg.smoothing_window)
    export_metrics(sg_rows, out / "metrics_safe_greedy.csv", cfg.smoothing_window)

    summary = {}
    for name, rows in (("ctde", final), ("random", rand_rows), ("safe_greedy", sg_rows)):
        summary[name] = {f: mean_of(rows, f) for f in
                         ("mean_global_reward", "throughput_norm", "collision_penalty",
                          "mean_jammer_distance")}
    (out / "summary.yaml").write_text(yaml.safe_dump(summary, sort_keys=False))
    print(yaml.safe_dump(summary, sort_keys=False))


if __name__ == "__main__":
    main()
