"""Command line entry point: ``uav-marl {train,eval,baseline}``."""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .baselines import BASELINES
from .config import ConfigError, load_config
from .harness import POLICIES, run_eval, write_manifest
from .metrics import export_metrics


def _overrides(args) -> dict:
    out = {}
    if getattr(args, "steps", None) is not None:
        out["total_steps"] = args.steps
    return out


def _train_one(config_path, overrides, seed: int, out_dir: str) -> str:
    from .trainer import train

    cfg = load_config(config_path, **overrides)
    out = Path(out_dir)
    write_manifest(out, cfg, seed, mode="train")
    result = train(cfg, seed, checkpoint_dir=out / "checkpoints")
    export_metrics(result.rows, out / "metrics.csv", cfg.smoothing_window)
    return str(out)


def _eval_one(config_path, overrides, seed: int, out_dir: str, policy: str,
              checkpoint, episodes: int, mode: str) -> str:
    cfg = load_config(config_path, **overrides)
    out = Path(out_dir)
    write_manifest(out, cfg, seed, mode=mode, policy=policy, checkpoint=checkpoint,
                   episodes=episodes)
    rows = run_eval(policy, cfg, episodes, seed, checkpoint=checkpoint)
    export_metrics(rows, out / f"metrics_{policy}.csv", cfg.smoothing_window)
    return str(out)


def _seeds(args) -> list[int]:
    if args.seeds:
        return [int(s) for s in args.seeds.split(",") if s.strip()]
    return [args.seed]


def _dispatch(fn, args, extra: tuple) -> None:
    seeds = _seeds(args)
    base = Path(args.out)
    jobs = []
    for seed in seeds:
        out = base / f"seed_{seed}" if len(seeds) > 1 else base
        jobs.append((args.config, _overrides(args), seed, str(out)) + extra)
    if len(jobs) == 1:
        print(fn(*jobs[0]))
        return
    with ProcessPoolExecutor(max_workers=args.workers) as pool:
        for done in pool.map(fn, *zip(*jobs)):
            print(done)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="uav-marl", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", type=Path, default=None, help="YAML overrides file")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--seeds", default=None,
                        help="comma separated seeds; runs each in its own process and subdirectory")
        sp.add_argument("--workers", type=int, default=None)
        sp.add_argument("--out", default="runs/latest")
        sp.add_argument("-v", "--verbose", action="store_true")

    tr = sub.add_parser("train", help="train CTDE agents")
    common(tr)
    tr.add_argument("--steps", type=int, default=None, help="override total_steps")

    ev = sub.add_parser("eval", help="evaluate any policy, ctde needs --checkpoint")
    common(ev)
    ev.add_argument("--policy", choices=POLICIES, default="ctde")
    ev.add_argument("--checkpoint", default=None)
    ev.add_argument("--episodes", type=int, default=10)

    bl = sub.add_parser("baseline", help="evaluate a rule-based policy")
    common(bl)
    bl.add_argument("--policy", choices=BASELINES, default="safe_greedy")
    bl.add_argument("--episodes", type=int, default=10)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        if args.command == "train":
            _dispatch(_train_one, args, ())
        else:
            if args.command == "eval" and args.policy == "ctde" and args.checkpoint is None:
                raise ValueError("--checkpoint is required for the ctde policy")
            checkpoint = getattr(args, "checkpoint", None)
            _dispatch(_eval_one, args, (args.policy, checkpoint, args.episodes, args.command))
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
