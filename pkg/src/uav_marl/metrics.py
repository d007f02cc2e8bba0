"""Per-episode metric accumulation and CSV export."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

from .env import World
from .rewards import RewardBreakdown, RewardWeights


@dataclass(frozen=True)
class EpisodeMetrics:
    episode: int
    steps: int  # cumulative env steps at the end of the episode
    mean_global_reward: float
    smoothed_global_reward: float
    mean_individual_reward: float
    throughput_norm: float  # per-step mean of sum_n log2(1 + sinr_n)
    throughput_bps: float
    collision_penalty: float  # summed over the episode
    mean_jammer_distance: float  # meters, mean over steps, UAVs and jammers
    epsilon: float
    w_thr: float
    w_coop: float
    w_col: float
    w_fly: float


CSV_HEADER = [f.name for f in fields(EpisodeMetrics)]


def mean_jammer_distance(world: World) -> float:
    dists = [math.dist(u, j) for u in world.uav_pos.tolist() for j in world.jammer_pos.tolist()]
    if not dists:
        return math.nan
    return sum(dists) / len(dists)


class _RunningMean:
    # incremental form keeps a constant stream exactly constant
    def __init__(self):
        self.n = 0
        self.value = 0.0

    def add(self, x: float) -> None:
        self.n += 1
        self.value += (x - self.value) / self.n


class EpisodeTracker:
    def __init__(self, episode: int):
        self.episode = episode
        self._reward = _RunningMean()
        self._indiv = _RunningMean()
        self._thr = _RunningMean()
        self._bps = _RunningMean()
        self._jam = _RunningMean()
        self.collision_sum = 0.0

    @property
    def n_steps(self) -> int:
        return self._reward.n

    def record(self, world: World, rb: RewardBreakdown) -> None:
        """Log one transition; ``world`` is the post-step world."""
        self._reward.add(rb.global_r)
        self._indiv.add(float(rb.individual_r.mean()))
        self._thr.add(rb.throughput_total)
        self._bps.add(rb.throughput_bps)
        self._jam.add(mean_jammer_distance(world))
        self.collision_sum += rb.p_col

    def finish(self, total_steps: int, epsilon: float, w: RewardWeights) -> EpisodeMetrics:
        return EpisodeMetrics(
            episode=self.episode,
            steps=total_steps,
            mean_global_reward=self._reward.value,
            smoothed_global_reward=math.nan,
            mean_individual_reward=self._indiv.value,
            throughput_norm=self._thr.value,
            throughput_bps=self._bps.value,
            collision_penalty=self.collision_sum,
            mean_jammer_distance=self._jam.value,
            epsilon=epsilon,
            w_thr=w.w_thr,
            w_coop=w.w_coop,
            w_col=w.w_col,
            w_fly=w.w_fly,
        )


def smooth(rows: Sequence[EpisodeMetrics], window: int = 50) -> list[EpisodeMetrics]:
    """Fill the trailing moving average of the mean global reward."""
    out = []
    for k, row in enumerate(rows):
        chunk = [r.mean_global_reward for r in rows[max(0, k - window + 1): k + 1]]
        # centred on the first value, so a constant window averages to itself exactly
        c0 = chunk[0]
        mean = c0 + math.fsum(x - c0 for x in chunk) / len(chunk)
        out.append(replace(row, smoothed_global_reward=mean))
    return out


def export_metrics(rows: Iterable[EpisodeMetrics], path: str | Path, window: int = 50) -> None:
    rows = smooth(list(rows), window)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in asdict(row).values()])


def read_metrics(path: str | Path) -> list[EpisodeMetrics]:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        out = []
        for rec in reader:
            vals = {k: (int(v) if k in ("episode", "steps") else float(v)) for k, v in rec.items()}
            out.append(EpisodeMetrics(**vals))
    return out
