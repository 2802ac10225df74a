"""Monte Carlo driver: sample errors, decode with one or more decoders, score.

Random streams are numpy ``Philox`` generators keyed by
``SeedSequence(seed, spawn_key=...)``:

* shot ``s`` samples its error from spawn key ``(0, s)``;
* ensemble member ``m >= 1`` permutes both serial check orders with a
  generator drawn from spawn key ``(1, m)``; member 0 keeps the natural order.

Every shot is therefore reproducible on its own, independent of how many
shots or members run alongside it.
"""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .archsim import ArchConfig, TimingReport, cycle_model
from .errors import InvalidInputError
from .gf2model import DetectorErrorModel, GariModel, Syndrome, derive_uv, load_dem
from .msdecoder import BASES, DecodeResult, FixedPointSpec, Schedule, decode

RNG_DESCRIPTION = "numpy Philox4x64 via SeedSequence(seed, spawn_key=(0, shot) | (1, member))"


def shot_rng(seed: int, shot: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(0, shot))))


def member_rng(seed: int, member: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(1, member))))


def member_schedules(g: GariModel, seed: int, size: int) -> list[Schedule]:
    return [Schedule.natural(g)] + [Schedule.permuted(g, member_rng(seed, m)) for m in range(1, size)]


def sample_errors(dem: DetectorErrorModel, scale: float, rng: np.random.Generator) -> tuple[np.ndarray, Syndrome]:
    """Fire each mechanism independently with probability ``scale * prior``."""
    p = dem.priors * scale
    if np.any(p > 1) or np.any(p < 0) or not np.isfinite(scale):
        raise InvalidInputError("scaled priors must lie in [0, 1]")
    error = (rng.random(p.size) < p).astype(np.uint8)
    return error, dem.syndrome(error)


@dataclass
class ExperimentConfig:
    dem_path: str | None = None
    spec: FixedPointSpec = field(default_factory=FixedPointSpec)
    shots: int = 1000
    seed: int = 0
    physical_error_scale: float = 1.0
    max_iters: int = 64
    ensemble_size: int = 1
    basis: str = "Z"
    rounds: int = 1
    arch: ArchConfig = field(default_factory=ArchConfig)

    def __post_init__(self):
        if self.shots < 1:
            raise InvalidInputError("shots must be >= 1")
        if self.ensemble_size < 1:
            raise InvalidInputError("ensemble_size must be >= 1")
        if self.max_iters < 1:
            raise InvalidInputError("max_iters must be >= 1")
        if self.basis not in BASES:
            raise InvalidInputError(f"basis must be one of {BASES}")
        if self.rounds < 1:
            raise InvalidInputError("rounds must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise InvalidInputError("seed must fit in 64 bits")

    def to_dict(self) -> dict:
        return {
            "dem_path": self.dem_path,
            "spec": self.spec.to_dict(),
            "shots": self.shots,
            "seed": self.seed,
            "physical_error_scale": self.physical_error_scale,
            "max_iters": self.max_iters,
            "ensemble_size": self.ensemble_size,
            "basis": self.basis,
            "rounds": self.rounds,
            "arch": self.arch.to_dict(),
        }


@dataclass
class ShotRecord:
    error: np.ndarray
    syndrome: Syndrome
    member_iterations: list[int]
    member_converged: list[bool]
    winner: int | None
    converged: bool
    logical_flips: np.ndarray | None

    @property
    def iterations(self) -> int:
        return self.member_iterations[self.winner] if self.winner is not None else max(self.member_iterations)

    @property
    def logical_failure(self) -> bool:
        return self.logical_flips is None or bool(self.logical_flips.any())


def pick_winner(results: Sequence[DecodeResult]) -> int | None:
    """Converged member with the fewest iterations; lowest index on ties."""
    best = None
    for m, r in enumerate(results):
        if r.converged and (best is None or r.iterations < results[best].iterations):
            best = m
    return best


def decode_shot(
    dem: DetectorErrorModel,
    g: GariModel,
    error: np.ndarray,
    syndrome: Syndrome,
    schedules: Sequence[Schedule],
    cfg: ExperimentConfig,
) -> tuple[ShotRecord, list[DecodeResult]]:
    results = [decode(g, syndrome, cfg.spec, cfg.max_iters, cfg.basis, s) for s in schedules]
    win = pick_winner(results)
    flips = None
    if win is not None:
        flips = dem.logical_flips(results[win].correction(g) ^ error)
    rec = ShotRecord(
        error=error,
        syndrome=syndrome,
        member_iterations=[r.iterations for r in results],
        member_converged=[r.converged for r in results],
        winner=win,
        converged=win is not None,
        logical_flips=flips,
    )
    return rec, results


@dataclass
class BenchReport:
    shots: int
    converged_fraction: float
    logical_error_rate: float
    iteration_histogram: dict[int, int]
    mean_iterations: float
    mean_latency_ns: float
    per_round_latency_ns: float
    member_stats: list[dict]
    timing: dict
    config: dict
    rng: str = RNG_DESCRIPTION

    def to_dict(self) -> dict:
        return {
            "shots": self.shots,
            "converged_fraction": self.converged_fraction,
            "logical_error_rate": self.logical_error_rate,
            "iteration_histogram": {str(k): v for k, v in sorted(self.iteration_histogram.items())},
            "mean_iterations": self.mean_iterations,
            "mean_latency_ns": self.mean_latency_ns,
            "per_round_latency_ns": self.per_round_latency_ns,
            "member_stats": self.member_stats,
            "timing": self.timing,
            "config": self.config,
            "rng": self.rng,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def histogram_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iterations", "count"])
        for k in sorted(self.iteration_histogram):
            w.writerow([k, self.iteration_histogram[k]])
        return buf.getvalue()


def _histogram_mean(h: dict[int, int]) -> float:
    n = sum(h.values())
    return sum(k * v for k, v in h.items()) / n if n else 0.0


def run_shots(
    cfg: ExperimentConfig,
    dem: DetectorErrorModel | None = None,
    records: list[ShotRecord] | None = None,
) -> BenchReport:
    """Decode ``cfg.shots`` sampled shots and aggregate a report.

    Unconverged shots count as logical failures and contribute
    ``max_iters`` to the iteration statistics.  Pass a list as ``records``
    to collect the per-shot records.
    """
    if dem is None:
        if cfg.dem_path is None:
            raise InvalidInputError("no DEM given")
        dem = load_dem(cfg.dem_path)
    g = derive_uv(dem)
    schedules = member_schedules(g, cfg.seed, cfg.ensemble_size)
    timing: TimingReport = cycle_model(g, None, cfg.arch)
    hist: Counter[int] = Counter()
    member_iters = np.zeros(cfg.ensemble_size)
    member_conv = np.zeros(cfg.ensemble_size)
    wins = np.zeros(cfg.ensemble_size, np.int64)
    n_conv = n_fail = 0
    latency = 0.0
    for shot in range(cfg.shots):
        error, syn = sample_errors(dem, cfg.physical_error_scale, shot_rng(cfg.seed, shot))
        rec, _ = decode_shot(dem, g, error, syn, schedules, cfg)
        hist[rec.iterations] += 1
        latency += timing.latency_ns(rec.iterations)
        member_iters += rec.member_iterations
        member_conv += rec.member_converged
        if rec.converged:
            n_conv += 1
            wins[rec.winner] += 1
        n_fail += rec.logical_failure
        if records is not None:
            records.append(rec)
    n = cfg.shots
    mean_lat = latency / n
    return BenchReport(
        shots=n,
        converged_fraction=n_conv / n,
        logical_error_rate=n_fail / n,
        iteration_histogram=dict(hist),
        mean_iterations=_histogram_mean(hist),
        mean_latency_ns=mean_lat,
        per_round_latency_ns=mean_lat / cfg.rounds,
        member_stats=[
            {
                "member": m,
                "converged_fraction": float(member_conv[m] / n),
                "mean_iterations": float(member_iters[m] / n),
                "wins": int(wins[m]),
            }
            for m in range(cfg.ensemble_size)
        ],
        timing=timing.to_dict(),
        config=cfg.to_dict(),
    )


def write_report(report: BenchReport, path, fmt: str = "json") -> None:
    text = report.to_json() if fmt == "json" else report.histogram_csv()
    Path(path).write_text(text)


__all__ = [
    "BenchReport",
    "ExperimentConfig",
    "RNG_DESCRIPTION",
    "ShotRecord",
    "decode_shot",
    "member_rng",
    "member_schedules",
    "pick_winner",
    "run_shots",
    "sample_errors",
    "shot_rng",
    "write_report",
]
