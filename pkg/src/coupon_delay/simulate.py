"""Monte Carlo sampling of the delay and goodness-of-fit statistics.

Replication i always draws from counter-based Philox streams keyed on
(seed, i), so a batch is a pure function of its configuration: results are
bit-identical no matter how replications are chunked across workers.  The
env var COUPON_DELAY_THREADS caps the worker count (default 1).
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .limit_laws import Regime, normalization, target_cdf
from .moments import ProblemSize

__all__ = [
    "MODE_DISCRETE",
    "MODE_POISSONIZED",
    "MODE_COUPLED",
    "SimConfig",
    "SampleBatch",
    "KSReport",
    "sample_discrete",
    "sample_poissonized",
    "sample_coupled",
    "ks_distance",
    "ks_statistic",
    "empirical_moments",
    "write_samples_csv",
]

MODE_DISCRETE = "discrete"
MODE_POISSONIZED = "poissonized"
MODE_COUPLED = "coupled"
_MODES = (MODE_DISCRETE, MODE_POISSONIZED, MODE_COUPLED)

_THREADS_ENV = "COUPON_DELAY_THREADS"


@dataclass(frozen=True)
class SimConfig:
    ps: ProblemSize
    reps: int
    seed: int
    mode: str

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}, got {self.mode!r}")


@dataclass(frozen=True)
class SampleBatch:
    config: SimConfig
    d_values: Optional[np.ndarray] = None
    delta_values: Optional[np.ndarray] = None

    def primary_values(self) -> np.ndarray:
        values = self.d_values if self.d_values is not None else self.delta_values
        if values is None or len(values) == 0:
            raise ValueError("batch holds no samples")
        return values


@dataclass(frozen=True)
class KSReport:
    statistic: float
    reps: int
    regime: Regime


def _worker_count() -> int:
    raw = os.environ.get(_THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{_THREADS_ENV} must be an integer, got {raw!r}") from None


def _rep_rng(seed: int, rep: int, lane: int) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=(rep, lane))
    return np.random.Generator(np.random.Philox(seq))


def _run_reps(worker, reps: int) -> list:
    """Evaluate worker(rep) for rep = 0..reps-1, gathered in order."""
    threads = _worker_count()
    if threads == 1 or reps < 2 * threads:
        return [worker(rep) for rep in range(reps)]
    bounds = np.linspace(0, reps, threads + 1, dtype=int)
    ranges = [range(a, b) for a, b in zip(bounds[:-1], bounds[1:])]

    def chunk(rng_range):
        return [worker(rep) for rep in rng_range]

    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(chunk, ranges))
    return [item for part in parts for item in part]


def _initial_block(m: int, n: int) -> int:
    # Covers the typical delay with slack in every regime; doubling below
    # picks up the stragglers.
    return int(
        m * n
        + n * math.log(n + 1)
        + (m - 1) * n * math.log(math.log(n + 2) + 1.0)
        + 4.0 * n * math.sqrt(m)
        + 8.0 * n
        + 64
    )


def _draw_delay(rng: np.random.Generator, m: int, n: int) -> int:
    """One replication of the discrete process: uniform labels from {0..n-1}
    until every label has appeared m times; returns the trial count."""
    if n == 1:
        return m
    chunks = []
    counts = np.zeros(n, dtype=np.int64)
    goal = _initial_block(m, n)
    drawn = 0
    while True:
        block = max(256, goal - drawn)
        labels = rng.integers(0, n, size=block)
        chunks.append(labels)
        counts += np.bincount(labels, minlength=n)
        drawn += block
        if counts.min() >= m:
            break
        goal = 2 * drawn
    labels = np.concatenate(chunks) if len(chunks) > 1 else chunks[0]
    order = np.argsort(labels, kind="stable")
    firsts = np.concatenate(([0], np.cumsum(np.bincount(labels, minlength=n))[:-1]))
    mth_occurrence = order[firsts + (m - 1)]
    return int(mth_occurrence.max()) + 1


def sample_discrete(config: SimConfig) -> SampleBatch:
    """Replicated draws of the trial count D; D >= m*n surely."""
    if config.mode != MODE_DISCRETE:
        raise ValueError("sample_discrete requires mode='discrete'")
    m, n = config.ps.m, config.ps.n

    def worker(rep: int) -> int:
        return _draw_delay(_rep_rng(config.seed, rep, 0), m, n)

    d = np.array(_run_reps(worker, config.reps), dtype=np.int64)
    return SampleBatch(config=config, d_values=d)


def sample_poissonized(config: SimConfig) -> SampleBatch:
    """Replicated draws of Delta: the largest of n Erlang(m, rate 1/n)
    variables, i.e. n times the largest of n Gamma(m, 1) draws.

    Cost per replication is n gamma variates regardless of m (the gamma
    sampler is the O(1) squeeze-accept method for shapes >= 1).
    """
    if config.mode != MODE_POISSONIZED:
        raise ValueError("sample_poissonized requires mode='poissonized'")
    m, n = config.ps.m, config.ps.n

    def worker(rep: int) -> float:
        rng = _rep_rng(config.seed, rep, 0)
        return float(n * rng.standard_gamma(m, size=n).max())

    delta = np.array(_run_reps(worker, config.reps), dtype=np.float64)
    return SampleBatch(config=config, delta_values=delta)


def sample_coupled(config: SimConfig) -> SampleBatch:
    """Replicated coupled pairs (D, Delta): the discrete process yields D,
    then Delta is one Gamma(D, 1) draw (the sum of D unit exponentials,
    independent of D), taken from a separate per-replication stream."""
    if config.mode != MODE_COUPLED:
        raise ValueError("sample_coupled requires mode='coupled'")
    m, n = config.ps.m, config.ps.n

    def worker(rep: int) -> tuple[int, float]:
        d = _draw_delay(_rep_rng(config.seed, rep, 0), m, n)
        delta = float(_rep_rng(config.seed, rep, 1).standard_gamma(d))
        return d, delta

    pairs = _run_reps(worker, config.reps)
    d = np.array([p[0] for p in pairs], dtype=np.int64)
    delta = np.array([p[1] for p in pairs], dtype=np.float64)
    return SampleBatch(config=config, d_values=d, delta_values=delta)


def ks_statistic(sorted_values: np.ndarray, cdf_values: np.ndarray) -> float:
    """Exact sup-distance between the empirical CDF of a sorted sample and
    a model CDF evaluated at the sample points (no binning)."""
    k = len(sorted_values)
    if k == 0:
        raise ValueError("empty sample")
    steps = np.arange(1, k + 1, dtype=np.float64) / k
    return float(max((cdf_values - steps + 1.0 / k).max(), (steps - cdf_values).max()))


def ks_distance(batch: SampleBatch, regime: Regime) -> KSReport:
    """Normalize a batch for a regime and measure the exact KS distance to
    the regime's limiting CDF.

    Coupled batches are judged on their D values (the law being validated
    transfers from Delta to D); purely Poissonized batches on Delta.
    """
    values = batch.primary_values()
    ps = batch.config.ps
    norm = normalization(regime, ps.m, ps.n)
    y = np.sort(norm.apply(values))
    model = np.asarray(target_cdf(norm.target, y), dtype=np.float64)
    return KSReport(
        statistic=ks_statistic(y, model), reps=len(y), regime=regime
    )


def empirical_moments(batch: SampleBatch, r: int = 1) -> tuple[float, float]:
    """(mean, standard error) of X^r over the batch's primary values."""
    if r < 1:
        raise ValueError("moment order must be >= 1")
    x = batch.primary_values().astype(np.float64) ** r
    if len(x) == 1:
        return float(x[0]), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x)))


def write_samples_csv(batch: SampleBatch, path) -> None:
    """Raw sample export: header row, one value (or d,delta pair) per line,
    LF line endings."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if batch.d_values is not None and batch.delta_values is not None:
            writer.writerow(["d", "delta"])
            for d, delta in zip(batch.d_values, batch.delta_values):
                writer.writerow([int(d), format(float(delta), ".10g")])
        elif batch.d_values is not None:
            writer.writerow(["d"])
            for d in batch.d_values:
                writer.writerow([int(d)])
        elif batch.delta_values is not None:
            writer.writerow(["delta"])
            for delta in batch.delta_values:
                writer.writerow([format(float(delta), ".10g")])
        else:
            raise ValueError("batch holds no samples")
