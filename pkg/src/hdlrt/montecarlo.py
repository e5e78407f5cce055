"""Monte Carlo engine: empirical level, power over a compound-symmetry
alternative, and null-distribution histograms for the three tests.

Reproducibility contract: replication r draws from the counter-based
stream (plan.seed, stream=r), so results are a pure function of the plan,
independent of the number of worker processes.  Aggregates are assembled
by replication index; ``runtime_seconds`` is the only field that varies
between reruns, and the CLI never writes it into data outputs.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .blocktest import block_constants, correlation_constants, log_det_correlation, log_vn
from .eqcov import GroupedSample, eqcov_constants, log_lambda2
from .errors import InvalidPlan
from .linalg import BlockPartition, compound_symmetry_sqrt
from .sampling import DistributionSpec, apply_root, draw_entries, entry_generator, normal_cdf

#: Default power grid; configurable per run since the transition point
#: moves with (n, p) and the partition.
DEFAULT_DELTA_GRID = tuple(round(0.002 * k, 6) for k in range(11))

_TESTS = ("block", "correlation", "eqcov")


def scenario_partition(scenario: int, p: int) -> BlockPartition:
    """The two stock block layouts used in the simulation study.

    Scenario 1: three equal blocks of size p/3 (p divisible by 3).
    Scenario 2: q = p/2 blocks, q - 1 singletons plus one block of q + 1
    (p even, p >= 4); the sizes add up to 2q = p.
    """
    if scenario == 1:
        if p < 3 or p % 3 != 0:
            raise InvalidPlan(f"scenario 1 needs p divisible by 3, got p={p}")
        return BlockPartition.uniform(3, p // 3)
    if scenario == 2:
        if p < 4 or p % 2 != 0:
            raise InvalidPlan(f"scenario 2 needs even p >= 4, got p={p}")
        q = p // 2
        return BlockPartition((1,) * (q - 1) + (q + 1,))
    raise InvalidPlan(f"scenario must be 1 or 2, got {scenario}")


@dataclass(frozen=True)
class SimulationPlan:
    """Descriptor of one simulation experiment.

    ``test`` is "block", "correlation" or "eqcov".  Block plans need ``n``
    and a partition (directly or through ``scenario``); correlation plans
    need ``n`` only; eqcov plans need ``n_sizes``.  ``delta`` selects the
    compound-symmetry alternative (1-delta) I + delta * ones, with
    delta = 0 the null.
    """

    test: str
    p: int
    n: int | None = None
    n_sizes: tuple[int, ...] | None = None
    partition: BlockPartition | None = None
    scenario: int | None = None
    delta: float = 0.0
    dist: DistributionSpec = DistributionSpec.normal()
    reps: int = 2000
    alpha: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.test not in _TESTS:
            raise InvalidPlan(f"test must be one of {_TESTS}, got {self.test!r}")
        if self.reps < 1:
            raise InvalidPlan(f"reps must be positive, got {self.reps}")
        if not 0.0 < self.alpha < 1.0:
            raise InvalidPlan(f"alpha must be in (0, 1), got {self.alpha}")
        if not 0.0 <= self.delta < 1.0:
            raise InvalidPlan(f"delta must be in [0, 1), got {self.delta}")
        if self.p < 2:
            raise InvalidPlan(f"p must be at least 2, got {self.p}")
        if self.test == "eqcov":
            if self.n_sizes is None or self.n is not None:
                raise InvalidPlan("eqcov plans take n_sizes, not n")
            object.__setattr__(self, "n_sizes", tuple(int(v) for v in self.n_sizes))
            if self.partition is not None or self.scenario is not None:
                raise InvalidPlan("eqcov plans take no partition")
            return
        if self.n is None or self.n_sizes is not None:
            raise InvalidPlan(f"{self.test} plans take n, not n_sizes")
        if self.n <= self.p:
            raise InvalidPlan(f"requires n > p, got n={self.n}, p={self.p}")
        if self.test == "correlation":
            if self.partition is not None or self.scenario is not None:
                raise InvalidPlan("correlation plans take no partition")
            return
        part = self.partition
        if part is None:
            if self.scenario is None:
                raise InvalidPlan("block plans need a partition or a scenario")
            part = scenario_partition(self.scenario, self.p)
            object.__setattr__(self, "partition", part)
        if part.p != self.p:
            raise InvalidPlan(f"partition p={part.p} does not match plan p={self.p}")
        if self.scenario is not None and part != scenario_partition(self.scenario, self.p):
            raise InvalidPlan("explicit partition contradicts the scenario")


@dataclass(frozen=True, eq=False)
class SimulationResult:
    """Aggregate of one simulation run.

    ``histogram`` is (edges, counts) where counts has two extra overflow
    bins (below/above the edge range) and sums to ``reps``;
    ``ks_statistic`` is the Kolmogorov-Smirnov distance of the z sample to
    the standard normal.  ``runtime_seconds`` is informational only and is
    excluded from emitted data files.
    """

    rejection_rate: float
    standard_error: float
    rejections: int
    reps: int
    z_samples: np.ndarray | None = None
    histogram: tuple[np.ndarray, np.ndarray] | None = None
    ks_statistic: float | None = None
    runtime_seconds: float = 0.0


def _centering(plan: SimulationPlan) -> tuple[float, float]:
    """(mu, sigma) of the stored statistic for the plan's test."""
    if plan.test == "block":
        const = block_constants(plan.n, plan.partition)
        return const.mu_n, const.sigma_n
    if plan.test == "correlation":
        const = correlation_constants(plan.n, plan.p)
        return const.mu_n, const.sigma_n
    const = eqcov_constants(plan.n_sizes, plan.p)
    return const.mu_n, sum(plan.n_sizes) * const.sigma_n


def _replication_z(plan: SimulationPlan, root: np.ndarray | None,
                   mu: float, sigma: float, rep: int) -> float:
    rng = entry_generator(plan.seed, rep)
    if plan.test == "eqcov":
        groups = [draw_entries(rng, nj, plan.p, plan.dist) for nj in plan.n_sizes]
        statistic = 2.0 * log_lambda2(GroupedSample(tuple(groups)))
    else:
        x = draw_entries(rng, plan.n, plan.p, plan.dist)
        y = x if root is None else apply_root(x, root)
        if plan.test == "block":
            statistic = log_vn(y, plan.partition)
        else:
            statistic = log_det_correlation(y)
    return (statistic - mu) / sigma


def _run_chunk(plan: SimulationPlan, mu: float, sigma: float,
               start: int, stop: int) -> tuple[int, np.ndarray]:
    root = compound_symmetry_sqrt(plan.delta, plan.p) if plan.delta > 0.0 else None
    z = np.empty(stop - start)
    for rep in range(start, stop):
        z[rep - start] = _replication_z(plan, root, mu, sigma, rep)
    return start, z


def _simulate(plan: SimulationPlan, threads: int = 1) -> np.ndarray:
    """z values for all replications, indexed by replication."""
    mu, sigma = _centering(plan)
    reps = plan.reps
    if threads <= 1 or reps < 2 * threads:
        return _run_chunk(plan, mu, sigma, 0, reps)[1]
    z = np.empty(reps)
    bounds = np.linspace(0, reps, 4 * threads + 1, dtype=int)
    with ProcessPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(_run_chunk, plan, mu, sigma, int(a), int(b))
            for a, b in zip(bounds[:-1], bounds[1:])
            if b > a
        ]
        for fut in futures:
            start, chunk = fut.result()
            z[start:start + len(chunk)] = chunk
    return z


def _rejections(z: np.ndarray, alpha: float) -> int:
    # identical decision to the test functions: reject iff Phi(z) <= alpha
    return int(sum(1 for v in z if normal_cdf(float(v)) <= alpha))


def _aggregate(plan: SimulationPlan, z: np.ndarray, elapsed: float,
               keep_z: bool) -> SimulationResult:
    rejections = _rejections(z, plan.alpha)
    rate = rejections / plan.reps
    return SimulationResult(
        rejection_rate=rate,
        standard_error=float(np.sqrt(rate * (1.0 - rate) / plan.reps)),
        rejections=rejections,
        reps=plan.reps,
        z_samples=z if keep_z else None,
        runtime_seconds=elapsed,
    )


def run_level(plan: SimulationPlan, threads: int = 1, keep_z: bool = True) -> SimulationResult:
    """Empirical rejection rate under the null (requires delta = 0)."""
    if plan.delta != 0.0:
        raise InvalidPlan("level runs require delta = 0; use run_power for alternatives")
    start = time.perf_counter()
    z = _simulate(plan, threads)
    return _aggregate(plan, z, time.perf_counter() - start, keep_z)


def run_power(plan: SimulationPlan, threads: int = 1, keep_z: bool = True) -> SimulationResult:
    """Empirical rejection rate under the compound-symmetry alternative.

    With delta = 0 this reduces exactly to ``run_level``.  Not defined for
    the eqcov test: applying a common covariance to every group keeps its
    null hypothesis true, so there is no alternative to simulate.
    """
    if plan.test == "eqcov":
        raise InvalidPlan("power simulation is defined for the block and correlation tests only")
    start = time.perf_counter()
    z = _simulate(plan, threads)
    return _aggregate(plan, z, time.perf_counter() - start, keep_z)


def run_power_curve(plan: SimulationPlan, deltas=DEFAULT_DELTA_GRID,
                    threads: int = 1) -> list[tuple[float, SimulationResult]]:
    """``run_power`` over a delta grid, reusing the plan's seed so the
    replications are coupled across deltas."""
    return [
        (float(d), run_power(replace(plan, delta=float(d)), threads=threads, keep_z=False))
        for d in deltas
    ]


def ks_distance_to_normal(z: np.ndarray) -> float:
    """Kolmogorov-Smirnov distance between the sample and the standard
    normal distribution."""
    zs = np.sort(np.asarray(z, dtype=np.float64))
    count = len(zs)
    if count == 0:
        raise ValueError("empty sample")
    cdf = np.array([normal_cdf(float(v)) for v in zs])
    upper = np.arange(1, count + 1) / count - cdf
    lower = cdf - np.arange(0, count) / count
    return float(max(upper.max(), lower.max()))


def run_histogram(plan: SimulationPlan, bins: int = 40, threads: int = 1,
                  lo: float = -4.0, hi: float = 4.0) -> SimulationResult:
    """Null run that retains the z sample, bins it over [lo, hi] with two
    overflow bins, and attaches the KS distance to the standard normal."""
    if plan.delta != 0.0:
        raise InvalidPlan("histogram runs require delta = 0")
    if bins < 1:
        raise InvalidPlan(f"bins must be positive, got {bins}")
    start = time.perf_counter()
    z = _simulate(plan, threads)
    elapsed = time.perf_counter() - start
    edges = np.linspace(lo, hi, bins + 1)
    interior, _ = np.histogram(z[(z >= lo) & (z <= hi)], bins=edges)
    counts = np.concatenate(([int(np.sum(z < lo))], interior, [int(np.sum(z > hi))]))
    result = _aggregate(plan, z, elapsed, keep_z=True)
    return replace(result, histogram=(edges, counts), ks_statistic=ks_distance_to_normal(z))
