"""Falsifier: look for points of the region where the candidate fails.

The margin is minimised over the region by a full grid followed by pattern
search refinements from the worst grid points and from uniform random starts.
A negative result is only reported after interval verification.
"""

from __future__ import annotations

import itertools
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import BudgetZero, DomainError
from .farkas import (
    FALSIFICATION_THRESHOLD,
    NORMS,
    Outside,
    Witness,
    margin,
    membership,
    verify_quietly,
)

GRID_SEEDS = 10
_MIN_REL_STEP = 1e-10
_SAMPLE_ATTEMPTS = 1000


@dataclass(frozen=True)
class SearchConfig:
    grid_per_dim: int = 11
    random_starts: int = 1000
    seed: int = 0
    refine_iters: int = 200
    refine_shrink: float = 0.5
    threshold: float = FALSIFICATION_THRESHOLD
    norm: str = "state"
    threads: int = 1

    def __post_init__(self):
        for name in ("grid_per_dim", "random_starts", "refine_iters", "threads"):
            if getattr(self, name) < 1:
                raise BudgetZero(f"{name} must be at least 1")
        if not 0.0 < self.refine_shrink < 1.0:
            raise ValueError("refine_shrink must lie in (0, 1)")
        if not self.threshold > 0.0:
            raise ValueError("threshold must be positive")
        if self.norm not in NORMS:
            raise ValueError(f"norm must be one of {NORMS}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Falsified:
    witness: Witness
    stats: dict = field(default_factory=dict)

    @property
    def value(self) -> float:
        return self.witness.objective


@dataclass
class NotFalsified:
    best_margin: float
    best_point: np.ndarray
    stats: dict = field(default_factory=dict)
    unverified: bool = False  # best point was below threshold but failed verification

    @property
    def value(self) -> float:
        return self.best_margin


class _Objective:
    def __init__(self, system, region, candidate, norm):
        self.system = system
        self.region = region
        self.candidate = candidate
        self.norm = norm
        self.n_x = system.n_x

    def __call__(self, z) -> float:
        try:
            return margin(self.system, self.candidate, z[: self.n_x], z[self.n_x:], norm=self.norm)
        except DomainError:
            return np.inf


def grid_points(region, per_dim: int) -> np.ndarray:
    box = region.box
    axes = [np.linspace(lo, hi, per_dim) if per_dim > 1 else np.array([0.5 * (lo + hi)])
            for lo, hi in box]
    pts = np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, len(box))
    if region.halfspaces is not None:
        pts = pts[[region.contains_z(p) for p in pts]]
    return pts


def pattern_search(fun, z0, region, iters: int, shrink: float):
    """Compass search from ``z0``; returns ``(z, value, evaluations)``."""
    box = region.box
    lo, hi = box[:, 0], box[:, 1]
    width = np.where(hi > lo, hi - lo, 1.0)
    z = np.clip(np.asarray(z0, dtype=float), lo, hi)
    fz = fun(z)
    evals = 1
    step = 0.25
    n = len(z)
    cut = region.halfspaces is not None
    for _ in range(iters):
        if step < _MIN_REL_STEP:
            break
        best_f, best_z = fz, None
        for j in range(n):
            if hi[j] == lo[j]:
                continue
            for sgn in (-1.0, 1.0):
                trial = z.copy()
                trial[j] = min(max(z[j] + sgn * step * width[j], lo[j]), hi[j])
                if trial[j] == z[j] or (cut and not region.contains_z(trial)):
                    continue
                ft = fun(trial)
                evals += 1
                if ft < best_f:
                    best_f, best_z = ft, trial
        if best_z is None:
            step *= shrink
        else:
            z, fz = best_z, best_f
    return z, fz, evals


def _uniform_start(region, seed: int, index: int):
    rng = np.random.default_rng([seed, index])
    box = region.box
    for _ in range(_SAMPLE_ATTEMPTS):
        z = rng.uniform(box[:, 0], box[:, 1])
        if region.contains_z(z):
            return z
    return None


def falsify(system, region, candidate, config: SearchConfig | None = None):
    config = config or SearchConfig()
    t0 = time.perf_counter()
    fun = _Objective(system, region, candidate, config.norm)

    grid = grid_points(region, config.grid_per_dim)
    grid_vals = np.array([fun(p) for p in grid])
    order = np.argsort(grid_vals, kind="stable")
    n_seeded = min(GRID_SEEDS, config.random_starts, len(grid))

    def task(k: int):
        if k < n_seeded:
            start = grid[order[k]]
        else:
            start = _uniform_start(region, config.seed, k)
            if start is None:
                return None, np.inf, 0
        return pattern_search(fun, start, region, config.refine_iters, config.refine_shrink)

    tasks = range(config.random_starts)
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(task, tasks))
    else:
        results = [task(k) for k in tasks]

    best_z, best_f = None, np.inf
    if len(grid):
        best_z, best_f = grid[order[0]], float(grid_vals[order[0]])
    evaluations = len(grid)
    for z, fz, ev in results:
        evaluations += ev
        if z is not None and fz < best_f:
            best_z, best_f = z, float(fz)

    stats = {
        "grid_points": int(len(grid)),
        "random_starts": int(config.random_starts),
        "evaluations": int(evaluations),
        "boxes_processed": 0,
        "max_depth": 0,
    }
    if best_z is None:
        stats["wall_ms"] = 1e3 * (time.perf_counter() - t0)
        return NotFalsified(best_margin=np.inf, best_point=np.full(system.n_z, np.nan), stats=stats)

    best_z = np.array(best_z, dtype=float)
    unverified = False
    if best_f < -config.threshold:
        x, u = region.split(best_z)
        res = membership(system, candidate, x, u, norm=config.norm)
        if isinstance(res, Outside) and verify_quietly(system, candidate, region, res.witness, config.threshold):
            stats["wall_ms"] = 1e3 * (time.perf_counter() - t0)
            return Falsified(witness=res.witness, stats=stats)
        unverified = True
    stats["wall_ms"] = 1e3 * (time.perf_counter() - t0)
    return NotFalsified(best_margin=best_f, best_point=best_z, stats=stats, unverified=unverified)
