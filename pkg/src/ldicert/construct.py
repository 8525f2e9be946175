"""Candidate construction from Jacobian bounds, and tightening by bisection."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .certify import Certified, Inconclusive, certify
from .errors import LooseEndpointNotCertified, TooManyVertices
from .farkas import CandidateLDI
from .interval import Interval
from .search import Falsified, SearchConfig, falsify

MAX_VERTICES = 1024


@dataclass
class MvtCandidate:
    entry_intervals: tuple  # (lo, hi), each (n_x, n_z)
    vertices: CandidateLDI
    varying_entries: list

    @property
    def n_vertices(self) -> int:
        return self.vertices.n_d


def mvt_build(system, region, degeneracy_tol: float = 1e-12, max_vertices: int = MAX_VERTICES) -> MvtCandidate:
    """Enclose every Jacobian entry over the region box and take all endpoint combinations.

    By the mean value theorem each row of ``f(z) - f(z_s)`` equals the
    Jacobian row at some intermediate point times ``z - z_s``, so the vertex
    matrices bound the system whenever every entry varies independently.
    """
    region.check_equilibrium(system)
    box = region.box
    ivs = [Interval(lo, hi) for lo, hi in box]
    lo, hi = system.jacobian_enclosure(ivs[: system.n_x], ivs[system.n_x:])
    nominal = 0.5 * (lo + hi)
    varying = [(int(i), int(j)) for i, j in zip(*np.nonzero(hi - lo > degeneracy_tol))]
    if 2 ** len(varying) > max_vertices:
        raise TooManyVertices(f"{len(varying)} varying entries give {2 ** len(varying)} vertices")
    mats = []
    for choice in itertools.product((0, 1), repeat=len(varying)):
        m = nominal.copy()
        for (i, j), c in zip(varying, choice):
            m[i, j] = hi[i, j] if c else lo[i, j]
        mats.append(m)
    mats = np.array(mats)
    cand = CandidateLDI(mats[:, :, : system.n_x], mats[:, :, system.n_x:])
    return MvtCandidate(entry_intervals=(lo, hi), vertices=cand, varying_entries=varying)


@dataclass(frozen=True, eq=False)
class CandidateFamily:
    loose: CandidateLDI
    tight: CandidateLDI

    def __post_init__(self):
        if self.loose.stacked.shape != self.tight.stacked.shape:
            raise ValueError("family endpoints must have identical shapes")

    def candidate(self, t: float) -> CandidateLDI:
        t = float(t)
        if t == 0.0:
            return self.loose
        if t == 1.0:
            return self.tight
        return CandidateLDI((1.0 - t) * self.loose.A + t * self.tight.A,
                            (1.0 - t) * self.loose.B + t * self.tight.B)


@dataclass
class TightenResult:
    t_star: float
    outcome: object  # certificate at t_star
    t_hi: float | None  # smallest probed t that did not certify
    outcome_hi: object | None
    history: list = field(default_factory=list)  # (t, label)
    inconclusive_probes: list = field(default_factory=list)

    @property
    def flagged(self) -> bool:
        return bool(self.inconclusive_probes)


def probe(system, region, candidate, epsilon, search_config, max_boxes, max_depth, threads=1):
    """Falsify first, then certify. Returns the decisive outcome."""
    res = falsify(system, region, candidate, search_config)
    if isinstance(res, Falsified):
        return res
    return certify(system, region, candidate, epsilon, max_boxes=max_boxes,
                   max_depth=max_depth, threads=threads)


def _label(outcome) -> str:
    if isinstance(outcome, Certified):
        return "certified"
    if isinstance(outcome, Falsified):
        return "falsified"
    return "inconclusive"


def tighten(system, region, family: CandidateFamily, t_tol: float = 1e-2, epsilon: float = 1e-6,
            search_config: SearchConfig | None = None, max_boxes: int = 200000,
            max_depth: int = 60, threads: int = 1) -> TightenResult:
    """Largest certified ``t`` of the family, bracketed to within ``t_tol``."""
    if not t_tol > 0.0:
        raise ValueError("t_tol must be positive")
    search_config = search_config or SearchConfig()
    history = []
    flagged = []

    def run(t):
        out = probe(system, region, family.candidate(t), epsilon, search_config,
                    max_boxes, max_depth, threads)
        history.append((t, _label(out)))
        if isinstance(out, Inconclusive):
            flagged.append(t)
        return out

    first = run(0.0)
    if not isinstance(first, Certified):
        raise LooseEndpointNotCertified(f"loose endpoint is {_label(first)}", first)
    last = run(1.0)
    if isinstance(last, Certified):
        return TightenResult(1.0, last, None, None, history, flagged)
    t_lo, out_lo, t_hi, out_hi = 0.0, first, 1.0, last
    while t_hi - t_lo > t_tol:
        t = 0.5 * (t_lo + t_hi)
        out = run(t)
        if isinstance(out, Certified):
            t_lo, out_lo = t, out
        else:
            t_hi, out_hi = t, out
    return TightenResult(t_lo, out_lo, t_hi, out_hi, history, flagged)
