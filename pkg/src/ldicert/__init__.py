"""Falsify or certify polytopic linear difference inclusions of nonlinear maps."""

from .certify import Certified, Inconclusive, box_bound, certify
from .construct import CandidateFamily, MvtCandidate, TightenResult, mvt_build, tighten
from .expr import parse
from .farkas import (
    CandidateLDI,
    DynamicalSystem,
    Inside,
    Outside,
    Region,
    Witness,
    margin,
    membership,
    verify_witness,
)
from .geometry import hull_distance, nnls_project
from .problem import Problem, load
from .search import Falsified, NotFalsified, SearchConfig, falsify

__version__ = "0.1.0"

__all__ = [
    "CandidateFamily",
    "CandidateLDI",
    "Certified",
    "DynamicalSystem",
    "Falsified",
    "Inconclusive",
    "Inside",
    "MvtCandidate",
    "NotFalsified",
    "Outside",
    "Problem",
    "Region",
    "SearchConfig",
    "TightenResult",
    "Witness",
    "box_bound",
    "certify",
    "falsify",
    "hull_distance",
    "load",
    "margin",
    "membership",
    "mvt_build",
    "nnls_project",
    "parse",
    "tighten",
    "verify_witness",
]
