"""Pointwise certificate data for a candidate polytopic LDI.

At a fixed ``(x, u)`` the candidate qualifies iff ``b`` lies in the cone of
the columns of ``M``::

    M = [A_i dx + B_i du ; 1]_i        b = [f(x, u) - x_s ; 1]

The all-ones row turns cone membership into convex-hull membership of
``dx+ = f(x, u) - x_s`` in ``conv{A_i dx + B_i du}``. The inner minimisation
of ``b^T y`` over ``{M^T y >= 0}`` needs a norm bound on ``y``. Two are
supported:

``"state"`` (default)
    bound only the state block ``y[:n_x]``; the optimum is ``-sqrt(c)`` times
    the Euclidean hull distance.
``"full"``
    bound the whole vector; the optimum is ``-sqrt(c)`` times the distance
    from ``b`` to the cone, computed by NNLS.

Both have the same sign, so both decide the same inclusion question.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import interval as iv
from .errors import (
    DimensionMismatch,
    EquilibriumResidual,
    NormViolation,
    RegionExcludesEquilibrium,
    VerificationFailed,
)
from .expr import Expression, Var, differentiate
from .geometry import (
    MEMBERSHIP_TOL,
    SeparatingDirection,
    hull_distance,
    hull_separating_direction,
    nnls_project,
    separating_direction,
)
from .interval import Interval

EQUILIBRIUM_TOL = 1e-9
HALFSPACE_SLACK = 1e-12
FALSIFICATION_THRESHOLD = 1e-6
NORMS = ("state", "full")


@dataclass(frozen=True, eq=False)
class DynamicalSystem:
    n_x: int
    n_u: int
    f: tuple
    x_s: np.ndarray
    u_s: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "f", tuple(self.f))
        object.__setattr__(self, "x_s", np.asarray(self.x_s, dtype=float).reshape(self.n_x))
        object.__setattr__(self, "u_s", np.asarray(self.u_s, dtype=float).reshape(self.n_u))
        if len(self.f) != self.n_x:
            raise DimensionMismatch("dynamics", f"{len(self.f)} expressions for n_x={self.n_x}")
        residual = float(np.max(np.abs(self.evaluate(self.x_s, self.u_s) - self.x_s)))
        if not residual <= EQUILIBRIUM_TOL:
            raise EquilibriumResidual(residual)

    @property
    def n_z(self) -> int:
        return self.n_x + self.n_u

    @property
    def z_s(self) -> np.ndarray:
        return np.concatenate([self.x_s, self.u_s])

    def evaluate(self, x, u=()) -> np.ndarray:
        return np.array([e.evaluate(x, u) for e in self.f])

    def enclose(self, x: Sequence[Interval], u: Sequence[Interval] = ()):
        """Interval enclosure of f over a box, as ``(lo, hi)`` arrays."""
        vals = [e.enclose(x, u) for e in self.f]
        return np.array([v.lo for v in vals]), np.array([v.hi for v in vals])

    @cached_property
    def jacobian(self) -> tuple:
        """Symbolic Jacobian rows ``d f_i / d (x, u)``."""
        variables = [Var("x", j) for j in range(self.n_x)] + [Var("u", j) for j in range(self.n_u)]
        return tuple(tuple(differentiate(e, v) for v in variables) for e in self.f)

    def jacobian_at(self, x, u=()) -> np.ndarray:
        return np.array([[d.evaluate(x, u) for d in row] for row in self.jacobian])

    def jacobian_enclosure(self, x: Sequence[Interval], u: Sequence[Interval] = ()):
        vals = [[d.enclose(x, u) for d in row] for row in self.jacobian]
        return (np.array([[v.lo for v in row] for row in vals]),
                np.array([[v.hi for v in row] for row in vals]))


@dataclass(frozen=True, eq=False)
class Region:
    """Box in ``(x, u)`` optionally cut by halfspaces ``F x + E u <= 1``."""

    x_box: np.ndarray  # (n_x, 2)
    u_box: np.ndarray  # (n_u, 2)
    F: np.ndarray | None = None
    E: np.ndarray | None = None

    def __post_init__(self):
        x_box = np.asarray(self.x_box, dtype=float).reshape(-1, 2)
        u_box = np.asarray(self.u_box, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "x_box", x_box)
        object.__setattr__(self, "u_box", u_box)
        box = self.box
        if not np.all(np.isfinite(box)) or np.any(box[:, 0] > box[:, 1]):
            raise DimensionMismatch("region", "box bounds must be finite with lo <= hi")
        if self.F is not None:
            F = np.asarray(self.F, dtype=float).reshape(-1, len(x_box))
            E = (np.zeros((F.shape[0], len(u_box))) if self.E is None
                 else np.asarray(self.E, dtype=float).reshape(F.shape[0], len(u_box)))
            object.__setattr__(self, "F", F)
            object.__setattr__(self, "E", E)

    @property
    def box(self) -> np.ndarray:
        """Box over the stacked variable ``z = (x, u)``, shape (n_z, 2)."""
        return np.vstack([self.x_box, self.u_box]) if len(self.u_box) else self.x_box.copy()

    @property
    def n_x(self) -> int:
        return len(self.x_box)

    @property
    def halfspaces(self) -> np.ndarray | None:
        if self.F is None:
            return None
        return np.hstack([self.F, self.E])

    def contains(self, x, u=(), slack: float = HALFSPACE_SLACK) -> bool:
        z = np.concatenate([np.asarray(x, float), np.asarray(u, float)])
        return self.contains_z(z, slack)

    def contains_z(self, z, slack: float = HALFSPACE_SLACK) -> bool:
        box = self.box
        if np.any(z < box[:, 0]) or np.any(z > box[:, 1]):
            return False
        H = self.halfspaces
        return H is None or bool(np.all(H @ z <= 1.0 + slack))

    def check_equilibrium(self, system: DynamicalSystem) -> None:
        z = system.z_s
        box = self.box
        if box.shape[0] != system.n_z:
            raise DimensionMismatch("region", f"box has {box.shape[0]} rows, expected {system.n_z}")
        inside = np.all(z > box[:, 0]) and np.all(z < box[:, 1])
        H = self.halfspaces
        if H is not None:
            inside = inside and bool(np.all(H @ z < 1.0))
        if not inside:
            raise RegionExcludesEquilibrium("equilibrium is not in the interior of the region")

    def split(self, z):
        z = np.asarray(z, dtype=float)
        return z[: self.n_x], z[self.n_x:]


@dataclass(frozen=True, eq=False)
class CandidateLDI:
    A: np.ndarray  # (n_d, n_x, n_x)
    B: np.ndarray  # (n_d, n_x, n_u)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if A.ndim != 3 or A.shape[1] != A.shape[2] or A.shape[0] < 1:
            raise DimensionMismatch("candidate", f"A has shape {A.shape}")
        B = self.B
        B = np.zeros((A.shape[0], A.shape[1], 0)) if B is None else np.asarray(B, dtype=float)
        if B.ndim != 3 or B.shape[:2] != A.shape[:2]:
            raise DimensionMismatch("candidate", f"B has shape {B.shape}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
            raise DimensionMismatch("candidate", "non-finite entries")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @classmethod
    def from_matrices(cls, A_list, B_list=None):
        A = np.asarray(A_list, dtype=float)
        B = None if B_list is None else np.asarray(B_list, dtype=float)
        return cls(A, B)

    @property
    def n_d(self) -> int:
        return self.A.shape[0]

    @property
    def n_x(self) -> int:
        return self.A.shape[1]

    @property
    def n_u(self) -> int:
        return self.B.shape[2]

    @cached_property
    def stacked(self) -> np.ndarray:
        """Vertex maps on ``dz = (dx, du)``: shape (n_d, n_x, n_z)."""
        return np.concatenate([self.A, self.B], axis=2)

    def check(self, system: DynamicalSystem) -> None:
        if self.n_x != system.n_x or self.n_u != system.n_u:
            raise DimensionMismatch(
                "candidate", f"vertex shape ({self.n_x}, {self.n_u}) vs system ({system.n_x}, {system.n_u})")


@dataclass(frozen=True, eq=False)
class FarkasData:
    M: np.ndarray
    b: np.ndarray
    dx: np.ndarray
    du: np.ndarray
    dx_plus: np.ndarray

    @property
    def images(self) -> np.ndarray:
        """Vertex images ``A_i dx + B_i du`` as rows."""
        return self.M[:-1].T


@dataclass
class Witness:
    x: np.ndarray
    u: np.ndarray
    y: np.ndarray
    objective: float
    alpha_residual: float
    norm: str = "state"
    verified: bool = False
    alpha: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        out = {
            "x": self.x.tolist(),
            "u": self.u.tolist(),
            "y": self.y.tolist(),
            "objective": self.objective,
            "alpha_residual": self.alpha_residual,
            "norm": self.norm,
            "verified": self.verified,
        }
        if self.alpha is not None:
            out["alpha"] = self.alpha.tolist()
        return out


@dataclass(frozen=True)
class Inside:
    alpha: np.ndarray
    distance: float


@dataclass(frozen=True)
class Outside:
    witness: Witness


def build(system: DynamicalSystem, candidate: CandidateLDI, x, u=()) -> FarkasData:
    x = np.asarray(x, dtype=float).reshape(system.n_x)
    u = np.asarray(u, dtype=float).reshape(system.n_u)
    dx = x - system.x_s
    du = u - system.u_s
    dx_plus = system.evaluate(x, u) - system.x_s
    images = candidate.A @ dx + candidate.B @ du  # (n_d, n_x)
    M = np.vstack([images.T, np.ones(candidate.n_d)])
    b = np.append(dx_plus, 1.0)
    return FarkasData(M=M, b=b, dx=dx, du=du, dx_plus=dx_plus)


def _norm_of(y: np.ndarray, n_x: int, norm: str) -> float:
    if norm not in NORMS:
        raise ValueError(f"norm must be one of {NORMS}")
    return float(np.linalg.norm(y[:n_x] if norm == "state" else y))


def objective(data: FarkasData, y, norm: str = "state", c: float = 1.0) -> float:
    """``b^T y`` subject to the norm bound ``||y||^2 <= c``."""
    y = np.asarray(y, dtype=float)
    n_x = len(data.dx_plus)
    if _norm_of(y, n_x, norm) ** 2 > c + 1e-9:
        raise NormViolation(f"||y||^2 exceeds {c}")
    return float(data.b @ y)


def inner_optimum(data: FarkasData, norm: str = "state", c: float = 1.0):
    """Exact inner optimum over ``y`` at fixed ``(x, u)``: ``(value, alpha, y)``.

    ``y`` is None when the optimum is zero (the point is inside).
    """
    scale = math.sqrt(c)
    if norm == "state":
        dist, alpha = hull_distance(data.images, data.dx_plus)
        y = None
        if dist > MEMBERSHIP_TOL:
            y = scale * hull_separating_direction(data.images, data.dx_plus, alpha).y
        return -scale * dist, alpha, y
    if norm == "full":
        proj = nnls_project(data.M, data.b)
        y = None
        if proj.distance > MEMBERSHIP_TOL:
            y = scale * separating_direction(data.M, data.b, proj).y
        return -scale * proj.distance, proj.alpha, y
    raise ValueError(f"norm must be one of {NORMS}")


def margin(system, candidate, x, u=(), norm: str = "state", c: float = 1.0) -> float:
    """Inner optimum of the certificate program at ``(x, u)``; zero iff the point is covered."""
    if norm == "state":
        # direct path: this is the falsifier's inner loop
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        dz = np.concatenate((x - system.x_s, u - system.u_s))
        images = candidate.stacked @ dz
        return -math.sqrt(c) * hull_distance(images, system.evaluate(x, u) - system.x_s)[0]
    data = build(system, candidate, x, u)
    return -math.sqrt(c) * nnls_project(data.M, data.b).distance


def membership(system, candidate, x, u=(), norm: str = "state"):
    """Decide hull membership at one point: :class:`Inside` or :class:`Outside`."""
    data = build(system, candidate, x, u)
    value, alpha, y = inner_optimum(data, norm)
    if y is None:
        if norm == "full":
            alpha = alpha / alpha.sum() if alpha.sum() > 0 else alpha
        return Inside(alpha=alpha, distance=-value)
    w = Witness(
        x=np.asarray(x, float).reshape(system.n_x).copy(),
        u=np.asarray(u, float).reshape(system.n_u).copy(),
        y=y,
        objective=float(data.b @ y),
        alpha_residual=-value,
        norm=norm,
    )
    return Outside(witness=w)


def _interval_b(system: DynamicalSystem, x, u):
    """Enclosure of ``b`` (without the trailing one) and of ``dz`` at a point."""
    xi = [Interval.point(v) for v in x]
    ui = [Interval.point(v) for v in u]
    flo, fhi = system.enclose(xi, ui)
    b = iv.isub((flo, fhi), iv.ipoint(system.x_s))
    dz = iv.isub(iv.ipoint(np.concatenate([x, u])), iv.ipoint(system.z_s))
    return b, dz


def verify_witness(system, candidate, region: Region, w: Witness,
                   threshold: float = FALSIFICATION_THRESHOLD, mt_tol: float = 1e-9) -> Witness:
    """Re-check a witness with interval arithmetic; raise if any condition fails.

    Passing means ``M^T y >= -mt_tol`` and ``b^T y < -threshold`` hold for
    every value consistent with rounding. Because the weights of any
    representation ``M a = b`` sum to one, ``b^T y = a^T M^T y >= -mt_tol``,
    so a passing witness refutes membership whenever ``threshold >= mt_tol``.
    """
    x = np.asarray(w.x, dtype=float)
    u = np.asarray(w.u, dtype=float)
    y = np.asarray(w.y, dtype=float)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(u)) and np.all(np.isfinite(y))):
        raise VerificationFailed("finite", "witness has non-finite entries")
    if x.shape != (system.n_x,) or u.shape != (system.n_u,) or y.shape != (system.n_x + 1,):
        raise VerificationFailed("shape")
    if not region.contains(x, u):
        raise VerificationFailed("region", f"x={x.tolist()} u={u.tolist()}")
    nrm = _norm_of(y, system.n_x, w.norm)
    if abs(nrm - 1.0) > 1e-9:
        raise VerificationFailed("norm", f"||y|| = {nrm}")

    b_head, dz = _interval_b(system, x, u)
    images = iv.imatvec(candidate.stacked, dz)  # (n_d, n_x) intervals
    ys, yt = y[: system.n_x], y[system.n_x]
    mty = iv.imatvec(images, iv.ipoint(ys))
    mty_lo = mty[0] + yt
    if np.any(mty_lo < -mt_tol):
        raise VerificationFailed("cone", f"min (M^T y) = {float(mty_lo.min()):.3e}")
    bty = iv.imatvec((b_head[0][None, :], b_head[1][None, :]), iv.ipoint(ys))
    bty_hi = float(bty[1][0]) + yt
    bty_hi = math.nextafter(bty_hi, math.inf)
    if not bty_hi < -threshold:
        raise VerificationFailed("objective", f"b^T y <= {bty_hi:.6e} is not below -{threshold}")
    w.verified = True
    return w


def verify_quietly(system, candidate, region, w, threshold=FALSIFICATION_THRESHOLD) -> bool:
    try:
        verify_witness(system, candidate, region, w, threshold)
    except VerificationFailed:
        return False
    return True


def linear_combination_residual(system, candidate, x, u=()) -> float:
    """Hull distance of ``f(x, u)`` to ``conv{A_i x + B_i u}`` without deviation form."""
    x = np.asarray(x, float)
    u = np.asarray(u, float)
    images = candidate.A @ x + candidate.B @ u
    return hull_distance(images, system.evaluate(x, u))[0]
