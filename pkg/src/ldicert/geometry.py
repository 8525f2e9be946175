"""Convex-geometry kernels.

* :func:`nnls_project` - Euclidean projection onto the cone ``{M a : a >= 0}``
  (Lawson-Hanson active set).
* :func:`hull_distance` - distance from a point to the convex hull of finitely
  many points (Wolfe's minimum-norm-point algorithm).
* :func:`separating_direction` / :func:`hull_separating_direction` - Farkas
  alternatives recovered from the projection residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateResidual, NumericalBreakdown

MEMBERSHIP_TOL = 1e-9
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class ConeProjection:
    alpha: np.ndarray
    projection: np.ndarray
    distance: float


@dataclass(frozen=True)
class SeparatingDirection:
    y: np.ndarray
    violation: float  # b^T y, negative when separating


def nnls_project(M, b) -> ConeProjection:
    """Project ``b`` onto the cone generated by the columns of ``M``.

    Deterministic: the entering column is the one with the most negative
    gradient component, ties going to the lowest index.
    """
    M = np.asarray(M, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = M.shape
    if n < 1:
        raise ValueError("M needs at least one column")
    if b.shape != (m,):
        raise ValueError(f"b has shape {b.shape}, expected ({m},)")
    if not (np.all(np.isfinite(M)) and np.all(np.isfinite(b))):
        raise ValueError("non-finite input")

    tol = 10.0 * _EPS * max(m, n) * max(np.abs(M).sum(axis=0).max(), 1.0) * max(np.linalg.norm(b), 1.0)
    cap = 50 * n
    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    w = M.T @ b
    iterations = 0
    while not passive.all():
        cand = np.where(passive, -np.inf, w)
        j = int(np.argmax(cand))
        if cand[j] <= tol:
            break
        passive[j] = True
        while True:
            iterations += 1
            if iterations > cap:
                raise NumericalBreakdown(f"NNLS did not converge within {cap} iterations")
            idx = np.flatnonzero(passive)
            z = np.zeros(n)
            z[idx] = np.linalg.lstsq(M[:, idx], b, rcond=None)[0]
            if np.all(z[idx] > 0.0):
                x = z
                break
            bad = idx[z[idx] <= 0.0]
            denom = x[bad] - z[bad]
            ratios = np.divide(x[bad], denom, out=np.zeros_like(denom), where=denom > 0.0)
            step = float(np.min(ratios))
            x = x + step * (z - x)
            passive &= x > tol
            x[~passive] = 0.0
            if not passive.any():
                break
        w = M.T @ (b - M @ x)
    proj = M @ x
    return ConeProjection(alpha=x, projection=proj, distance=float(np.linalg.norm(proj - b)))


def _affine_minimizer(Q: np.ndarray) -> np.ndarray:
    """Weights ``mu`` (summing to one) of the min-norm point of aff(rows of Q)."""
    k = len(Q)
    if k == 1:
        return np.ones(1)
    if k == 2:
        d = Q[1] - Q[0]
        dd = float(d.dot(d))
        if dd > 0.0:
            t = -float(Q[0].dot(d)) / dd
            return np.array([1.0 - t, t])
    K = np.empty((k + 1, k + 1))
    K[0, 0] = 0.0
    K[0, 1:] = 1.0
    K[1:, 0] = 1.0
    K[1:, 1:] = Q @ Q.T
    rhs = np.zeros(k + 1)
    rhs[0] = 1.0
    try:
        mu = np.linalg.solve(K, rhs)[1:]
        if np.all(np.isfinite(mu)) and np.abs(mu).max() < 1e8:
            return mu
    except np.linalg.LinAlgError:
        pass
    # affinely dependent rows: fall back to the least-squares form
    base = Q[0]
    D = (Q[1:] - base).T
    c = np.linalg.lstsq(D, -base, rcond=None)[0]
    return np.concatenate(([1.0 - c.sum()], c))


def hull_distance(vertices, p, max_iter: int | None = None):
    """Distance from ``p`` to conv(vertices) and the convex weights attaining it.

    Returns ``(distance, alpha)`` with ``alpha >= 0``, ``sum(alpha) == 1``.
    """
    V = np.atleast_2d(np.asarray(vertices, dtype=float))
    p = np.asarray(p, dtype=float)
    n_d = V.shape[0]
    if n_d < 1:
        raise ValueError("need at least one vertex")
    P = V - p
    alpha = np.zeros(n_d)
    if n_d == 1:
        alpha[0] = 1.0
        return float(np.linalg.norm(P[0])), alpha

    norms2 = (P * P).sum(axis=1)
    scale = float(norms2.max())
    if scale == 0.0:
        alpha[0] = 1.0
        return 0.0, alpha
    root_scale = math.sqrt(scale)
    stop_abs = 4.0 * _EPS * root_scale
    cap = max_iter or 50 * n_d + 50

    S = [int(norms2.argmin())]
    lam = np.ones(1)
    x = P[S[0]].copy()
    prev = math.inf
    for _ in range(cap):
        xx = float(x.dot(x))
        nx = math.sqrt(xx)
        # exact arithmetic decreases ||x|| strictly; stalling means rounding noise
        if nx <= 8.0 * _EPS * root_scale or xx >= prev:
            break
        prev = xx
        g = P.dot(x)
        j = int(g.argmin())
        if xx - g[j] <= 1e-12 * xx + stop_abs * nx or j in S:
            break
        S.append(j)
        lam = np.concatenate((lam, [0.0]))
        for _ in range(cap):
            mu = _affine_minimizer(P[S])
            if (mu > 1e-14).all():
                lam = mu
                break
            dec = (mu <= 1e-14) & (lam - mu > 0.0)
            if not dec.any():
                lam = np.clip(mu, 0.0, None)
                lam /= lam.sum()
                break
            theta = float(np.min(lam[dec] / (lam[dec] - mu[dec])))
            lam = lam + theta * (mu - lam)
            keep = lam > 1e-14
            if not keep.any():
                keep[int(np.argmax(lam))] = True
            S = [s for s, k in zip(S, keep) if k]
            lam = lam[keep]
            lam = lam / lam.sum()
        else:
            raise NumericalBreakdown("min-norm point minor cycle did not terminate")
        x = lam.dot(P[S])
    else:
        raise NumericalBreakdown(f"min-norm point did not converge in {cap} iterations")
    alpha[S] = lam
    return math.sqrt(float(x.dot(x))), alpha


def separating_direction(M, b, proj: ConeProjection) -> SeparatingDirection:
    """Unit ``y`` with ``M^T y >= 0`` and ``b^T y = -distance`` (cone version)."""
    if proj.distance <= MEMBERSHIP_TOL:
        raise DegenerateResidual(f"distance {proj.distance:.3e} is below the membership tolerance")
    b = np.asarray(b, dtype=float)
    r = proj.projection - b
    y = r / np.linalg.norm(r)
    return SeparatingDirection(y=y, violation=float(b @ y))


def hull_separating_direction(vertices, p, alpha) -> SeparatingDirection:
    """Lifted separator for the hull version of the alternative.

    For columns ``[v_i; 1]`` and right-hand side ``[p; 1]`` this returns
    ``y = [g; -g.q]`` where ``q`` is the nearest hull point and ``g`` the unit
    vector from ``p`` towards ``q``. The state part of ``y`` has unit norm and
    ``b^T y`` equals minus the hull distance.
    """
    V = np.atleast_2d(np.asarray(vertices, dtype=float))
    p = np.asarray(p, dtype=float)
    q = np.asarray(alpha, dtype=float) @ V
    r = q - p
    d = float(np.linalg.norm(r))
    if d <= MEMBERSHIP_TOL:
        raise DegenerateResidual(f"distance {d:.3e} is below the membership tolerance")
    g = r / d
    y = np.append(g, -float(g @ q))
    return SeparatingDirection(y=y, violation=float(g @ p - g @ q))
