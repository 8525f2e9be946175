"""Deterministic epsilon-certification by interval branch-and-bound.

The certifier proves that for every ``z = (x, u)`` in the region the hull
distance of ``dx+`` to ``conv{A_i dx + B_i du}`` is at most ``epsilon``. Each
box receives the smallest of five sound upper bounds:

corner bound
    enclose ``dx+`` and every vertex image over the box; the distance from
    the corners of the ``dx+`` box to the hull of vertex midpoints plus the
    largest vertex radius.
affine-multiplier bound
    pick weights ``alpha(z) = alpha* + L (z - zc)`` that follow the
    nearest-point weights at the box centre to first order, enclose the
    residual ``dx+ - sum alpha_i v_i`` in mean-value form, and pay for any
    negative weights.
LP affine-multiplier bound
    the same residual argument with ``alpha*`` and ``L`` chosen by a small
    linear program that minimises the bound itself rather than following
    the nearest point. Only tried when everything cheaper has failed.
secant bound
    write ``dx+ = J_bar(z) dz`` with ``J_bar`` the Jacobian averaged along the
    segment from the equilibrium, enclose ``J_bar`` over the box, and express
    every corner of that interval matrix through the vertex matrices.
depth bound
    split the residual along the affine hull of the centre vertex images.
    Orthogonal to it the residual is enclosed directly; inside it a
    perturbed cross-polytope argument shows the point stays in the hull.

The corner bound is the straightforward one and decays linearly with box
width. The affine and depth bounds decay quadratically where the inclusion
is tight, and the secant bound stays near zero along the hyperplanes through
the equilibrium where the vertex images collapse.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from . import interval as iv
from .errors import BudgetZero, DomainError, NonDifferentiable, NumericalBreakdown
from .farkas import Outside, membership, verify_quietly
from .geometry import hull_distance
from .interval import Interval
from .search import Falsified

# a bound that cannot be evaluated is treated as infinite, which is always sound
_BOUND_FAILURES = (DomainError, NumericalBreakdown, np.linalg.LinAlgError)

MAX_CERTIFY_DIM = 6
_FLOAT_SLACK = 1e-12
_RANK_TOL = 1e-10
SECANT_PIECES = 4


@dataclass
class BoxNode:
    box: np.ndarray  # (n_z, 2)
    upper_bound: float
    depth: int
    n_x: int = 0

    @property
    def x_sub(self) -> np.ndarray:
        return self.box[: self.n_x]

    @property
    def u_sub(self) -> np.ndarray:
        return self.box[self.n_x:]


@dataclass
class Certified:
    epsilon: float
    boxes_processed: int
    max_depth: int
    stats: dict = field(default_factory=dict)

    @property
    def value(self) -> float:
        return -self.epsilon


@dataclass
class Inconclusive:
    worst_bound: float
    boxes_remaining: int
    boxes_processed: int
    stats: dict = field(default_factory=dict)
    reason: str = "budget"

    @property
    def value(self) -> float:
        return -self.worst_bound


def _iweighted_sum(w, a):
    """Interval ``sum_i w_i a_i`` over the leading axis for point weights ``w``."""
    w = np.asarray(w, dtype=float).reshape((-1,) + (1,) * (a[0].ndim - 1))
    p, q = w * a[0], w * a[1]
    return iv._sum_products(np.moveaxis(np.minimum(p, q), 0, -1), np.moveaxis(np.maximum(p, q), 0, -1))


def _imul(a, b):
    """Elementwise product of two interval arrays (broadcasting)."""
    p = np.stack(np.broadcast_arrays(a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]))
    return iv.iwiden(p.min(axis=0), p.max(axis=0))


def _isum0(a):
    return iv._sum_products(np.moveaxis(a[0], 0, -1), np.moveaxis(a[1], 0, -1))


def _up(x: float) -> float:
    return math.nextafter(float(x), math.inf)


def _weights_lp(A, Vc, t_c, Jc, h):
    """Weights ``alpha`` and slopes ``L`` for the affine-multiplier bound.

    Minimises ``|t_c - sum alpha_i v_i|_1 + sum_kj h_j |(J - sum alpha_i A_i - sum L_i v_i^T)_kj|``
    subject to ``sum alpha = 1``, ``sum_i L_i = 0`` and ``alpha_i >= sum_j |L_ij| h_j``.
    Returns ``None`` when the solver fails; the caller then has no bound.
    """
    n_d, n_x, n_z = A.shape
    nL = n_d * n_z
    n_var = n_d + 2 * nL + n_x + n_x * n_z
    ia, iL, iP = 0, n_d, n_d + nL
    i0, i1 = n_d + 2 * nL, n_d + 2 * nL + n_x
    rows, rhs = [], []

    def row():
        r = np.zeros(n_var)
        rows.append(r)
        return r

    for i in range(n_d):
        for j in range(n_z):
            k = iL + i * n_z + j
            for sgn in (1.0, -1.0):
                r = row()
                r[k] = sgn
                r[iP + i * n_z + j] = -1.0
                rhs.append(0.0)
        r = row()
        r[ia + i] = -1.0
        r[iP + i * n_z: iP + (i + 1) * n_z] = h
        rhs.append(0.0)
    for k in range(n_x):
        for sgn in (1.0, -1.0):
            r = row()
            r[ia: ia + n_d] = sgn * Vc[:, k]
            r[i0 + k] = -1.0
            rhs.append(sgn * t_c[k])
        for j in range(n_z):
            for sgn in (1.0, -1.0):
                r = row()
                r[ia: ia + n_d] = sgn * A[:, k, j]
                r[iL + j: iL + nL: n_z] = sgn * Vc[:, k]
                r[i1 + k * n_z + j] = -1.0
                rhs.append(sgn * Jc[k, j])
    A_eq = np.zeros((1 + n_z, n_var))
    A_eq[0, ia: ia + n_d] = 1.0
    for j in range(n_z):
        A_eq[1 + j, iL + j: iL + nL: n_z] = 1.0
    b_eq = np.zeros(1 + n_z)
    b_eq[0] = 1.0
    cost = np.zeros(n_var)
    cost[i0: i1] = 1.0
    cost[i1:] = np.tile(h, n_x)
    cost[iP: iP + nL] = 1e-9 * np.tile(h, n_d)
    bounds = [(0, None)] * n_d + [(None, None)] * nL + [(0, None)] * (nL + n_x + n_x * n_z)
    try:
        res = linprog(cost, A_ub=np.array(rows), b_ub=np.array(rhs), A_eq=A_eq, b_eq=b_eq,
                      bounds=bounds, method="highs")
    except ValueError:
        return None
    if res.status != 0:
        return None
    alpha = np.clip(res.x[ia: ia + n_d], 0.0, None)
    L = res.x[iL: iL + nL].reshape(n_d, n_z)
    return alpha, L


class BoundContext:
    """Per (system, candidate) data reused by every box."""

    def __init__(self, system, candidate):
        candidate.check(system)
        self.system = system
        self.candidate = candidate
        self.n_x = system.n_x
        self.n_d = candidate.n_d
        self.A = candidate.stacked  # (n_d, n_x, n_z)
        self.An = self.A[-1]
        self.D = iv.isub(iv.ipoint(self.A[:-1]), iv.ipoint(self.An))
        self.x_s = system.x_s
        self.z_s = system.z_s
        try:
            system.jacobian  # noqa: B018 - forces symbolic differentiation once
            self.has_jacobian = True
        except NonDifferentiable:
            self.has_jacobian = False
        self.A_flat = self.A.reshape(self.n_d, -1)
        self.A_iv = iv.ipoint(self.A)
        self.secant_pieces = SECANT_PIECES
        self.max_secant_corners = 256
        # f(z_s) - x_s is zero only up to the equilibrium tolerance
        rho = self._enclose_f(self.z_s, self.z_s)
        self.rho_norm = iv.norm_upper(iv.imag(rho))

    # helpers

    def _enclose_f(self, lo, hi):
        ivs = [Interval(a, b) for a, b in zip(lo, hi)]
        flo, fhi = self.system.enclose(ivs[: self.n_x], ivs[self.n_x:])
        return iv.isub((flo, fhi), iv.ipoint(self.x_s))

    def _enclose_jac(self, lo, hi):
        ivs = [Interval(a, b) for a, b in zip(lo, hi)]
        return self.system.jacobian_enclosure(ivs[: self.n_x], ivs[self.n_x:])

    # bounds

    def corner_bound(self, box) -> float:
        box = np.asarray(box, dtype=float)
        delta = iv.isub((box[:, 0], box[:, 1]), iv.ipoint(self.z_s))
        F = self._enclose_f(box[:, 0], box[:, 1])
        V = iv.imatvec(self.A, delta)  # (n_d, n_x)
        mid = 0.5 * (V[0] + V[1])
        rad = np.nextafter(np.maximum(V[1] - mid, mid - V[0]), np.inf)
        shift = max(iv.norm_upper(r) for r in rad)
        worst = 0.0
        for corner in itertools.product(*zip(F[0], F[1])):
            d, _ = hull_distance(mid, np.array(corner))
            worst = max(worst, d)
        scale = float(np.abs(mid).max() + max(np.abs(F[0]).max(), np.abs(F[1]).max()))
        return _up(worst + shift + _FLOAT_SLACK * scale)

    def _centre(self, box):
        box = np.asarray(box, dtype=float)
        zc = 0.5 * (box[:, 0] + box[:, 1])
        e = iv.isub((box[:, 0], box[:, 1]), iv.ipoint(zc))
        delta = iv.isub((box[:, 0], box[:, 1]), iv.ipoint(self.z_s))
        dc = iv.isub(iv.ipoint(zc), iv.ipoint(self.z_s))
        Fc = self._enclose_f(zc, zc)
        J = self._enclose_jac(box[:, 0], box[:, 1])
        JmAn = iv.isub(J, iv.ipoint(self.An))
        vn_c = iv.imatvec(self.An, dc)
        Vc = self.A @ (zc - self.z_s)
        Fc_mid = 0.5 * (Fc[0] + Fc[1])
        _, alpha = hull_distance(Vc, Fc_mid)
        return zc, e, delta, dc, Fc, J, JmAn, vn_c, Vc, Fc_mid, alpha

    def affine_bound(self, box, centre=None) -> float:
        if not self.has_jacobian:
            return math.inf
        centre = centre or self._centre(box)
        zc, alpha, Vc = centre[0], centre[-1], centre[8]
        if self.n_d == 1:
            return self._affine_residual(centre, alpha, None)
        # weights follow the nearest point to first order; vertices with zero
        # weight keep zero slope so they never turn negative
        Jc = self.system.jacobian_at(zc[: self.n_x], zc[self.n_x:])
        Aa = np.tensordot(alpha, self.A, axes=1)
        lifted = np.vstack([Vc.T, np.ones(self.n_d)])
        rhs = np.vstack([Jc - Aa, np.zeros((1, Jc.shape[1]))])
        sw = np.sqrt(alpha)
        L = sw[:, None] * np.linalg.lstsq(lifted * sw, rhs, rcond=None)[0]
        if not np.all(np.isfinite(L)):
            return math.inf
        return self._affine_residual(centre, alpha, L)

    def lp_affine_bound(self, box, centre=None) -> float:
        """Affine-multiplier bound with weights and slopes chosen by a linear program.

        The program keeps ``alpha_c + L e`` nonnegative on the whole box and
        minimises the zero and first order residuals, which keeps the bound
        quadratic near faces of the hull where the nearest-point weights of
        the centre would change support inside the box.
        """
        if not self.has_jacobian or self.n_d == 1:
            return math.inf
        centre = centre or self._centre(box)
        zc, e, Vc, Fc_mid = centre[0], centre[1], centre[8], centre[9]
        h = np.maximum(np.abs(e[0]), np.abs(e[1]))
        Jc = self.system.jacobian_at(zc[: self.n_x], zc[self.n_x:])
        sol = _weights_lp(self.A, Vc, Fc_mid, Jc, h)
        if sol is None:
            return math.inf
        return self._affine_residual(centre, *sol)

    def _affine_residual(self, centre, alpha, L) -> float:
        """Rigorous bound on ``|dx+ - sum alpha_i(z) v_i(z)|`` with ``alpha(z) = alpha + L (z - zc)``."""
        zc, e, delta, dc, Fc, J, JmAn, vn_c, Vc, Fc_mid, _ = centre
        n_d = self.n_d
        if L is None:
            r = iv.iadd(iv.isub(Fc, vn_c), iv.imatvec(JmAn, e))
            return iv.norm_upper(iv.imag(r))
        beta_c, Lb = alpha[:-1], L[:-1]

        beta = iv.iadd(iv.ipoint(beta_c), iv.imatvec(Lb, e))  # (n_d-1,)
        # sum of the weights is affine in e; summing the beta intervals instead
        # would lose that dependency and invent negative weight for the last vertex
        sum_c = _isum0(iv.ipoint(beta_c))
        slope = _isum0(iv.ipoint(Lb))
        sum_beta = iv.iadd(sum_c, iv.imatvec((slope[0][None, :], slope[1][None, :]), e))
        alpha_n_lo = math.nextafter(1.0 - float(sum_beta[1][0]), -math.inf)
        Ddc = iv.imatvec(self.D, dc)  # (n_d-1, n_x)
        r_c = iv.isub(iv.isub(Fc, vn_c), _iweighted_sum(beta_c, Ddc))
        bD = _imul((beta[0][:, None, None], beta[1][:, None, None]), self.D)
        Ddelta = iv.imatvec(self.D, delta)  # (n_d-1, n_x)
        outer = _imul((Ddelta[0][:, :, None], Ddelta[1][:, :, None]), iv.ipoint(Lb[:, None, :]))
        Jr = iv.isub(iv.isub(JmAn, _isum0(bD)), _isum0(outer))
        r = iv.iadd(r_c, iv.imatvec(Jr, e))
        neg = float(np.maximum(0.0, -beta[0]).sum() + max(0.0, -alpha_n_lo))
        if neg > 0.0:
            Vall = iv.imatvec(self.A, delta)
            vmax = max(iv.norm_upper(iv.imag((Vall[0][i], Vall[1][i]))) for i in range(n_d))
            corr = _up(_up(2.0 * _up(neg * (1.0 + 4 * n_d * 2.0**-53))) * vmax)
        else:
            corr = 0.0
        return _up(iv.norm_upper(iv.imag(r)) + corr)

    def secant_bound(self, box, stop_below: float = 0.0) -> float:
        if not self.has_jacobian:
            return math.inf
        box = np.asarray(box, dtype=float)
        delta = iv.isub((box[:, 0], box[:, 1]), iv.ipoint(self.z_s))
        m = self.secant_pieces
        pieces = []
        for k in range(m):
            t0, t1 = k / m, (k + 1) / m
            p = np.stack([t0 * delta[0], t0 * delta[1], t1 * delta[0], t1 * delta[1]])
            seg = iv.iadd(iv.iwiden(p.min(axis=0), p.max(axis=0)), iv.ipoint(self.z_s))
            pieces.append(self._enclose_jac(seg[0], seg[1]))
        total = _isum0((np.array([q[0] for q in pieces]), np.array([q[1] for q in pieces])))
        Jbar = iv.iscale(1.0 / m, total)
        varying = np.argwhere(Jbar[1] > Jbar[0])
        if 2 ** len(varying) > self.max_secant_corners:
            return math.inf
        dmag = iv.imag(delta)
        Rmax = np.zeros_like(Jbar[0])
        for choice in itertools.product((0, 1), repeat=len(varying)):
            C = Jbar[0].copy()
            for (i, j), c in zip(varying, choice):
                if c:
                    C[i, j] = Jbar[1][i, j]
            _, a = hull_distance(self.A_flat, C.ravel())
            a = np.clip(a, 0.0, None)
            a /= a.sum()
            R = iv.isub(iv.ipoint(C), _iweighted_sum(a, self.A_iv))
            Rmax = np.maximum(Rmax, iv.imag(R))
            if stop_below > 0.0 and float(np.linalg.norm(Rmax @ dmag)) > stop_below:
                return math.inf
        r = iv.imatvec((-Rmax, Rmax), delta)
        return _up(iv.norm_upper(iv.imag(r)) + self.rho_norm)

    def depth_bound(self, box, centre=None) -> float:
        if not self.has_jacobian:
            return math.inf
        zc, e, delta, dc, Fc, J, JmAn, vn_c, Vc, Fc_mid, alpha = centre or self._centre(box)
        n_x, n_d = self.n_x, self.n_d
        W = (Vc[:-1] - Vc[-1]).T
        if n_d > 1:
            U, sv, _ = np.linalg.svd(W, full_matrices=True)
            k = int(np.sum(sv > _RANK_TOL * max(sv[0], 1.0))) if sv.size else 0
        else:
            U, k = np.eye(n_x), 0
        Qp, Qo = U[:, :k], U[:, k:]
        base = iv.iadd(iv.isub(Fc, vn_c), iv.imatvec(JmAn, e))

        perp = 0.0
        if Qo.shape[1]:
            g = iv.imatvec(Qo.T, base)
            perp = iv.norm_upper(iv.imag(g))
            if n_d > 1:
                h = iv.imatvec(Qo.T, iv.imatvec(self.D, delta))
                perp += max(iv.norm_upper(iv.imag((h[0][i], h[1][i]))) for i in range(n_d - 1))
        # U is orthogonal only up to rounding
        perp = _up(perp * (1.0 + 1e-13 * n_x))
        if k == 0:
            return perp

        # in-hull part: the perturbed cross-polytope around t(z) must keep t(z) inside
        # every combination sum a_i A_i - J is a convex combination of A_i - J,
        # so the worst vertex bounds the drift of all cross-polytope points
        Jmid = 0.5 * (J[0] + J[1])
        emag = np.maximum(np.abs(e[0]), np.abs(e[1]))
        drift = max(float(np.linalg.norm(np.abs(Qp.T @ (Ai - Jmid)) @ emag)) for Ai in self.A)
        drift += float(np.linalg.norm(np.abs(Qp.T) @ (0.5 * (J[1] - J[0])) @ emag))
        s = math.sqrt(k) * drift * 1.25 + 1e-13 * (1.0 + float(np.abs(Vc).max()))
        t_c = Qp.T @ (Fc_mid - Vc[-1])
        P = (Vc - Vc[-1]) @ Qp  # (n_d, k)
        t_iv = iv.imatvec(Qp.T, iv.isub(Fc, vn_c))
        limit = s / math.sqrt(k) * (1.0 - 1e-12)
        for j in range(k):
            for sgn in (-1.0, 1.0):
                p = t_c.copy()
                p[j] += sgn * s
                d, a = hull_distance(P, p)
                if d > 0.5 * limit:
                    return math.inf
                a = np.clip(a, 0.0, None)
                a /= a.sum()
                Aw = _iweighted_sum(a[:-1], self.D)  # sum a_i (A_i - A_n)
                c = iv.isub(iv.imatvec(Qp.T, iv.imatvec(Aw, dc)), t_iv)
                c = (c[0].copy(), c[1].copy())
                c[0][j] -= sgn * s
                c[1][j] -= sgn * s
                c = iv.iwiden(*c)
                var = iv.imatvec(Qp.T, iv.imatvec(iv.isub(Aw, JmAn), e))
                xi = iv.norm_upper(iv.imag(iv.iadd(c, var)))
                if not xi < limit:
                    return math.inf
        return perp


def box_bound(system, candidate, box, stop_below: float = 0.0, context: BoundContext | None = None) -> float:
    """Sound upper bound on the hull distance over ``box`` (shape (n_z, 2)).

    With ``stop_below > 0`` the bounds are tried cheapest-first and the first
    one at or below ``stop_below`` is returned.
    """
    ctx = context or BoundContext(system, candidate)
    box = np.asarray(box, dtype=float)
    best = math.inf
    centre = None
    try:
        if ctx.has_jacobian:
            centre = ctx._centre(box)
    except _BOUND_FAILURES:
        centre = None
    try:
        best = ctx.secant_bound(box, stop_below)
    except _BOUND_FAILURES:
        pass
    if best <= stop_below:
        return best
    if centre is not None:
        for fn in (ctx.depth_bound, ctx.affine_bound):
            try:
                best = min(best, fn(box, centre))
            except _BOUND_FAILURES:
                continue
            if best <= stop_below:
                return best
    try:
        best = min(best, ctx.corner_bound(box))
    except _BOUND_FAILURES:
        pass
    if centre is not None and best > stop_below:
        try:
            best = min(best, ctx.lp_affine_bound(box, centre))
        except _BOUND_FAILURES:
            pass
    return best


def naive_box_bound(system, candidate, box) -> float:
    """The corner bound alone."""
    return BoundContext(system, candidate).corner_bound(box)


def _excluded(region, box) -> bool:
    H = region.halfspaces
    if H is None:
        return False
    rows = iv.imatvec(H, (box[:, 0], box[:, 1]))
    return bool(np.any(rows[0] > 1.0))


def certify(system, region, candidate, epsilon: float = 1e-6, max_boxes: int = 200000,
            max_depth: int = 60, threads: int = 1, trace: list | None = None):
    """Branch-and-bound over the region; returns Certified, Falsified or Inconclusive.

    ``trace``, when given, receives ``(event, box)`` tuples for every root,
    split, retirement and exclusion so the partition can be audited.
    """
    if not epsilon > 0.0:
        raise ValueError("epsilon must be positive")
    if max_boxes < 1 or max_depth < 1:
        raise BudgetZero("max_boxes and max_depth must be at least 1")
    t0 = time.perf_counter()
    stats = {"grid_points": 0, "random_starts": 0, "boxes_processed": 0, "max_depth": 0,
             "retired": 0, "excluded": 0, "split": 0}

    def done(outcome):
        outcome.stats.update(stats)
        outcome.stats["wall_ms"] = 1e3 * (time.perf_counter() - t0)
        return outcome

    root = region.box
    if len(root) > MAX_CERTIFY_DIM:
        return done(Inconclusive(math.inf, 1, 0, reason="dimension"))
    ctx = BoundContext(system, candidate)
    width = np.where(root[:, 1] > root[:, 0], root[:, 1] - root[:, 0], 1.0)
    threshold = max(epsilon, 1e-9)
    n_x = system.n_x

    def bound(b):
        return box_bound(system, candidate, b, stop_below=epsilon, context=ctx)

    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    counter = itertools.count()
    heap = []
    stuck = []

    def push(b, depth, ub):
        if trace is not None:
            trace.append(("push", b.copy()))
        heapq.heappush(heap, (-ub, next(counter), depth, b))

    try:
        if trace is not None:
            trace.append(("root", root.copy()))
        if _excluded(region, root):
            stats["excluded"] += 1
            if trace is not None:
                trace.append(("exclude", root.copy()))
            return done(Certified(epsilon, 0, 0))
        push(root, 0, bound(root))
        while heap:
            if stats["boxes_processed"] >= max_boxes:
                worst = max([-heap[0][0]] + [s[0] for s in stuck])
                return done(Inconclusive(worst, len(heap) + len(stuck), stats["boxes_processed"]))
            neg_ub, _, depth, b = heapq.heappop(heap)
            ub = -neg_ub
            stats["boxes_processed"] += 1
            stats["max_depth"] = max(stats["max_depth"], depth)
            if ub <= epsilon:
                stats["retired"] += 1
                if trace is not None:
                    trace.append(("retire", b))
                continue
            zm = 0.5 * (b[:, 0] + b[:, 1])
            if region.contains_z(zm):
                x, u = region.split(zm)
                try:
                    res = membership(system, candidate, x, u)
                except (DomainError, NumericalBreakdown):
                    res = None
                if isinstance(res, Outside) and res.witness.alpha_residual > epsilon:
                    if verify_quietly(system, candidate, region, res.witness, threshold):
                        return done(Falsified(witness=res.witness))
            if depth >= max_depth:
                stuck.append((ub, b))
                if trace is not None:
                    trace.append(("stuck", b))
                continue
            j = int(np.argmax((b[:, 1] - b[:, 0]) / width))
            mid = 0.5 * (b[j, 0] + b[j, 1])
            left, right = b.copy(), b.copy()
            left[j, 1] = mid
            right[j, 0] = mid
            stats["split"] += 1
            if trace is not None:
                trace.append(("split", b))
            kids = []
            for c in (left, right):
                if _excluded(region, c):
                    stats["excluded"] += 1
                    if trace is not None:
                        trace.append(("exclude", c))
                else:
                    kids.append(c)
            bounds = list(pool.map(bound, kids)) if pool else [bound(c) for c in kids]
            for c, cb in zip(kids, bounds):
                push(c, depth + 1, cb)
    finally:
        if pool is not None:
            pool.shutdown()
    if stuck:
        worst = max(s[0] for s in stuck)
        return done(Inconclusive(worst, len(stuck), stats["boxes_processed"], reason="depth"))
    return done(Certified(epsilon, stats["boxes_processed"], stats["max_depth"]))
