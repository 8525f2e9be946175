"""Outward-rounded interval arithmetic.

Scalar intervals (:class:`Interval`) back the expression enclosures; the
``i*`` functions at the bottom work on pairs of numpy arrays ``(lo, hi)`` and
are used for the small interval linear algebra in the certifier.

Rounding is handled by widening every result outward by one unit in the last
place instead of switching the FPU rounding mode. Correctly rounded IEEE
operations are off by at most half an ulp, so one ulp is enough for
``+ - * /`` and ``sqrt``. libm transcendentals carry no such guarantee and get
two ulps.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

_INF = math.inf
_EPS = 2.0**-53
_TINY = 2.0**-1074
_TRANSCENDENTAL_ULPS = 2


def _down(x: float, n: int = 1) -> float:
    for _ in range(n):
        x = math.nextafter(x, -_INF)
    return x


def _up(x: float, n: int = 1) -> float:
    for _ in range(n):
        x = math.nextafter(x, _INF)
    return x


class Interval:
    """Closed interval ``[lo, hi]`` of doubles."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: float, hi: float | None = None):
        lo = float(lo)
        hi = lo if hi is None else float(hi)
        if not lo <= hi:
            raise ValueError(f"empty or NaN interval [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    @classmethod
    def point(cls, x: float) -> "Interval":
        """Degenerate interval widened by one ulp on each side."""
        return cls(_down(x), _up(x))

    @classmethod
    def _make(cls, lo: float, hi: float, ulps: int = 1) -> "Interval":
        lo, hi = _down(lo, ulps), _up(hi, ulps)
        if math.isnan(lo) or math.isnan(hi):
            raise DomainError("interval evaluation produced NaN")
        obj = cls.__new__(cls)
        obj.lo, obj.hi = lo, hi
        return obj

    # inspection

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def rad(self) -> float:
        return 0.5 * (self.hi - self.lo)

    def mag(self) -> float:
        return max(abs(self.lo), abs(self.hi))

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def __contains__(self, x) -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.contains(x)

    def __iter__(self):
        yield self.lo
        yield self.hi

    def __repr__(self) -> str:
        return f"Interval({self.lo!r}, {self.hi!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Interval):
            return NotImplemented
        return self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        return hash((self.lo, self.hi))

    # arithmetic

    def __neg__(self) -> "Interval":
        obj = Interval.__new__(Interval)
        obj.lo, obj.hi = -self.hi, -self.lo
        return obj

    def __add__(self, other) -> "Interval":
        other = _coerce(other)
        return Interval._make(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __sub__(self, other) -> "Interval":
        other = _coerce(other)
        return Interval._make(self.lo - other.hi, self.hi - other.lo)

    def __rsub__(self, other) -> "Interval":
        return _coerce(other) - self

    def __mul__(self, other) -> "Interval":
        other = _coerce(other)
        p = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        # 0 * inf cannot occur for finite inputs
        return Interval._make(min(p), max(p))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Interval":
        other = _coerce(other)
        if other.lo <= 0.0 <= other.hi:
            raise DomainError("division by an interval containing zero")
        p = (self.lo / other.lo, self.lo / other.hi, self.hi / other.lo, self.hi / other.hi)
        return Interval._make(min(p), max(p))

    def __rtruediv__(self, other) -> "Interval":
        return _coerce(other) / self

    def ipow(self, n: int) -> "Interval":
        """Integer power, exact in sign structure (even powers are nonnegative)."""
        if n == 0:
            return Interval(1.0)
        if n < 0:
            return Interval(1.0) / self.ipow(-n)
        if n == 1:
            return self
        if self.lo >= 0.0:
            return _pos_pow(self.lo, self.hi, n)
        if self.hi <= 0.0:
            r = _pos_pow(-self.hi, -self.lo, n)
            return r if n % 2 == 0 else -r
        if n % 2 == 0:
            r = _pos_pow(0.0, max(-self.lo, self.hi), n)
            return Interval(0.0, r.hi)
        neg = _pos_pow(0.0, -self.lo, n)
        pos = _pos_pow(0.0, self.hi, n)
        return Interval(-neg.hi, pos.hi)


def _pos_pow(a: float, b: float, n: int) -> Interval:
    lo, hi = a, b
    base_lo, base_hi = a, b
    for _ in range(n - 1):
        lo = max(_down(lo * base_lo), 0.0)
        hi = _up(hi * base_hi)
    return Interval(lo, hi)


def _coerce(x) -> Interval:
    if isinstance(x, Interval):
        return x
    x = float(x)
    obj = Interval.__new__(Interval)
    obj.lo = obj.hi = x
    return obj


# elementary functions

def exp(x: Interval) -> Interval:
    try:
        return Interval._make(math.exp(x.lo), math.exp(x.hi), _TRANSCENDENTAL_ULPS)
    except OverflowError as exc:
        raise DomainError("exp overflow") from exc


def ln(x: Interval) -> Interval:
    if x.lo <= 0.0:
        raise DomainError("ln of an interval reaching zero or below")
    return Interval._make(math.log(x.lo), math.log(x.hi), _TRANSCENDENTAL_ULPS)


def sqrt(x: Interval) -> Interval:
    if x.lo < 0.0:
        raise DomainError("sqrt of an interval reaching below zero")
    return Interval(max(_down(math.sqrt(x.lo)), 0.0), _up(math.sqrt(x.hi)))


def tanh(x: Interval) -> Interval:
    lo = max(_down(math.tanh(x.lo), _TRANSCENDENTAL_ULPS), -1.0)
    hi = min(_up(math.tanh(x.hi), _TRANSCENDENTAL_ULPS), 1.0)
    return Interval(lo, hi)


def fabs(x: Interval) -> Interval:
    if x.lo >= 0.0:
        return x
    if x.hi <= 0.0:
        return -x
    return Interval(0.0, max(-x.lo, x.hi))


def _contains_phase(lo: float, hi: float, phase: float) -> bool:
    """True if some ``phase + 2*pi*k`` may lie in [lo, hi] (errs towards True)."""
    two_pi = 2.0 * math.pi
    k = math.floor((lo - phase) / two_pi)
    slack = 1e-15 * (1.0 + abs(lo) + abs(hi))
    for kk in (k - 1, k, k + 1, k + 2):
        c = phase + two_pi * kk
        if lo - slack <= c <= hi + slack:
            return True
    return False


def sin(x: Interval) -> Interval:
    if x.width >= 2.0 * math.pi:
        return Interval(-1.0, 1.0)
    a, b = math.sin(x.lo), math.sin(x.hi)
    lo = _down(min(a, b), _TRANSCENDENTAL_ULPS)
    hi = _up(max(a, b), _TRANSCENDENTAL_ULPS)
    if _contains_phase(x.lo, x.hi, 0.5 * math.pi):
        hi = 1.0
    if _contains_phase(x.lo, x.hi, -0.5 * math.pi):
        lo = -1.0
    return Interval(max(lo, -1.0), min(hi, 1.0))


def cos(x: Interval) -> Interval:
    if x.width >= 2.0 * math.pi:
        return Interval(-1.0, 1.0)
    a, b = math.cos(x.lo), math.cos(x.hi)
    lo = _down(min(a, b), _TRANSCENDENTAL_ULPS)
    hi = _up(max(a, b), _TRANSCENDENTAL_ULPS)
    if _contains_phase(x.lo, x.hi, 0.0):
        hi = 1.0
    if _contains_phase(x.lo, x.hi, math.pi):
        lo = -1.0
    return Interval(max(lo, -1.0), min(hi, 1.0))


# ---------------------------------------------------------------------------
# array intervals: pairs (lo, hi) of float arrays

def iwiden(lo, hi):
    return np.nextafter(lo, -np.inf), np.nextafter(hi, np.inf)


def ipoint(x):
    x = np.asarray(x, dtype=float)
    return iwiden(x, x)


def iadd(a, b):
    return iwiden(a[0] + b[0], a[1] + b[1])


def isub(a, b):
    return iwiden(a[0] - b[1], a[1] - b[0])


def iscale(c, a):
    """Point scalar/array ``c`` times interval array ``a`` (elementwise)."""
    c = np.asarray(c, dtype=float)
    p, q = c * a[0], c * a[1]
    return iwiden(np.minimum(p, q), np.maximum(p, q))


def _sum_products(plo, phi):
    """Sum interval products over the last axis with an a-priori rounding bound."""
    n = plo.shape[-1]
    lo = plo.sum(axis=-1)
    hi = phi.sum(axis=-1)
    err = (n + 1) * _EPS * np.maximum(np.abs(plo), np.abs(phi)).sum(axis=-1) + _TINY
    return iwiden(lo - err, hi + err)


def imatvec(A, x):
    """Interval matrix (or point matrix) times interval vector.

    ``A`` is either a float array of shape (..., m, n) or an interval pair of
    such arrays; ``x`` is an interval pair of shape (n,) or (..., n).
    """
    xlo, xhi = (np.asarray(v, dtype=float)[..., None, :] for v in x)
    if isinstance(A, tuple):
        alo, ahi = A
        p = np.stack([alo * xlo, alo * xhi, ahi * xlo, ahi * xhi])
        return _sum_products(p.min(axis=0), p.max(axis=0))
    A = np.asarray(A, dtype=float)
    p, q = A * xlo, A * xhi
    return _sum_products(np.minimum(p, q), np.maximum(p, q))


def imatmat(A, B):
    """Interval matrix product ``A @ B`` where either side may be a point matrix."""
    if not isinstance(A, tuple):
        A = (np.asarray(A, float), np.asarray(A, float))
    if not isinstance(B, tuple):
        B = (np.asarray(B, float), np.asarray(B, float))
    alo, ahi = (v[..., :, :, None] for v in A)
    blo, bhi = (v[..., None, :, :] for v in B)
    p = np.stack(np.broadcast_arrays(alo * blo, alo * bhi, ahi * blo, ahi * bhi))
    plo = np.moveaxis(p.min(axis=0), -2, -1)
    phi = np.moveaxis(p.max(axis=0), -2, -1)
    return _sum_products(plo, phi)


def imag(a):
    return np.maximum(np.abs(a[0]), np.abs(a[1]))


def norm_upper(mag) -> float:
    """Upper bound on the Euclidean norm of any vector with ``|v| <= mag``."""
    mag = np.asarray(mag, dtype=float)
    return float(math.sqrt(float(np.dot(mag, mag))) * (1.0 + 8 * _EPS * (mag.size + 2)) + _TINY)
