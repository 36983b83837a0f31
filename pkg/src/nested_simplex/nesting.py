"""Existence of a simplex nested between an ellipsoid and a sphere.

An ellipsoid E with shape matrix Q and centre c sits inside the sphere B of
radius R centred at the origin. With d = |c| and d_hat = c / d, a tetrahedron
inscribed in B and circumscribed about E exists iff

    d^4 - 2 u d^2 + q >= 0,
    u = R^2 - tr Q + 2 d_hat^T Q d_hat,
    q = R^4 - 2 R^2 tr Q - 8 R sqrt(det Q) + 2 tr(Q^2) - (tr Q)^2.

When E is flat the tetrahedron can be taken to be a triangle. The
closed-form bounds for circles, spheres and axis-aligned ellipsoids, plus the
Euler and Egan bounds, live here too.
"""

from __future__ import annotations

import math
import sys
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidInputError, NotContainedError
from .steering import RANK_RTOL, Ellipsoid

DEFAULT_TOL = 1e-10
ZERO_CENTRE = 1e-14
DET_CLAMP = 1e-14


@dataclass(frozen=True)
class NestingQuery:
    ellipsoid: Ellipsoid
    big_radius: float

    def __post_init__(self):
        R = float(self.big_radius)
        if not math.isfinite(R) or R <= 0:
            raise InvalidInputError(f"R must be positive, got {self.big_radius!r}")
        object.__setattr__(self, "big_radius", R)


@dataclass(frozen=True)
class NestingReport:
    u: float
    q_coef: float
    skew: float
    quartic: float
    d: float
    contained: bool
    max_radius: float
    nested_exists: bool
    degenerate: bool
    rank: int
    branch: str  # "lower" | "upper" | "no-real-roots"
    lower_root: float  # smallest root in d^2 of the quartic, nan without real roots
    anomaly: bool
    tol: float

    def to_dict(self) -> dict:
        return asdict(self)


def _max_radius(w: np.ndarray, v: np.ndarray, c: np.ndarray) -> float:
    """max |c + A u| over |u| <= 1, in the principal frame of Q = A A^T.

    The maximiser has u_i = g_i / (mu - w_i) with g_i = sqrt(w_i) c_i and mu
    the largest root of sum_i g_i^2 / (mu - w_i)^2 = 1.
    """
    w = [max(x, 0.0) for x in w.tolist()]
    cp = (v.T @ c).tolist()
    wmax = max(w)
    cnorm = math.sqrt(sum(x * x for x in cp))
    if wmax == 0.0:
        return cnorm
    if math.sqrt(wmax) <= 1e-16 * cnorm:
        # below rounding of |c|: the best axis end is exact to working precision
        return max(
            math.sqrt(sum((cj + sgn * math.sqrt(wi) * (j == i)) ** 2 for j, cj in enumerate(cp)))
            for i, wi in enumerate(w)
            for sgn in (1.0, -1.0)
        )
    # the radius is homogeneous of degree one: solve at unit scale
    scale = max(math.sqrt(wmax), cnorm)
    if scale != 1.0:
        w = [x / (scale * scale) for x in w]
        cp = [x / scale for x in cp]
        return scale * _max_radius_unit(w, cp)
    return _max_radius_unit(w, cp)


def _max_radius_unit(w: list[float], cp: list[float]) -> float:
    wmax = max(w)
    a = [math.sqrt(x) for x in w]
    g = [ai * ci for ai, ci in zip(a, cp)]
    top = [x >= wmax * (1 - 1e-12) for x in w]
    gap = [0.0 if t else wmax - x for t, x in zip(top, w)]
    gnorm = math.sqrt(sum(x * x for x in g))
    terms = [(gi, gp) for gi, gp in zip(g, gap) if gi != 0.0]

    def value(u):
        return sum((ci + ai * ui) ** 2 for ci, ai, ui in zip(cp, a, u))

    def secular(t):
        total = -1.0
        for gi, gp in terms:
            ratio = gi / (t + gp)
            total += ratio * ratio
        return total

    hi = gnorm
    lo = max(hi * 1e-300, sys.float_info.min)

    # hard case: no pull along the top axes and the remaining terms cannot
    # reach the constraint, so mu sits exactly on the top eigenvalue
    no_pull = all(abs(gi) <= 1e-15 for gi, t in zip(g, top) if t)
    if no_pull or secular(lo) < 0:
        u_rest = [0.0 if t else gi / gp for gi, gp, t in zip(g, gap, top)]
        used = sum(x * x for x in u_rest)
        if used <= 1.0:
            return math.sqrt(value(u_rest) + wmax * (1.0 - used))

    if secular(hi) >= 0.0:
        # the bound t <= |g| is attained (all weight on the top axes)
        t = hi
    else:
        try:
            t = brentq(secular, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=400)
        except (ValueError, RuntimeError):
            t = _golden_root(secular, lo, hi)
    return math.sqrt(value([gi / (t + gp) for gi, gp in zip(g, gap)]))


def _golden_root(f, lo: float, hi: float, iters: int = 200) -> float:
    """Golden-section search for the zero of a monotone f, in log t."""
    a, b = math.log(lo), math.log(hi)
    ratio = (math.sqrt(5) - 1) / 2
    x1 = b - ratio * (b - a)
    x2 = a + ratio * (b - a)
    f1, f2 = abs(f(math.exp(x1))), abs(f(math.exp(x2)))
    for _ in range(iters):
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - ratio * (b - a)
            f1 = abs(f(math.exp(x1)))
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + ratio * (b - a)
            f2 = abs(f(math.exp(x2)))
    return math.exp(0.5 * (a + b))


def max_radius(e: Ellipsoid) -> float:
    """Largest distance from the origin to a point of ``e``."""
    es = e.eig()
    return _max_radius(es.eigenvalues, es.eigenvectors, e.c)


def quartic_coefficients(Q, c, R: float, eigenvalues=None) -> tuple[float, float, float]:
    """Return (u, q, skew); skew is 0 for a centre at the origin."""
    Q = np.asarray(Q, dtype=float)
    c = np.asarray(c, dtype=float)
    w = list(np.linalg.eigvalsh(Q) if eigenvalues is None else eigenvalues)
    d2 = float(c @ c)
    d = math.sqrt(d2)
    skew = 0.0 if d <= ZERO_CENTRE else float(c @ Q @ c) / d2
    tr = sum(w)
    tr2 = sum(x * x for x in w)
    det = w[0] * w[1] * w[2]
    if det < 0:
        scale = max(1.0, max(abs(x) for x in w)) ** 3
        if det < -DET_CLAMP * scale:
            raise InvalidInputError(f"shape matrix is not PSD (det = {det:.3g})")
        det = 0.0
    u = R * R - tr + 2 * skew
    q = R**4 - 2 * R * R * tr - 8 * R * math.sqrt(det) + 2 * tr2 - tr * tr
    return u, q, skew


def nesting_predicate(query: NestingQuery, tol: float = DEFAULT_TOL) -> NestingReport:
    """Decide whether a simplex nests between ``query.ellipsoid`` and the sphere.

    Raises NotContainedError if the ellipsoid reaches beyond R + tol, since
    the quartic carries no meaning there.
    """
    e = query.ellipsoid
    R = query.big_radius
    es = e.eig()
    w, v = es.eigenvalues, es.eigenvectors
    mr = _max_radius(w, v, e.c)
    if mr > R + tol:
        raise NotContainedError(mr, R)
    wl = w.tolist()
    u, q, skew = quartic_coefficients(e.q, e.c, R, wl)
    d = math.sqrt(float(e.c @ e.c))
    d2 = d * d
    quartic = d2 * d2 - 2 * u * d2 + q
    disc = u * u - q
    if disc < 0:
        branch = "no-real-roots"
        lower = math.nan
    else:
        branch = "lower" if d2 <= u else "upper"
        lower = u - math.sqrt(disc)
    top = max(wl[0], 0.0)
    rank = 0 if top == 0 else sum(x > RANK_RTOL * top for x in wl)
    nested = quartic >= -tol
    return NestingReport(
        u=u,
        q_coef=q,
        skew=skew,
        quartic=quartic,
        d=d,
        contained=True,
        max_radius=mr,
        nested_exists=nested,
        degenerate=rank <= 2,
        rank=rank,
        branch=branch,
        lower_root=lower,
        anomaly=nested and branch == "upper",
        tol=tol,
    )


def _check_radii(R: float, r: float) -> None:
    if not (math.isfinite(R) and math.isfinite(r)) or R <= 0 or r < 0:
        raise InvalidInputError(f"need R > 0 and r >= 0, got R={R!r}, r={r!r}")


def circle_condition(R: float, r: float) -> float:
    """Largest d^2 admitting a triangle between circles of radii r < R.

    A negative value means no nested triangle exists at any d.
    """
    _check_radii(R, r)
    return R * (R - 2 * r)


def sphere_condition(R: float, r: float) -> float:
    """Largest d^2 admitting a tetrahedron between spheres of radii r < R."""
    _check_radii(R, r)
    return (R + r) * (R - 3 * r)


def aligned_ellipsoid_condition(R: float, s1: float, s2: float, s3: float) -> float:
    """Largest d^2 for an ellipsoid whose s1 axis points along the centre offset."""
    if not all(math.isfinite(x) for x in (R, s1, s2, s3)) or R <= 0 or min(s1, s2, s3) < 0:
        raise InvalidInputError("need R > 0 and non-negative semiaxes")
    return (R - s1) ** 2 - (s2 + s3) ** 2


def euler_min_R(n: int, r: float) -> float:
    """Smallest circumradius of an n-simplex with inradius r (n = 2 or 3)."""
    if n not in (2, 3):
        raise InvalidInputError("Euler bound is provided for n = 2 and n = 3")
    if r < 0:
        raise InvalidInputError("r must be non-negative")
    return n * r


def egan_bound(n: int, R: float, r: float) -> float:
    """(R + (n - 2) r)(R - n r), the conjectured n-simplex bound on d^2.

    Known to be sufficient; necessity is open for n >= 4, and nothing in this
    package checks it beyond n = 3.
    """
    if int(n) != n or n < 2:
        raise InvalidInputError("n must be an integer >= 2")
    _check_radii(R, r)
    return (R + (n - 2) * r) * (R - n * r)
