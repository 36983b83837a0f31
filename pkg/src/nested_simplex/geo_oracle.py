"""Brute-force search for explicit nested triangles and tetrahedra.

Works without the quartic: vertices are placed on the sphere of radius R and
the search maximises the smallest face slack, the clearance between a face
plane and the ellipsoid's support in that direction. A simplex whose faces
all have non-negative slack contains the ellipsoid, and such a simplex can be
shrunk onto a circumscribed one, so a non-negative optimum certifies nesting.

Every search is deterministic given its seed. Restart ``k`` draws its start
from ``default_rng([seed, k])`` and the best restart wins with ties going to
the lowest index, so running restarts in any order gives the same answer.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import InvalidInputError, NotContainedError
from .nesting import DEFAULT_TOL, NestingQuery, max_radius, nesting_predicate
from .steering import Ellipsoid

CERTIFY_TOL = 1e-8
UNIT_TOL = 1e-12
# slivers below this (relative to R^3, or R^2 for triangles) are rejected:
# flat tetrahedra approach zero slack around planar ellipses
DEGENERATE_VOLUME = 1e-6
DEFAULT_RESTARTS = 64
DEFAULT_ITERATIONS = 60
DEFAULT_GRID = 24
DEFAULT_POLISH = 4
PLANAR_TOL = 1e-10


@dataclass(frozen=True)
class SimplexCandidate:
    """Vertices on the sphere plus the slack of every face (edge, for triangles)."""

    vertices: np.ndarray
    face_slacks: np.ndarray
    min_slack: float
    big_radius: float

    @property
    def kind(self) -> str:
        return "tetrahedron" if len(self.vertices) == 4 else "triangle"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "R": self.big_radius,
            "vertices": self.vertices.tolist(),
            "face_slacks": self.face_slacks.tolist(),
            "min_slack": self.min_slack,
        }


@dataclass(frozen=True)
class OracleResult:
    found: bool
    witness: SimplexCandidate | None
    restarts_used: int
    best_min_slack: float
    certify_tol: float = CERTIFY_TOL


@dataclass(frozen=True)
class AgreementEntry:
    index: int
    quartic: float
    predicate: bool
    oracle: bool | None
    best_min_slack: float
    excluded: bool

    @property
    def agree(self) -> bool:
        return self.excluded or self.predicate == self.oracle


@dataclass
class AgreementReport:
    entries: list[AgreementEntry] = field(default_factory=list)
    queries: list[NestingQuery] = field(default_factory=list)

    @property
    def checked(self) -> list[AgreementEntry]:
        return [e for e in self.entries if not e.excluded]

    @property
    def disagreements(self) -> list[tuple[AgreementEntry, NestingQuery]]:
        return [(e, self.queries[e.index]) for e in self.entries if not e.agree]

    @property
    def agreement_rate(self) -> float:
        checked = self.checked
        if not checked:
            return 1.0
        return sum(e.agree for e in checked) / len(checked)


def support_slack(face_normal, face_offset: float, e: Ellipsoid) -> float:
    """b - (n.c + |A^T n|); non-negative iff e lies in the half-space n.x <= b."""
    n = np.asarray(face_normal, dtype=float)
    if abs(float(np.linalg.norm(n)) - 1.0) > UNIT_TOL:
        raise InvalidInputError("face normal must be a unit vector")
    reach = math.sqrt(max(float(n @ e.q @ n), 0.0))
    return float(face_offset - (n @ e.c + reach))


# -- tetrahedra ---------------------------------------------------------------

# face f spans vertices (P, J, K)[f] and is opposite vertex f
_FACE_P = [1, 0, 0, 0]
_FACE_J = [2, 2, 1, 1]
_FACE_K = [3, 3, 3, 2]
_FACE_OPP = [0, 1, 2, 3]


def angles_to_points(angles: np.ndarray, R: float) -> np.ndarray:
    """(..., 2k) polar/azimuth pairs -> (..., k, 3) points on the sphere of radius R."""
    a = np.asarray(angles, dtype=float)
    theta = a[..., 0::2]
    phi = a[..., 1::2]
    st = np.sin(theta)
    return R * np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def points_to_angles(points: np.ndarray) -> np.ndarray:
    p = np.asarray(points, dtype=float)
    r = np.linalg.norm(p, axis=-1)
    theta = np.arccos(np.clip(p[..., 2] / r, -1.0, 1.0))
    phi = np.arctan2(p[..., 1], p[..., 0])
    out = np.empty(p.shape[:-1] + (2,))
    out[..., 0] = theta
    out[..., 1] = phi
    return out.reshape(p.shape[:-2] + (-1,))


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a0, a1, a2 = a[..., 0], a[..., 1], a[..., 2]
    b0, b1, b2 = b[..., 0], b[..., 1], b[..., 2]
    return np.stack([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0], axis=-1)


def tetrahedron_slacks(vertices: np.ndarray, q: np.ndarray, c: np.ndarray, R: float) -> np.ndarray:
    """Face slacks of a batch of tetrahedra, shape (..., 4).

    Face f is the one opposite vertex f. Normals point away from that
    vertex, which is the same side as the centroid for any non-degenerate
    tetrahedron. Near-flat candidates get slack -inf.
    """
    v = np.asarray(vertices, dtype=float)
    p = v[..., _FACE_P, :]
    n = _cross(v[..., _FACE_J, :] - p, v[..., _FACE_K, :] - p)
    opp = v[..., _FACE_OPP, :]
    # |n_f . (v_f - p_f)| is six times the volume for every face
    side = np.sum(n * (opp - p), axis=-1)
    volume = np.abs(side[..., 0]) / 6
    norm = np.sqrt(np.sum(n * n, axis=-1))
    with np.errstate(divide="ignore", invalid="ignore"):
        n = n * (-np.sign(side) / norm)[..., None]
        offset = np.sum(n * p, axis=-1)
        reach = np.sqrt(np.clip(np.sum((n @ q) * n, axis=-1), 0.0, None))
        out = offset - (n @ c + reach)
    bad = ~(volume >= DEGENERATE_VOLUME * R**3) | ~np.all(np.isfinite(out), axis=-1)
    out[bad] = -np.inf
    return out


def regular_tetrahedron(R: float, axis=None, flip: bool = False) -> np.ndarray:
    """Regular tetrahedron inscribed in the sphere with one vertex along ``axis``."""
    base = np.array(
        [
            [0.0, 0.0, 1.0],
            [math.sqrt(8 / 9), 0.0, -1 / 3],
            [-math.sqrt(2 / 9), math.sqrt(2 / 3), -1 / 3],
            [-math.sqrt(2 / 9), -math.sqrt(2 / 3), -1 / 3],
        ]
    )
    if flip:
        base = -base
    return R * (base @ _frame(axis).T)


def _frame(axis) -> np.ndarray:
    """Rotation taking the z axis onto ``axis`` (identity for None or zero)."""
    if axis is None:
        return np.eye(3)
    z = np.asarray(axis, dtype=float)
    nz = np.linalg.norm(z)
    if nz < 1e-14:
        return np.eye(3)
    z = z / nz
    helper = np.array([1.0, 0.0, 0.0]) if abs(z[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    x = np.cross(helper, z)
    x /= np.linalg.norm(x)
    y = np.cross(z, x)
    return np.stack([x, y, z], axis=1)


def _tetra_start(seed: int, k: int, restarts: int, R: float) -> np.ndarray:
    """Start for restart k: a randomly rotated regular tetrahedron, jittered.

    The first vertex is drawn from the k-th of ``restarts`` equal-area bands
    so the starts cover the sphere evenly.
    """
    rng = np.random.default_rng([seed, k])
    lo = -1 + 2 * k / restarts
    z = rng.uniform(lo, lo + 2 / restarts)
    phi = rng.uniform(0, 2 * math.pi)
    s = math.sqrt(max(0.0, 1 - z * z))
    axis = np.array([s * math.cos(phi), s * math.sin(phi), z])
    spin = rng.uniform(0, 2 * math.pi)
    frame = _frame(axis)
    rot_z = np.array([[math.cos(spin), -math.sin(spin), 0], [math.sin(spin), math.cos(spin), 0], [0, 0, 1]])
    pts = regular_tetrahedron(1.0) @ (frame @ rot_z).T
    pts = pts + 0.15 * rng.standard_normal(pts.shape)
    pts = R * pts / np.linalg.norm(pts, axis=1, keepdims=True)
    return points_to_angles(pts)


def _coordinate_descent(objective, x: np.ndarray, step: float, iterations: int, min_step: float = 1e-9):
    """Batched coordinate ascent on ``objective`` with a per-candidate shrinking step.

    ``objective`` maps (K, m) parameters to (K,) values. Each candidate tries
    +-step along every coordinate in turn and halves its step after a sweep
    with no improvement.
    """
    x = x.copy()
    K, m = x.shape
    val = objective(x)
    steps = np.full(K, step)
    for _ in range(iterations):
        improved = np.zeros(K, dtype=bool)
        for j in range(m):
            for sgn in (1.0, -1.0):
                trial = x.copy()
                trial[:, j] += sgn * steps
                tv = objective(trial)
                better = tv > val
                x[better] = trial[better]
                val[better] = tv[better]
                improved |= better
        steps = np.where(improved, steps, steps * 0.5)
        if np.all(steps < min_step):
            break
    return x, val


def _epigraph_polish(slacks, x0: np.ndarray, maxiter: int = 100) -> np.ndarray:
    """Maximise t subject to slacks(x) >= t with SLSQP; returns the polished x.

    The max-min objective has kinks wherever two faces tie, which stalls
    coordinate moves; the epigraph form turns it into a smooth program.
    ``slacks`` must accept a batch of parameter vectors, which lets the
    constraint Jacobian come from one vectorised central-difference call.
    """
    s0 = slacks(x0)
    if not np.all(np.isfinite(s0)):
        return x0
    m = len(x0)
    h = 1e-7
    probe = np.concatenate([np.eye(m) * h, -np.eye(m) * h])
    z0 = np.append(x0, s0.min())

    def cons(z):
        s = slacks(z[:-1])
        return np.where(np.isfinite(s), s, -1e3) - z[-1]

    def cons_jac(z):
        s = slacks(z[:-1] + probe)
        s = np.where(np.isfinite(s), s, -1e3)
        grad = (s[:m] - s[m:]).T / (2 * h)
        return np.hstack([grad, -np.ones((grad.shape[0], 1))])

    res = minimize(
        lambda z: -z[-1],
        z0,
        jac=lambda z: np.concatenate([np.zeros(m), [-1.0]]),
        constraints=[{"type": "ineq", "fun": cons, "jac": cons_jac}],
        method="SLSQP",
        options={"maxiter": maxiter, "ftol": 1e-13},
    )
    x = res.x[:-1]
    return x if slacks(x).min() > s0.min() else x0


def _candidate(vertices: np.ndarray, slacks: np.ndarray, R: float) -> SimplexCandidate:
    return SimplexCandidate(
        vertices=np.asarray(vertices, dtype=float),
        face_slacks=np.asarray(slacks, dtype=float),
        min_slack=float(np.min(slacks)),
        big_radius=R,
    )


def _require_contained(e: Ellipsoid, R: float, tol: float) -> None:
    if R <= 0 or not math.isfinite(R):
        raise InvalidInputError("R must be positive")
    mr = max_radius(e)
    if mr > R + tol:
        raise NotContainedError(mr, R)


def search_tetrahedron_3d(
    e: Ellipsoid,
    R: float,
    restarts: int = DEFAULT_RESTARTS,
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = 0,
    certify_tol: float = CERTIFY_TOL,
    polish: int = DEFAULT_POLISH,
    tol: float = DEFAULT_TOL,
) -> OracleResult:
    """Look for a tetrahedron inscribed in the sphere of radius R that contains ``e``.

    Starts: the regular tetrahedron with a vertex pointing along the centre
    offset and away from it, then ``restarts`` jittered random orientations.
    All starts go through batched coordinate descent; the best ``polish`` of
    them are then refined as an epigraph program.
    """
    _require_contained(e, R, tol)
    q, c = e.q, e.c

    def batch_objective(x):
        return tetrahedron_slacks(angles_to_points(x, R), q, c, R).min(axis=-1)

    def slacks_of(x):
        return tetrahedron_slacks(angles_to_points(x, R), q, c, R)

    axis = c if np.linalg.norm(c) > 1e-14 else None
    fixed = [points_to_angles(regular_tetrahedron(R, axis, flip)) for flip in (False, True)]
    random_starts = [_tetra_start(seed, k, max(restarts, 1), R) for k in range(restarts)]
    starts = np.array(fixed + random_starts)

    # the symmetric starts are scored as-is first so exact boundary cases
    # (regular tetrahedron about a concentric sphere) are certified untouched
    raw = slacks_of(starts)
    x, val = _coordinate_descent(batch_objective, starts, 0.1, iterations)
    keep = raw.min(axis=-1) >= val
    x[keep] = starts[keep]
    val[keep] = raw.min(axis=-1)[keep]

    order = np.argsort(-val, kind="stable")
    for idx in order[: max(polish, 0)]:
        if not np.isfinite(val[idx]):
            continue
        xp = _epigraph_polish(slacks_of, x[idx])
        vp = float(slacks_of(xp).min())
        if vp > val[idx]:
            x[idx], val[idx] = xp, vp
    best = int(np.argmax(val))  # first index among ties
    verts = angles_to_points(x[best], R)
    s = slacks_of(x[best])
    cand = _candidate(verts, s, R)
    found = cand.min_slack >= -certify_tol
    return OracleResult(
        found=found,
        witness=cand if found else None,
        restarts_used=len(starts),
        best_min_slack=cand.min_slack,
        certify_tol=certify_tol,
    )


# -- triangles ----------------------------------------------------------------


def triangle_slacks(theta: np.ndarray, q2: np.ndarray, c2: np.ndarray, R: float) -> np.ndarray:
    """Edge slacks, shape (..., 3), of triangles with vertex angles ``theta`` on a circle.

    ``q2`` and ``c2`` describe the ellipse in the circle's plane (2x2 and length 2).
    """
    t = np.asarray(theta, dtype=float)
    v = R * np.stack([np.cos(t), np.sin(t)], axis=-1)
    out = np.empty(t.shape[:-1] + (3,))
    e1 = v[..., 1, :] - v[..., 0, :]
    e2 = v[..., 2, :] - v[..., 0, :]
    area = 0.5 * np.abs(e1[..., 0] * e2[..., 1] - e1[..., 1] * e2[..., 0])
    for f, (i, j, opp) in enumerate(((1, 2, 0), (0, 2, 1), (0, 1, 2))):
        p = v[..., i, :]
        edge = v[..., j, :] - p
        n = np.stack([edge[..., 1], -edge[..., 0]], axis=-1)
        norm = np.linalg.norm(n, axis=-1, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            n = n / norm
        side = np.einsum("...i,...i->...", n, v[..., opp, :] - p)
        n = np.where((side > 0)[..., None], -n, n)
        offset = np.einsum("...i,...i->...", n, p)
        reach = np.sqrt(np.clip(np.einsum("...i,ij,...j->...", n, q2, n), 0.0, None))
        out[..., f] = offset - (n @ c2 + reach)
    bad = ~(area >= DEGENERATE_VOLUME * R**2) | ~np.all(np.isfinite(out), axis=-1)
    out[bad] = -np.inf
    return out


def _search_triangle_plane(
    q2: np.ndarray, c2: np.ndarray, rho: float, restarts: int, iterations: int, seed: int, grid: int
):
    """Best triangle on the circle of radius ``rho``; returns (angles, slacks, starts)."""

    def objective(x):
        return triangle_slacks(x, q2, c2, rho).min(axis=-1)

    base = math.atan2(c2[1], c2[0]) if np.linalg.norm(c2) > 1e-14 else 0.0
    equilateral = [base + np.array([0.0, 2 * math.pi / 3, 4 * math.pi / 3]) + off for off in (0.0, math.pi)]

    # grid of unordered vertex triples i < j < k, the symmetry-reduced grid^3
    g = np.arange(grid) * (2 * math.pi / grid)
    combos = np.array(list(itertools.combinations(range(grid), 3)))
    grid_pts = g[combos]
    grid_val = objective(grid_pts)

    fixed = np.array(equilateral)
    fixed_val = objective(fixed)
    order = np.argsort(-grid_val, kind="stable")[:restarts]
    rng = np.random.default_rng(seed)
    jitter = rng.uniform(-0.25, 0.25, (len(order), 3)) * (2 * math.pi / grid)
    starts = np.concatenate([fixed, grid_pts[order] + jitter])

    x, val = _coordinate_descent(objective, starts, math.pi / grid, iterations)
    raw = objective(starts)
    keep = raw >= val
    x[keep] = starts[keep]
    val[keep] = raw[keep]
    val[: len(fixed)] = np.maximum(val[: len(fixed)], fixed_val)

    def slacks_of(t):
        return triangle_slacks(t, q2, c2, rho)

    order = np.argsort(-val, kind="stable")
    for idx in order[:DEFAULT_POLISH]:
        if not np.isfinite(val[idx]):
            continue
        xp = _epigraph_polish(slacks_of, x[idx])
        vp = float(slacks_of(xp).min())
        if vp > val[idx]:
            x[idx], val[idx] = xp, vp
    best = int(np.argmax(val))
    return x[best], slacks_of(x[best]), len(starts)


def search_triangle_2d(
    e: Ellipsoid,
    R: float,
    restarts: int = 16,
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = 0,
    certify_tol: float = CERTIFY_TOL,
    grid: int = DEFAULT_GRID,
    tol: float = DEFAULT_TOL,
) -> OracleResult:
    """Triangle inscribed in the circle of radius R (xy-plane) containing a planar ellipse.

    ``e`` must lie in the xy-plane: no z extent and a centre with z = 0.
    The search scores every vertex triple of a ``grid``-point circle, then
    polishes the ``restarts`` best triples and the two equilateral
    triangles aligned with the centre offset.
    """
    if np.max(np.abs(e.q[2])) > PLANAR_TOL or abs(e.c[2]) > PLANAR_TOL:
        raise InvalidInputError("ellipse must lie in the xy-plane")
    _require_contained(e, R, tol)
    q2 = e.q[:2, :2]
    c2 = e.c[:2]
    theta, slacks, used = _search_triangle_plane(q2, c2, R, restarts, iterations, seed, grid)
    verts = np.zeros((3, 3))
    verts[:, 0] = R * np.cos(theta)
    verts[:, 1] = R * np.sin(theta)
    cand = _candidate(verts, slacks, R)
    found = cand.min_slack >= -certify_tol
    return OracleResult(found, cand if found else None, used, cand.min_slack, certify_tol)


def ellipse_plane(e: Ellipsoid) -> tuple[np.ndarray, float]:
    """Unit normal m and offset h >= 0 of a plane m.x = h containing the flat ``e``.

    For a flat ellipse the plane is unique. A segment or a point lies in
    many planes; the one through the origin is used, which gives the largest
    circle of vertices.
    """
    if not e.degenerate:
        raise InvalidInputError("ellipsoid is not flat")
    v = e.eig().eigenvectors
    rank = e.rank
    if rank == 2:
        m = v[:, 2]
    elif rank == 1:
        m = np.cross(v[:, 0], e.c)
        m = _perp(v[:, 0]) if np.linalg.norm(m) < 1e-14 else m / np.linalg.norm(m)
    else:
        m = _perp(e.c) if np.linalg.norm(e.c) > 1e-14 else np.array([0.0, 0.0, 1.0])
    h = float(m @ e.c)
    if h < 0:
        m, h = -m, -h
    return m, h


def _perp(r: np.ndarray) -> np.ndarray:
    helper = np.array([1.0, 0.0, 0.0]) if abs(r[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    p = np.cross(r, helper)
    return p / np.linalg.norm(p)


def search_triangle_3d(
    e: Ellipsoid,
    R: float,
    restarts: int = 16,
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = 0,
    certify_tol: float = CERTIFY_TOL,
    grid: int = DEFAULT_GRID,
    tol: float = DEFAULT_TOL,
) -> OracleResult:
    """Triangle with vertices on the sphere of radius R containing a flat ellipsoid.

    A triangle can only contain a flat ellipse if it lies in the ellipse's
    plane, so the vertices live on the circle where that plane cuts the
    sphere and the search runs in plane coordinates.
    """
    _require_contained(e, R, tol)
    m, h = ellipse_plane(e)
    rho2 = R * R - h * h
    if rho2 <= 0:
        return OracleResult(False, None, 0, -math.inf, certify_tol)
    rho = math.sqrt(rho2)
    b1 = _perp(m)
    b2 = np.cross(m, b1)
    basis = np.stack([b1, b2], axis=1)
    centre = h * m
    q2 = basis.T @ e.q @ basis
    c2 = basis.T @ (e.c - centre)
    theta, slacks, used = _search_triangle_plane(q2, c2, rho, restarts, iterations, seed, grid)
    pts2 = rho * np.stack([np.cos(theta), np.sin(theta)], axis=1)
    verts = centre + pts2 @ basis.T
    cand = _candidate(verts, slacks, R)
    found = cand.min_slack >= -certify_tol
    return OracleResult(found, cand if found else None, used, cand.min_slack, certify_tol)


def search_nested(query: NestingQuery, seed: int = 0, restarts: int | None = None, **kwargs) -> OracleResult:
    """Dimension-appropriate search: triangles for flat ellipsoids, tetrahedra otherwise."""
    e, R = query.ellipsoid, query.big_radius
    if e.degenerate:
        return search_triangle_3d(e, R, seed=seed, **({"restarts": restarts} if restarts else {}), **kwargs)
    return search_tetrahedron_3d(e, R, seed=seed, **({"restarts": restarts} if restarts else {}), **kwargs)


def verify_predicate_against_oracle(
    batch: list[NestingQuery],
    margin: float = 1e-3,
    seed: int = 0,
    restarts: int | None = None,
    tol: float = DEFAULT_TOL,
) -> AgreementReport:
    """Compare the quartic verdict with the oracle for every query outside the margin band.

    Raises NotContainedError naming the first uncontained query before any
    search runs.
    """
    reports = []
    for i, query in enumerate(batch):
        try:
            reports.append(nesting_predicate(query, tol))
        except NotContainedError as exc:
            raise NotContainedError(exc.max_radius, exc.big_radius, label=f"query {i}") from None
    out = AgreementReport(queries=list(batch))
    for i, (query, rep) in enumerate(zip(batch, reports)):
        if abs(rep.quartic) < margin:
            out.entries.append(AgreementEntry(i, rep.quartic, rep.nested_exists, None, math.nan, True))
            continue
        res = search_nested(query, seed=seed + i, restarts=restarts)
        out.entries.append(
            AgreementEntry(i, rep.quartic, rep.nested_exists, res.found, res.best_min_slack, False)
        )
    return out
