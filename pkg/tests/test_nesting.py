import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from nested_simplex.errors import InvalidInputError, NotContainedError
from nested_simplex.nesting import (
    NestingQuery,
    aligned_ellipsoid_condition,
    circle_condition,
    egan_bound,
    euler_min_R,
    max_radius,
    nesting_predicate,
    sphere_condition,
)
from nested_simplex.steering import Ellipsoid, ellipsoid_from_params
from nested_simplex.two_qubit import assemble_canonical, separability

from conftest import random_rotation, random_valid_canonical


def _brute_max_radius(e: Ellipsoid, rng, n=400_000):
    u = rng.standard_normal((n, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return np.linalg.norm(e.c + u @ e.sqrt_shape().T, axis=1).max()


# -- max_radius ----------------------------------------------------------------


def test_max_radius_examples():
    assert max_radius(Ellipsoid.from_semiaxes([0.1, 0.5, 0.2])) == pytest.approx(0.5, abs=1e-12)
    assert max_radius(Ellipsoid.sphere(0.2, [0.3, 0.4, 0])) == pytest.approx(0.7, abs=1e-12)
    e = Ellipsoid(q=np.diag([0.09, 0.04, 0.01]), c=[0.5, 0, 0])
    assert max_radius(e) == pytest.approx(0.8, abs=1e-10)


def test_max_radius_hard_case():
    # offset along a short axis: the far point is off-axis, on the long axis side
    e = Ellipsoid(q=np.diag([0.01, 0.25, 0.0]), c=[0.1, 0, 0])
    # maximise (0.1 + 0.1 cos t)^2 + 0.25 sin^2 t  ->  cos t = 0.1 * 0.1 / (0.25 - 0.01)
    ct = 0.01 / 0.24
    expected = math.sqrt((0.1 + 0.1 * ct) ** 2 + 0.25 * (1 - ct * ct))
    assert max_radius(e) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("scale", [1e-12, 1e-8, 1e-3, 1.0, 1e4])
def test_max_radius_tiny_and_huge_scales(scale):
    # offset along the only nonzero axis: the far point is the axis end
    e = Ellipsoid.from_semiaxes([0.0, scale, 0.0], c=[0.0, scale, 0.0])
    assert max_radius(e) == pytest.approx(2 * scale, rel=1e-12)
    e = Ellipsoid(q=scale**2 * np.diag([0.09, 0.04, 0.01]), c=[0.5 * scale, 0, 0])
    assert max_radius(e) == pytest.approx(0.8 * scale, rel=1e-10)


def test_max_radius_against_sampling(rng):
    for _ in range(40):
        s = rng.uniform(0, 0.5, 3) * (rng.random(3) > 0.2)
        e = Ellipsoid.from_semiaxes(s, random_rotation(rng), rng.uniform(-0.5, 0.5, 3))
        mr = max_radius(e)
        bf = _brute_max_radius(e, rng)
        # sampling only ever under-shoots the true maximum
        assert bf <= mr + 1e-12
        assert mr - bf < 1e-3


@settings(max_examples=300, deadline=None)
@given(
    st.lists(st.floats(0, 1), min_size=3, max_size=3),
    st.lists(st.floats(-1, 1), min_size=3, max_size=3),
)
def test_max_radius_is_attained_and_bounded(semi, centre):
    e = Ellipsoid.from_semiaxes(semi, c=centre)
    mr = max_radius(e)
    # upper bound |c| + largest semiaxis, lower bound from the axis end points
    assert mr <= np.linalg.norm(centre) + max(semi) + 1e-12
    ends = [np.linalg.norm(np.asarray(centre) + sgn * s * np.eye(3)[i]) for i, s in enumerate(semi) for sgn in (1, -1)]
    assert mr >= max(ends) - 1e-12


# -- predicate -----------------------------------------------------------------


def test_predicate_regular_tetrahedron_boundary():
    rep = nesting_predicate(NestingQuery(Ellipsoid.sphere(1 / 3), 1.0))
    assert abs(rep.quartic) <= 1e-12
    assert rep.nested_exists and not rep.degenerate


def test_predicate_pancake():
    rep = nesting_predicate(NestingQuery(Ellipsoid(q=np.diag([1.0, 1.0, 0.0]), c=np.zeros(3)), 1.0))
    assert rep.q_coef == pytest.approx(-3.0, abs=1e-12)
    assert not rep.nested_exists
    assert rep.degenerate and rep.rank == 2


def test_predicate_aligned_example():
    rep = nesting_predicate(NestingQuery(Ellipsoid(q=np.diag([0.09, 0.04, 0.01]), c=[0.5, 0, 0]), 1.0))
    assert rep.nested_exists
    assert rep.lower_root == pytest.approx(0.40, abs=1e-12)
    assert rep.branch == "lower"


def test_predicate_not_contained():
    with pytest.raises(NotContainedError):
        nesting_predicate(NestingQuery(Ellipsoid.sphere(0.5, [0.6, 0, 0]), 1.0))
    with pytest.raises(InvalidInputError):
        NestingQuery(Ellipsoid.sphere(0.1), -1.0)


def test_predicate_tangent_is_contained():
    rep = nesting_predicate(NestingQuery(Ellipsoid.sphere(0.5, [0.5, 0, 0]), 1.0))
    assert rep.contained and not rep.nested_exists


def test_predicate_zero_centre_skew():
    rep = nesting_predicate(NestingQuery(Ellipsoid(q=np.diag([0.09, 0.04, 0.01]), c=np.zeros(3)), 1.0))
    assert rep.skew == 0.0
    assert rep.quartic == pytest.approx(rep.q_coef, abs=0)


def test_point_ellipsoid_always_nests():
    for d in (0.0, 0.3, 0.9, 0.999):
        rep = nesting_predicate(NestingQuery(Ellipsoid(q=np.zeros((3, 3)), c=[d, 0, 0]), 1.0))
        assert rep.nested_exists


def test_quartic_consistent_with_coefficients(rng):
    for _ in range(200):
        e = Ellipsoid.from_semiaxes(rng.uniform(0, 0.3, 3), random_rotation(rng), rng.uniform(-0.4, 0.4, 3))
        rep = nesting_predicate(NestingQuery(e, 1.0))
        d2 = rep.d**2
        direct = d2 * d2 - 2 * rep.u * d2 + rep.q_coef
        assert rep.quartic == pytest.approx(direct, rel=1e-12, abs=1e-15)
        assert not rep.anomaly


def test_sphere_factorisation(rng):
    for _ in range(500):
        R = rng.uniform(0.1, 5)
        r = rng.uniform(0, R)
        d = rng.uniform(0, R - r)
        rep = nesting_predicate(NestingQuery(Ellipsoid.sphere(r, d * np.array([0.6, 0.0, 0.8])), R))
        expected = (d - R - r) * (d + R + r) * (d * d - (R + r) * (R - 3 * r))
        assert rep.quartic == pytest.approx(expected, rel=1e-10, abs=1e-12 * R**4)


def test_aligned_factorisation(rng):
    for _ in range(500):
        R = rng.uniform(0.1, 5)
        s1, s2, s3 = rng.uniform(0, R / 2, 3)
        d = rng.uniform(0, R)
        e = Ellipsoid(q=np.diag([s1**2, s2**2, s3**2]), c=[d, 0, 0])
        try:
            rep = nesting_predicate(NestingQuery(e, R))
        except NotContainedError:
            continue
        expected = (d * d - R * R - s1**2 + s2**2 + s3**2) ** 2 - (2 * R * s1 + 2 * s2 * s3) ** 2
        assert rep.quartic == pytest.approx(expected, rel=1e-10, abs=1e-12 * R**4)


def test_rotation_invariance(rng):
    for _ in range(300):
        e = Ellipsoid.from_semiaxes(rng.uniform(0, 0.3, 3), random_rotation(rng), rng.uniform(-0.4, 0.4, 3))
        rot = random_rotation(rng)
        a = nesting_predicate(NestingQuery(e, 1.0))
        b = nesting_predicate(NestingQuery(Ellipsoid(rot @ e.q @ rot.T, rot @ e.c), 1.0))
        assert a.nested_exists == b.nested_exists
        assert a.quartic == pytest.approx(b.quartic, abs=1e-12)


def test_scaling_covariance(rng):
    for _ in range(300):
        e = Ellipsoid.from_semiaxes(rng.uniform(0, 0.3, 3), random_rotation(rng), rng.uniform(-0.4, 0.4, 3))
        lam = rng.uniform(0.1, 10)
        a = nesting_predicate(NestingQuery(e, 1.0))
        b = nesting_predicate(NestingQuery(Ellipsoid(lam**2 * e.q, lam * e.c), lam))
        assert a.nested_exists == b.nested_exists
        assert b.quartic == pytest.approx(lam**4 * a.quartic, rel=1e-9, abs=1e-12 * lam**4)


def test_in_plane_skew_is_constant(rng):
    r = 0.3
    for _ in range(50):
        phi = rng.uniform(0, 2 * np.pi)
        d = rng.uniform(0.01, 0.7)
        rep = nesting_predicate(NestingQuery(Ellipsoid(np.diag([r * r, r * r, 0]), d * np.array([np.cos(phi), np.sin(phi), 0])), 1.0))
        assert rep.skew == pytest.approx(r * r, abs=1e-15)
        assert rep.u == pytest.approx(1.0, abs=1e-15)
        assert rep.q_coef == pytest.approx(1 - 4 * r * r, abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 0.5), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_sphere_monotone_in_d(r, f1, f2):
    R = 1.0
    assume(r < R)
    d1, d2 = sorted([f1 * (R - r), f2 * (R - r)])
    hi = nesting_predicate(NestingQuery(Ellipsoid.sphere(r, [d2, 0, 0]), R))
    lo = nesting_predicate(NestingQuery(Ellipsoid.sphere(r, [d1, 0, 0]), R))
    if hi.nested_exists:
        assert lo.nested_exists


def test_separability_equivalence_sample(rng):
    for _ in range(300):
        params = random_valid_canonical(rng)
        verdict = separability(assemble_canonical(params))
        if abs(verdict.det_pt) <= 1e-9:
            continue
        rep = nesting_predicate(NestingQuery(ellipsoid_from_params(params), 1.0))
        assert verdict.separable == rep.nested_exists


def test_reference_states_through_predicate():
    from nested_simplex.two_qubit import CanonicalParams

    sep = nesting_predicate(NestingQuery(ellipsoid_from_params(CanonicalParams(np.zeros(3), np.diag([0.5, 0.5, 0]))), 1.0))
    ent = nesting_predicate(NestingQuery(ellipsoid_from_params(CanonicalParams(np.zeros(3), np.diag([1.0, 1.0, -1.0]))), 1.0))
    assert sep.nested_exists and abs(sep.quartic) <= 1e-12
    assert not ent.nested_exists


# -- closed forms --------------------------------------------------------------


def test_circle_condition():
    assert circle_condition(1, 0.5) == 0
    assert circle_condition(1, 0.3) == pytest.approx(0.4)
    assert circle_condition(1, 0.6) == pytest.approx(-0.2)
    with pytest.raises(InvalidInputError):
        circle_condition(1, -0.1)
    with pytest.raises(InvalidInputError):
        circle_condition(0, 0.1)


def test_sphere_condition():
    assert sphere_condition(1, 1 / 3) == pytest.approx(0, abs=1e-15)
    assert sphere_condition(1, 0.2) == pytest.approx(0.48)
    assert sphere_condition(2, 0.5) == pytest.approx(1.25)
    assert sphere_condition(2, 0.5) == pytest.approx(4 * sphere_condition(1, 0.25))


def test_aligned_condition():
    for r in (0.0, 0.1, 0.2, 1 / 3):
        assert aligned_ellipsoid_condition(1, r, r, r) == pytest.approx(sphere_condition(1, r))
    assert aligned_ellipsoid_condition(1, 0.3, 0.2, 0.1) == pytest.approx(0.40)
    assert aligned_ellipsoid_condition(1.7, 0, 0, 0) == pytest.approx(1.7**2)
    with pytest.raises(InvalidInputError):
        aligned_ellipsoid_condition(1, -0.1, 0, 0)


def test_euler_and_egan():
    assert euler_min_R(2, 1) == 2
    assert euler_min_R(3, 0) == 0
    assert euler_min_R(3, 1 / 3) == pytest.approx(1)
    for R, r in ((1, 0.1), (2.5, 0.4), (1, 0.5)):
        assert egan_bound(2, R, r) == pytest.approx(circle_condition(R, r))
        assert egan_bound(3, R, r) == pytest.approx(sphere_condition(R, r))
    assert egan_bound(4, 1, 0.1) == pytest.approx(0.72)
    with pytest.raises(InvalidInputError):
        egan_bound(1, 1, 0.1)
