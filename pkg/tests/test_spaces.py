import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chgeom.errors import DegeneratePlane
from chgeom.spaces import (Euclidean, Hyperbolic, Klein, ProductH2R, SphereFixture,
                           christoffel_fd, distance, exp_map, geodesic, integrate_geodesic,
                           log_map, make_space, normal_coordinate_metric, riemann_fd,
                           sectional_curvature)

TAGS = ["euclidean", "hyperboloid", "klein", "product_h2_r", "sphere_fixture"]
coord = st.floats(-0.6, 0.6)
vec3 = st.tuples(coord, coord, coord).map(np.array)


# -- frozen oracles ---------------------------------------------------------------

@pytest.mark.parametrize("space, p, q, expected", [
    (Hyperbolic(2), [0.0, 0.0], [np.sinh(1.0), 0.0], 1.0),
    (Hyperbolic(3), [0.2, -0.1, 0.5], [-1.0, 0.3, 0.2], 1.188913092540464),
    (Klein(3), [0.0, 0.0, 0.0], [np.tanh(1.0), 0.0, 0.0], 1.0),
    (ProductH2R(), [0.0, 0.0, 0.0], [np.sinh(3.0), 0.0, 4.0], 5.0),
    (SphereFixture(2), [0.0, 0.0], [1.0, 0.0], np.pi / 2),
    (Euclidean(3), [1.0, 2.0, 2.0], [0.0, 0.0, 0.0], 3.0),
])
def test_distance_oracles(space, p, q, expected):
    assert distance(space, p, q) == pytest.approx(expected, rel=1e-13, abs=1e-13)


@pytest.mark.parametrize("space, u, v, expected", [
    (Euclidean(3), [1, 0, 0], [0, 1, 0], 0.0),
    (Hyperbolic(3), [1, 0, 0], [0, 1, 0], -1.0),
    (Klein(3), [1, 0, 0], [0, 1, 1], -1.0),
    (ProductH2R(), [1, 0, 0], [0, 1, 0], -1.0),
    (ProductH2R(), [1, 0, 0], [0, 0, 1], 0.0),
    (SphereFixture(3), [1, 0, 0], [0, 1, 0], 1.0),
])
def test_sectional_curvature_oracles(space, u, v, expected):
    p = np.zeros(space.dim)
    K = sectional_curvature(space, p, np.array(u, float), np.array(v, float))
    assert K == pytest.approx(expected, abs=1e-12)


def test_hyperboloid_lift_is_on_hyperboloid():
    y = np.array([0.3, -1.2, 2.0])
    X = Hyperbolic.lift(y)
    assert -X[0] ** 2 + X[1:] @ X[1:] == pytest.approx(-1.0, abs=1e-12)


def test_klein_and_hyperboloid_charts_agree():
    H = Hyperbolic(3)
    rng = np.random.default_rng(3)
    y1, y2 = rng.normal(size=3), rng.normal(size=3)
    K = Klein(3)
    assert K.distance(H.to_klein(y1), H.to_klein(y2)) == pytest.approx(H.distance(y1, y2), rel=1e-12)


def test_cartan_hadamard_flags():
    assert all(make_space(t).is_cartan_hadamard for t in TAGS[:4])
    assert not make_space("sphere_fixture").is_cartan_hadamard


def test_make_space_rejects_unknown():
    with pytest.raises(ValueError):
        make_space("torus")


def test_degenerate_plane_raises():
    with pytest.raises(DegeneratePlane):
        sectional_curvature(Hyperbolic(3), np.zeros(3), np.array([1.0, 0, 0]), np.array([2.0, 0, 0]))


# -- properties ----------------------------------------------------------------------

@pytest.mark.parametrize("tag", TAGS)
@settings(max_examples=25, deadline=None)
@given(p=vec3, q=vec3)
def test_exp_log_roundtrip(tag, p, q):
    sp = make_space(tag)
    assert np.allclose(exp_map(sp, p, log_map(sp, p, q)), q, atol=1e-9)
    assert sp.norm(p, log_map(sp, p, q)) == pytest.approx(distance(sp, p, q), abs=1e-10)


@pytest.mark.parametrize("tag", TAGS)
@settings(max_examples=20, deadline=None)
@given(p=vec3, q=vec3, r=vec3)
def test_distance_is_a_metric(tag, p, q, r):
    sp = make_space(tag)
    d = lambda a, b: distance(sp, a, b)  # noqa: E731
    assert d(p, q) == pytest.approx(d(q, p), abs=1e-12)
    assert d(p, r) <= d(p, q) + d(q, r) + 1e-10


@pytest.mark.parametrize("tag", TAGS)
@settings(max_examples=10, deadline=None)
@given(x=vec3)
def test_closed_forms_match_finite_differences(tag, x):
    sp = make_space(tag)
    assert np.allclose(sp.christoffel(x), christoffel_fd(sp, x), atol=1e-6)
    assert np.allclose(sp.riemann(x), riemann_fd(sp, x), atol=1e-5)


@pytest.mark.parametrize("tag", TAGS[:4])
@settings(max_examples=15, deadline=None)
@given(x=vec3, u=vec3, v=vec3)
def test_nonpositive_sectional_curvature(tag, x, u, v):
    sp = make_space(tag)
    try:
        K = sectional_curvature(sp, x, u, v)
    except DegeneratePlane:
        return
    assert K <= 1e-10


@pytest.mark.parametrize("tag", TAGS)
def test_ode_geodesic_matches_closed_form(tag):
    sp = make_space(tag)
    rng = np.random.default_rng(11)
    x, y = sp.random_point(rng, 0.4), sp.random_point(rng, 0.4)
    _, P, _ = integrate_geodesic(sp, x, log_map(sp, x, y), 1.0)
    assert np.allclose(P[-1], y, atol=1e-7)


@pytest.mark.parametrize("tag", TAGS)
def test_sampled_geodesic_is_unit_speed(tag):
    sp = make_space(tag)
    x, y = np.array([0.1, 0.2, -0.3]), np.array([-0.4, 0.1, 0.5])
    g = geodesic(sp, x, y, 33)
    assert g.length == pytest.approx(distance(sp, x, y), rel=1e-12)
    assert np.allclose(g.speeds(sp), 1.0, atol=1e-10)


def test_normal_coordinates_fourth_order():
    sp = Hyperbolic(3)
    o = np.array([0.2, -0.1, 0.3])
    d = np.array([1.0, 2.0, -2.0]) / 3
    rs = np.geomspace(1e-3, 1e-1, 6)
    res = []
    for r in rs:
        g, _, R = normal_coordinate_metric(sp, o, r * d)
        x = r * d
        res.append(np.max(np.abs(g - np.eye(3) + np.einsum("kijl,k,l->ij", R, x, x) / 3)))
    slope = np.polyfit(np.log(rs), np.log(res), 1)[0]
    assert slope > 3.5
