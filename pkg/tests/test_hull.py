import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chgeom.curves import triangle_angles
from chgeom.errors import DegenerateInput, InteriorPoint, UnsupportedSpace
from chgeom.hull import (BOUNDARY_TOL, _near_boundary, certify_convex, convex_hull,
                         hull_boundary_curvature, kleiner_chain, orient3d,
                         tangent_cone_aperture)
from chgeom.spaces import Euclidean, Hyperbolic, ProductH2R
from chgeom.surfaces import bumpy_sphere, klein_ellipsoid, sphere_surface

E3, H3 = Euclidean(3), Hyperbolic(3)
FOUR_PI = 4 * np.pi
TETRA = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1.0]])
CUBE = np.array(list(itertools.product((0, 1), repeat=3)), float)


# -- frozen oracles ---------------------------------------------------------------

def test_euclidean_polytope_curvature_is_four_pi():
    assert hull_boundary_curvature(E3, convex_hull(E3, TETRA)) == pytest.approx(FOUR_PI, abs=1e-12)


def test_hyperbolic_tetrahedron_curvature():
    G = hull_boundary_curvature(H3, convex_hull(H3, TETRA))
    # 4 pi plus the hyperbolic area of the four geodesic faces
    area = sum(np.pi - sum(triangle_angles(H3, *TETRA[list(f)]))
               for f in itertools.combinations(range(4), 3))
    assert G == pytest.approx(FOUR_PI + area, rel=1e-12)
    assert G == pytest.approx(14.20426798460754, rel=1e-12)


@pytest.mark.parametrize("space, scale", [(E3, 1.0), (H3, 0.5)])
@pytest.mark.parametrize("point, expected", [
    ([0, 0, 0], np.pi / 2),        # cube corner: normals pairwise orthogonal
    ([0.5, 0, 0], np.pi / 2),      # edge midpoint
    ([0.5, 0.5, 0], np.pi),        # face centre: flat tangent cone
])
def test_tangent_cone_aperture_on_cube(space, scale, point, expected):
    h = convex_hull(space, scale * CUBE)
    assert tangent_cone_aperture(space, h, scale * np.array(point, float)) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("a, b, c, d, sign", [
    ([0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], 1),
    ([0, 0, 0], [0, 1, 0], [1, 0, 0], [0, 0, 1], -1),
    ([0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0], 0),
    # coplanar in exact arithmetic though not in naive floating point
    ([0.1, 0.2, 0.3], [1e8 + 0.1, 0.2, 0.3], [0.1, 1e8 + 0.2, 0.3], [3.1, 7.2, 0.3], 0),
])
def test_orient3d(a, b, c, d, sign):
    assert orient3d(a, b, c, d) == sign


# -- errors -------------------------------------------------------------------------------

def test_too_few_points():
    with pytest.raises(DegenerateInput):
        convex_hull(E3, TETRA[:3])


def test_coplanar_points():
    P = np.random.default_rng(0).normal(size=(20, 3))
    P[:, 2] = 0
    with pytest.raises(DegenerateInput):
        convex_hull(E3, P)


def test_product_space_unsupported():
    with pytest.raises(UnsupportedSpace):
        convex_hull(ProductH2R(), CUBE)


def test_aperture_interior_and_exterior():
    h = convex_hull(E3, CUBE)
    with pytest.raises(InteriorPoint):
        tangent_cone_aperture(E3, h, [0.5, 0.5, 0.5])
    with pytest.raises(ValueError):
        tangent_cone_aperture(E3, h, [2.0, 0.5, 0.5])


# -- properties -----------------------------------------------------------------------

@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(4, 200))
def test_euclidean_hull_curvature_is_four_pi(seed, n):
    P = np.random.default_rng(seed).normal(size=(n, 3))
    assert hull_boundary_curvature(E3, convex_hull(E3, P)) == pytest.approx(FOUR_PI, abs=1e-9)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(4, 100))
def test_hyperbolic_hull_curvature_exceeds_four_pi(seed, n):
    P = np.random.default_rng(seed).normal(scale=0.7, size=(n, 3))
    h = convex_hull(H3, P)
    assert hull_boundary_curvature(H3, h) > FOUR_PI
    assert np.all(h.contains(P, slack=1e-9))


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_near_boundary_matches_dense_scan(seed):
    rng = np.random.default_rng(seed)
    P = rng.normal(size=(300, 3))
    P[:50] /= np.linalg.norm(P[:50], axis=1, keepdims=True) * 0.5  # some deep, some on top
    h = convex_hull(E3, P)
    tol = BOUNDARY_TOL * h.diameter
    dense = h.signed_depth(h.coords) >= -tol
    dense[h.vertices] = True
    assert np.array_equal(_near_boundary(h, tol), dense)


def test_convexity_certificate():
    assert certify_convex(H3, sphere_surface(H3, 0.8, 3))[0]
    ok, viol = certify_convex(E3, bumpy_sphere(E3, 0.2, level=3))
    assert not ok and viol > 1e-3


@pytest.mark.parametrize("surface", [
    sphere_surface(E3, 1.0, 4),
    sphere_surface(H3, 0.8, 4),
    bumpy_sphere(E3, 0.2, level=4),
    klein_ellipsoid(H3, [0.4, 0.5, 0.6], level=5),
], ids=["sphere_E3", "sphere_H3", "bumpy_E3", "ellipsoid_H3"])
def test_kleiner_chain(surface):
    rec = kleiner_chain(surface.space, surface)
    assert rec.passed
    assert rec.hull_curvature >= FOUR_PI - rec.slack
