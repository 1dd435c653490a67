import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chgeom.errors import AmbientNotEuclidean, DegenerateLink, MeshError, NotConvex
from chgeom.spaces import Euclidean, Hyperbolic
from chgeom.surfaces import (TriSurface, bumpy_sphere, curvature_report, flatness_scan,
                             gauss_map_area, icosphere, klein_ellipsoid, mixed_areas,
                             parallel_surface, product_strip, read_mesh, shape_operator,
                             sphere_surface, torus_surface, vertex_curvature, write_mesh)

E3, H3 = Euclidean(3), Hyperbolic(3)
FOUR_PI = 4 * np.pi


# -- frozen oracles ---------------------------------------------------------------

@pytest.mark.parametrize("level, nv, nf", [(0, 12, 20), (2, 162, 320), (3, 642, 1280)])
def test_icosphere_counts(level, nv, nf):
    U, F = icosphere(level)
    assert (len(U), len(F)) == (nv, nf)
    assert np.allclose(np.linalg.norm(U, axis=1), 1.0)


@pytest.mark.parametrize("level, expected", [(2, 12.329848595234669), (3, 12.506492733969928)])
def test_unit_sphere_total_curvature(level, expected):
    S = sphere_surface(E3, 1.0, level)
    rep = curvature_report(E3, S)
    assert rep.total_abs == pytest.approx(expected, rel=1e-10)
    assert rep.total_abs == rep.total_signed == rep.total_positive
    assert S.euler_characteristic == 2


def test_shape_operator_of_round_sphere():
    S = sphere_surface(E3, 2.0, 3)
    Sop, gk = shape_operator(E3, S, 5)
    assert np.allclose(Sop, 0.5 * np.eye(2), atol=1e-12)
    assert gk == pytest.approx(0.25, abs=1e-12)


def test_hyperbolic_sphere_curvature_and_gauss_bonnet():
    r = 0.7
    rep = curvature_report(H3, sphere_surface(H3, r, 3))
    assert rep.total_abs == pytest.approx(FOUR_PI * np.cosh(r) ** 2, rel=1e-2)
    assert rep.area == pytest.approx(FOUR_PI * np.sinh(r) ** 2, rel=1e-2)
    assert rep.gauss_bonnet == pytest.approx(FOUR_PI, rel=1e-2)
    assert rep.total_abs == pytest.approx(19.68194637190794, rel=1e-10)


def test_parallel_sphere_grows_radius():
    S = sphere_surface(H3, 0.7, 3)
    P = parallel_surface(H3, S, 0.3)
    assert np.allclose(H3.distance(np.zeros(3), P.vertices), 1.0, atol=1e-9)
    assert curvature_report(H3, P).total_abs == pytest.approx(FOUR_PI * np.cosh(1.0) ** 2, rel=1e-2)


def test_torus_tightness():
    T = torus_surface(2.0, 1.0, 60, 60)
    rep = curvature_report(E3, T)
    assert T.genus == 1 and T.euler_characteristic == 0
    assert rep.total_abs == pytest.approx(8 * np.pi, rel=2e-2)
    assert abs(rep.total_signed) <= 2e-2 * 8 * np.pi
    assert rep.total_positive == pytest.approx(FOUR_PI, rel=2e-2)


def test_product_strip_is_flat():
    P = product_strip("geodesic", 2.0, 1.0, 20, 20)
    assert flatness_scan(P.space, P.to_trisurface()) <= 1e-12


# -- errors -------------------------------------------------------------------------------

def test_open_mesh_rejected_when_closed():
    U, F = icosphere(1)
    with pytest.raises(MeshError):
        TriSurface(E3, U, F[1:], U)


def test_genus_mismatch_rejected():
    U, F = icosphere(1)
    with pytest.raises(MeshError):
        TriSurface(E3, U, F, U, genus=1)


def test_flipped_triangle_rejected():
    U, F = icosphere(1)
    F = F.copy()
    F[0] = F[0, ::-1]
    with pytest.raises(MeshError):
        TriSurface(E3, U, F, U)


def test_boundary_vertex_has_no_shape_operator():
    T = product_strip("geodesic", 2.0, 1.0, 10, 10).to_trisurface()
    with pytest.raises(DegenerateLink):
        shape_operator(T.space, T, int(np.flatnonzero(T.boundary_vertices())[0]))


def test_parallel_surface_requires_convexity():
    with pytest.raises(NotConvex):
        parallel_surface(E3, bumpy_sphere(E3, 0.2, level=3), 0.1)


def test_gauss_map_needs_euclidean_ambient():
    with pytest.raises(AmbientNotEuclidean):
        gauss_map_area(sphere_surface(H3, 0.5, 2))


# -- properties -----------------------------------------------------------------------

@settings(max_examples=8, deadline=None)
@given(r=st.floats(0.3, 3.0))
def test_euclidean_sphere_scale_invariance(r):
    rep = curvature_report(E3, sphere_surface(E3, r, 3))
    assert rep.total_abs == pytest.approx(12.506492733969928, rel=1e-9)
    assert rep.area == pytest.approx(FOUR_PI * r * r, rel=1e-2)


@settings(max_examples=6, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_convex_bodies_clear_four_pi(seed):
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    S = klein_ellipsoid(H3, rng.uniform(0.3, 0.7, 3), Q, rng.uniform(-0.1, 0.1, 3), level=4)
    rep = curvature_report(H3, S)
    assert rep.total_abs >= FOUR_PI * (1 - 5e-3)
    assert rep.chain_ok(1e-12)
    assert rep.gauss_bonnet == pytest.approx(FOUR_PI, rel=1e-2)


@settings(max_examples=6, deadline=None)
@given(amp=st.floats(0.0, 0.25))
def test_bumpy_sphere_orderings(amp):
    S = bumpy_sphere(E3, amp, level=3)
    vc = vertex_curvature(E3, S)
    rep = curvature_report(E3, S, vc)
    assert rep.total_abs >= rep.total_positive >= rep.total_signed - 1e-12
    assert np.all(mixed_areas(E3, S) > 0)
    assert np.all(vc.valid)


def test_mesh_roundtrip():
    S = bumpy_sphere(H3, 0.1, level=2)
    back = read_mesh(write_mesh(S))
    assert np.array_equal(back.vertices, S.vertices)
    assert np.array_equal(back.normals, S.normals)
    assert np.array_equal(back.triangles, S.triangles)
    assert back.genus == S.genus


def test_mesh_file_roundtrip(tmp_path):
    S = sphere_surface(E3, 1.0, 1)
    path = tmp_path / "s.mesh"
    write_mesh(S, str(path))
    assert np.array_equal(read_mesh(str(path)).vertices, S.vertices)
