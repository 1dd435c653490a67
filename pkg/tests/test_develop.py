import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chgeom import develop as D
from chgeom.errors import GridMismatch, NotFlatOnTangentPlanes
from chgeom.surfaces import product_strip, sphere_patch


@pytest.fixture(scope="module")
def geodesic_strip():
    P = product_strip("geodesic", 2.0, 1.0, 30, 30)
    fr = D.surface_frame(P.space, P)
    return P, fr, D.develop_map(P.space, P, fr)


@pytest.fixture(scope="module")
def circle_strip():
    P = product_strip("circle", 1.0, 1.0, 100, 100)
    fr = D.surface_frame(P.space, P)
    return P, fr, D.develop_map(P.space, P, fr)


# -- frozen oracles ---------------------------------------------------------------

def test_geodesic_strip_develops_to_rectangle(geodesic_strip):
    P, fr, dev = geodesic_strip
    X = dev.points - dev.points[0, 0]
    assert np.linalg.norm(X[-1, 0]) == pytest.approx(2.0, abs=1e-9)
    assert np.linalg.norm(X[0, -1]) == pytest.approx(1.0, abs=1e-9)
    assert np.linalg.norm(X[-1, -1]) == pytest.approx(np.sqrt(5.0), abs=1e-9)
    assert fr.path_defect <= 1e-9 and dev.exactness <= 1e-9
    assert D.cell_circulation(P.space, P, fr) <= 1e-9


def test_circle_strip_is_isometric(circle_strip):
    P, fr, dev = circle_strip
    assert fr.path_defect <= 1e-6
    rep = D.verify_isometry(P.space, P, dev.points)
    assert rep.passed
    assert D.verify_normal_correspondence(P.space, P, fr, dev.points) <= 1e-4


def test_circle_strip_preserves_total_curvature(circle_strip):
    P, fr, dev = circle_strip
    n = P.shape[0]
    ts, ti = D.verify_tau_preservation(P.space, P, dev.points, (np.arange(n), np.zeros(n, int)))
    assert ts == pytest.approx(1 / np.tanh(1.0), rel=1e-3)  # unit arc of a radius-1 circle
    assert ti == pytest.approx(ts, rel=1e-3)


def test_cube_sphere_atlas_is_consistent():
    _, frame_gap, image_gap = D.develop_closed_convex(n=21)
    assert frame_gap <= 1e-12
    assert image_gap <= 5e-3


# -- negative controls and errors ------------------------------------------------

def test_scaled_image_fails_isometry(circle_strip):
    P, _, dev = circle_strip
    rep = D.verify_isometry(P.space, P, 1.01 * dev.points)
    assert not rep.passed
    assert rep.first_form > 1e-2


def test_rotated_frame_column_breaks_normals(circle_strip):
    P, fr, dev = circle_strip
    bent = D.rotate_frame_column(fr, P.shape[1] // 2, 0.01)
    assert D.verify_normal_correspondence(P.space, P, bent, dev.points) > 1e-3


def test_sphere_patch_rejected():
    S = sphere_patch()
    with pytest.raises(NotFlatOnTangentPlanes):
        D.surface_frame(S.space, S)


def test_grid_mismatch(geodesic_strip):
    P, _, dev = geodesic_strip
    with pytest.raises(GridMismatch):
        D.verify_isometry(P.space, P, dev.points[:-1])


# -- properties -----------------------------------------------------------------------

@settings(max_examples=10, deadline=None)
@given(L=st.floats(0.5, 3.0), h=st.floats(0.3, 2.0))
def test_geodesic_strips_develop_isometrically(L, h):
    P = product_strip("geodesic", L, h, 16, 16)
    fr = D.surface_frame(P.space, P)
    X = D.develop_map(P.space, P, fr).points
    assert np.linalg.norm(X[-1, -1] - X[0, 0]) == pytest.approx(np.hypot(L, h), rel=1e-7)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 20))
def test_random_grid_paths_stay_on_grid(seed, n):
    shape = (12, 9)
    paths = D.random_grid_paths(shape, n, np.random.default_rng(seed))
    assert len(paths) == n
    for ii, jj in paths:
        assert np.all((0 <= ii) & (ii < shape[0]) & (0 <= jj) & (jj < shape[1]))
        assert np.all(np.abs(np.diff(ii)) + np.abs(np.diff(jj)) == 1)


def test_rotating_the_whole_frame_is_harmless(geodesic_strip):
    P, fr, _ = geodesic_strip
    F0 = fr.frames[0, 0][[1, 0, 2]]
    fr2 = D.surface_frame(P.space, P, F0=F0)
    X = D.develop_map(P.space, P, fr2).points
    assert D.verify_isometry(P.space, P, X).passed
