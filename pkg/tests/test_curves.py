import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chgeom.curves import (chord_curvature_fit, cumulative_curvature, curvature_profile,
                           euclidean_circle, frenet_curve, geodesic_curvature,
                           hyperbolic_circle, indicatrix, total_curvature, two_point_defect,
                           uniform_chord_bound_check)
from chgeom.errors import BoundaryParameter, RadiusTooLarge
from chgeom.sampled import SampledCurve
from chgeom.spaces import Euclidean, Hyperbolic

E2, E3, H2, H3 = Euclidean(2), Euclidean(3), Hyperbolic(2), Hyperbolic(3)


# -- frozen oracles ---------------------------------------------------------------

@pytest.mark.parametrize("space, curve, expected, tol", [
    (E2, euclidean_circle(1.0, 2001), 2 * np.pi, 1e-9),
    (E2, euclidean_circle(1.0, 2001, turns=2), 4 * np.pi, 1e-9),
    (H2, hyperbolic_circle(1.0, 4001), 9.695461572464488, 1e-9),  # 2 pi cosh 1
    (E3, frenet_curve(E3, lambda s: 2.0, lambda s: 0.5, length=3.0, m=3001), 6.0, 1e-6),
    (H2, frenet_curve(H2, lambda s: 0.0, length=2.0, m=201), 0.0, 1e-12),
])
def test_total_curvature_oracles(space, curve, expected, tol):
    assert total_curvature(space, curve) == pytest.approx(expected, abs=tol)


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_hyperbolic_circle_curvature_is_coth(r):
    c = hyperbolic_circle(r, 4001)
    assert geodesic_curvature(H2, c, c.length / 3) == pytest.approx(1 / np.tanh(r), rel=1e-6)
    _, kap = curvature_profile(H2, c)
    assert np.allclose(kap, 1 / np.tanh(r), rtol=1e-5)


def test_chord_fit_hyperbolic_circle():
    c = hyperbolic_circle(1.0, 4001)
    khat = chord_curvature_fit(H2, c, c.length / 2)
    assert khat == pytest.approx(1.3130352854993315, rel=2e-2)
    assert khat == pytest.approx(1.3128822925065868, rel=1e-9)  # frozen estimate


def test_two_point_orthogonal_case():
    e = 0.1
    meas, pred = two_point_defect(H3, np.zeros(3), np.array([e, 0, 0]), np.array([0, e, 0]))
    # right-angled hyperbolic triangle: cosh d = cosh^2 e
    assert meas == pytest.approx(np.arccosh(np.cosh(e) ** 2) ** 2 - 2 * e * e, rel=1e-9)
    assert pred == pytest.approx(3.3333e-5, rel=1e-4)
    assert meas == pytest.approx(pred, rel=0.05)


def test_two_point_residual_is_fourth_order():
    rhos = np.geomspace(0.01, 0.2, 8)
    res = [abs(np.subtract(*two_point_defect(H3, np.zeros(3), np.array([r / 2, 0, 0]),
                                              np.array([0, r / 2, 0]), radius=1.0)))
           for r in rhos]
    assert np.polyfit(np.log(rhos), np.log(res), 1)[0] >= 4.5


def test_uniform_chord_bound_on_circle():
    C, h0, viol = uniform_chord_bound_check(H2, hyperbolic_circle(1.0, 4001))
    assert viol == 0
    assert C == pytest.approx(0.5686862834755425, rel=1e-9)
    assert h0 > 0


# -- errors -------------------------------------------------------------------------------

def test_two_point_radius_guard():
    with pytest.raises(RadiusTooLarge):
        two_point_defect(H3, np.zeros(3), np.array([0.4, 0, 0]), np.array([0, 0.4, 0]))


def test_chord_fit_boundary_guard():
    c = hyperbolic_circle(1.0, 2001)
    with pytest.raises(BoundaryParameter):
        chord_curvature_fit(H2, c, 1e-3)


# -- properties -----------------------------------------------------------------------

@settings(max_examples=20, deadline=None)
@given(k=st.floats(0.1, 3.0), L=st.floats(0.2, 3.0))
def test_constant_curvature_arcs(k, L):
    c = frenet_curve(E2, lambda s: k, length=L, m=801)
    assert total_curvature(E2, c) == pytest.approx(k * L, rel=1e-6)
    assert geodesic_curvature(E2, c, L / 2) == pytest.approx(k, rel=1e-5)


@settings(max_examples=15, deadline=None)
@given(k=st.floats(1.1, 3.0), L=st.floats(0.5, 2.0))
def test_hyperbolic_frenet_arcs(k, L):
    c = frenet_curve(H2, lambda s: k, length=L, m=801)
    assert np.allclose(c.speeds(H2), 1.0, atol=1e-8)
    assert total_curvature(H2, c) == pytest.approx(k * L, rel=1e-6)


def test_cumulative_curvature_is_monotone():
    c = frenet_curve(E3, lambda s: 1 + np.sin(3 * s) ** 2, lambda s: 0.3, length=2.0, m=801)
    tau = cumulative_curvature(E3, c)
    assert tau[0] == 0.0
    assert np.all(np.diff(tau) >= -1e-15)
    assert tau[-1] == pytest.approx(total_curvature(E3, c))
    T = indicatrix(E3, c)
    assert np.allclose(np.linalg.norm(T, axis=-1), 1.0)


@settings(max_examples=10, deadline=None)
@given(r=st.floats(0.2, 1.5))
def test_reparametrization_invariance(r):
    c = hyperbolic_circle(r, 1201)
    rev = c.reversed()
    assert total_curvature(H2, rev) == pytest.approx(total_curvature(H2, c), rel=1e-9)
    fine = c.refined(2)
    assert total_curvature(H2, fine) == pytest.approx(total_curvature(H2, c), rel=1e-6)


def test_sampled_curve_table_roundtrip():
    c = hyperbolic_circle(0.7, 51)
    back = SampledCurve.from_table(c.to_table())
    assert np.array_equal(back.t, c.t) and np.array_equal(back.points, c.points)
    assert np.array_equal(back.velocities, c.velocities)
