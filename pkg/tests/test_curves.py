import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pfaffgeo.curves import (
    CurveFrame,
    CurveOnSurface,
    arc_length,
    direction_sum_check,
    dnu_checks,
    great_circle,
    plane_circle,
    plane_line,
    polynomial_curve,
    rho_matrix,
    rho_matrix_direct,
    torus_outer_equator,
    vertical_curvature,
)
from pfaffgeo.errors import DegeneracyError, DomainError, GeometryError
from pfaffgeo.surface import catalog, sample_points


def _rotation(n, rng):
    Q, R = np.linalg.qr(rng.normal(size=(n, n)))
    return Q * np.sign(np.diag(R))


def test_plane_line_is_straight():
    P = catalog("hyperplane", [3])
    c = plane_line(P)
    for t in (-0.5, 0.0, 0.7):
        assert vertical_curvature(c, t) == (0.0, 0.0)
        np.testing.assert_allclose(rho_matrix(c, t=t), 0.0, atol=1e-14)
        np.testing.assert_allclose(rho_matrix(c, CurveFrame("surface"), t), 0.0, atol=1e-14)


def test_plane_circle_geodesic_curvature():
    P = catalog("hyperplane", [3])
    c = plane_circle(P, radius=0.5)
    for t in np.linspace(0, 2 * np.pi, 9):
        rho = rho_matrix(c, t=t)
        assert np.linalg.norm(rho[0]) == pytest.approx(2.0, abs=1e-10)
        np.testing.assert_allclose(rho, rho_matrix_direct(c, t=t), atol=1e-12)
        assert vertical_curvature(c, t)[0] == 0.0
    assert arc_length(c, 2 * np.pi) == pytest.approx(np.pi, rel=1e-12)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_great_circle_unit_curvature(n):
    c = great_circle(catalog("hypersphere", [n]))
    for t in np.linspace(c.t0, c.t1, 5):
        quad, direct = vertical_curvature(c, t)
        assert abs(quad) == pytest.approx(1.0, abs=1e-10)
        assert quad == pytest.approx(direct, abs=1e-10)
        rho = rho_matrix(c, t=t)
        # a great circle has no geodesic curvature
        np.testing.assert_allclose(rho[0, : n - 1], 0.0, atol=1e-10)


def test_torus_outer_equator_normal_curvature():
    R, r = 2.0, 0.5
    c = torus_outer_equator(catalog("torus3", [R, r]))
    for t in np.linspace(c.t0, c.t1, 5):
        quad, direct = vertical_curvature(c, t)
        assert abs(quad) == pytest.approx(1 / (R + r), abs=1e-10)
        assert quad == pytest.approx(direct, abs=1e-10)


def test_rho_antisymmetric_and_matches_direct(rng):
    P = catalog("ellipsoid", [4, 1.0, 1.5, 2.0, 1.2])
    c = polynomial_curve(P, [[1.0, 0.3, 0.1], [1.4, -0.2], [0.2, 0.5, -0.3]])
    for t in (0.0, 0.4, 0.9):
        rho = rho_matrix(c, t=t)
        np.testing.assert_allclose(rho, -rho.T, atol=1e-10)
        np.testing.assert_allclose(rho, rho_matrix_direct(c, t=t), atol=1e-10)


def test_rho_under_constant_frame_rotation(rng):
    P = catalog("torus3", [2.0, 0.5])
    c = polynomial_curve(P, [[0.1, 0.8], [0.3, -0.4, 0.2]])
    Pm = _rotation(3, rng)
    for t in (0.1, 0.6):
        rho = rho_matrix(c, t=t)
        rotated = rho_matrix(c, CurveFrame(P=Pm), t)
        np.testing.assert_allclose(rotated, Pm.T @ rho @ Pm, atol=1e-12)


@given(st.floats(0.05, 0.9), st.floats(0.0, 0.3))
def test_rho_invariant_under_monotone_reparametrization(t, a):
    P = catalog("hypersphere", [4])
    base = [[1.0, 0.4, 0.1], [1.2, -0.3], [0.2, 0.6]]
    c1 = polynomial_curve(P, base)
    warp = lambda s: s + a * s * s * s  # increasing on [0, 1]
    c2 = CurveOnSurface(P, lambda s: c1.param(warp(s)), 0.0, 1.0)
    # solve warp(s) = t by Newton
    s = t
    for _ in range(50):
        s -= (warp(s) - t) / (1 + 3 * a * s * s)
    np.testing.assert_allclose(rho_matrix(c2, t=s), rho_matrix(c1, t=t), atol=1e-9)
    assert vertical_curvature(c2, s)[0] == pytest.approx(vertical_curvature(c1, t)[0], abs=1e-9)


def test_direction_sum_is_trace(any_surface, rng):
    for u in sample_points(any_surface, 3, rng):
        ds = direction_sum_check(any_surface, u, rng)
        assert ds.residual <= 1e-10
        assert ds.t0_residual <= 1e-10


@pytest.mark.parametrize("n", [3, 4, 5])
def test_sphere_direction_sum(n, rng):
    P = catalog("hypersphere", [n])
    ds = direction_sum_check(P, sample_points(P, 1, rng)[0], rng)
    assert abs(ds.total) == pytest.approx(n - 1, abs=1e-10)


def test_dnu_identities():
    c = polynomial_curve(catalog("graph", [3]), [[0.1, 0.5, 0.2], [-0.2, 0.3]])
    rep = dnu_checks(c, 0.4)
    assert rep.residual_kstar < 1e-10 and rep.residual_dnu < 1e-10
    assert set(rep.as_dict()) >= {"k", "kstar", "dR_ds"}


def test_curve_errors():
    P = catalog("hyperplane", [3])
    with pytest.raises(DomainError):
        vertical_curvature(plane_line(P, direction=[2.0, 0.0]), 1.0)
    with pytest.raises(DegeneracyError):
        vertical_curvature(polynomial_curve(P, [[0.1], [0.2]]), 0.5)
    with pytest.raises(GeometryError):
        polynomial_curve(P, [[0.0, 1.0]])
    bad = CurveFrame("custom", fn=lambda cp: cp.e * 2.0)
    with pytest.raises(GeometryError):
        rho_matrix(plane_line(P), bad, 0.0)
    with pytest.raises(GeometryError):
        rho_matrix(plane_line(P), CurveFrame("weird"), 0.0)
