import numpy as np
import pytest

from oracles import fd_shape_operator, torus_gauss, torus_principal
from pfaffgeo.connection import (
    connection_at,
    connection_fd,
    curvature_two_ways,
    eps_matrix,
    local_connection,
    semicolon_derivative,
    theta1,
    theta2,
)
from pfaffgeo import jets as J
from pfaffgeo.errors import GeometryError
from pfaffgeo.surface import catalog, sample_points


def test_plane_connection_vanishes():
    cd = connection_at(catalog("hyperplane", [4]), [0.2, -0.1, 0.4])
    assert np.all(cd.q == 0) and np.all(cd.Rcurv == 0)


@pytest.mark.parametrize("n,sign", [(3, -1), (4, -1), (5, 1)])
def test_sphere_kappa_is_plus_minus_identity(n, sign, rng):
    P = catalog("hypersphere", [n])
    for u in sample_points(P, 3, rng):
        cd = connection_at(P, u)
        np.testing.assert_allclose(cd.kappa, sign * np.eye(n - 1), atol=1e-12)
        assert np.linalg.det(cd.kappa) == pytest.approx(sign ** (n - 1))


def test_q_antisymmetric_and_matches_fd(any_surface, rng):
    for u in sample_points(any_surface, 5, rng):
        cd = connection_at(any_surface, u)
        np.testing.assert_allclose(cd.q, -cd.q.transpose(1, 0, 2), atol=1e-14)
        assert cd.antisym_residual < 1e-10
        np.testing.assert_allclose(cd.q, connection_fd(any_surface, u), atol=1e-6)


def test_torus_curvatures_match_closed_form(rng):
    R, r = 2.0, 0.5
    P = catalog("torus3", [R, r])
    for u in sample_points(P, 10, rng):
        kappa = connection_at(P, u).kappa
        eig = sorted(np.abs(np.linalg.eigvals(kappa).real))
        np.testing.assert_allclose(eig, sorted(np.abs(torus_principal(R, r, u[1]))), atol=1e-10)
        np.testing.assert_allclose(eig, fd_shape_operator(P, u), atol=1e-5)
        assert np.linalg.det(kappa) == pytest.approx(torus_gauss(R, r, u[1]), abs=1e-10)


def test_torus_outer_equator_gauss_curvature():
    cd = connection_at(catalog("torus3", [2.0, 0.5]), [0.3, 0.0])
    assert np.linalg.det(cd.kappa) == pytest.approx(1.0 / (0.5 * 2.5), abs=1e-12)


def test_ellipsoid_principal_curvatures_vs_fd(rng):
    P = catalog("ellipsoid", [3, 1.0, 1.5, 2.0])
    for u in sample_points(P, 5, rng):
        eig = sorted(np.abs(np.linalg.eigvals(connection_at(P, u).kappa).real))
        np.testing.assert_allclose(eig, fd_shape_operator(P, u), atol=1e-5)


def test_curvature_two_ways_agree(any_surface, rng):
    for u in sample_points(any_surface, 5, rng):
        a, b = curvature_two_ways(any_surface, u)
        scale = max(1.0, np.abs(b).max())
        assert np.abs(a - b).max() <= 1e-8 * scale


def test_r_equals_eps_a(any_surface, rng):
    u = sample_points(any_surface, 1, rng)[0]
    cd = connection_at(any_surface, u)
    np.testing.assert_allclose(cd.Rvec, eps_matrix(cd.N) @ cd.A, atol=1e-14)
    assert eps_matrix(3).tolist() == [[0, -1, -1], [1, 0, -1], [1, 1, 0]]


def test_semicolon_of_scalar_is_gradient():
    P = catalog("hyperplane", [3])
    out = semicolon_derivative(lambda u: u[0] * u[1], [], 2, P, [0.3, 0.7])
    assert out == pytest.approx(0.3)


def test_semicolon_of_frame_constant_table_on_sphere():
    # a constant vector field t_k = delta_k1 picks up -q_k1l from the bracket
    P = catalog("hypersphere", [3])
    u = [1.0, 0.4]
    cd = connection_at(P, u)
    t = lambda u: np.array([1.0, 0.0, 0.0])
    for l in (1, 2):
        np.testing.assert_allclose(semicolon_derivative(t, [1], l, P, u), -cd.q[:, 0, l - 1], atol=1e-12)


def test_semicolon_slot_errors():
    P = catalog("hypersphere", [3])
    with pytest.raises(GeometryError):
        semicolon_derivative(lambda u: np.zeros(3), [2], 1, P, [1.0, 0.4])
    with pytest.raises(GeometryError):
        semicolon_derivative(lambda u: np.zeros(3), [1], 3, P, [1.0, 0.4])


def test_theta_on_plane_is_curl():
    P = catalog("hyperplane", [3])
    a = lambda u: J.stack([-u[1], u[0], 0.0 * u[0]])
    assert theta2(a, 1, 2, P, [0.1, 0.2]) == pytest.approx(2.0)
    assert theta2(a, 2, 1, P, [0.1, 0.2]) == pytest.approx(-2.0)
    assert theta2(a, 1, 1, P, [0.1, 0.2]) == 0.0


def test_theta_of_gradient_vanishes(any_surface, rng):
    f = lambda u: J.sin(sum(u[l] for l in range(len(u)))) + u[0] * u[-1]
    for u in sample_points(any_surface, 3, rng):
        lc = local_connection(any_surface, u)
        grad = lc.lf.grad_full(lc.field(f))
        np.testing.assert_allclose(lc.theta(grad).value, 0.0, atol=1e-10)


def test_theta_index_errors():
    P = catalog("hypersphere", [3])
    with pytest.raises(GeometryError):
        theta1(lambda u: np.zeros(3), 1, 3, P, [1.0, 0.4])


def test_fault_injection_breaks_curvature():
    P = catalog("torus3", [2.0, 0.5])
    lc = local_connection(P, [0.2, 0.3], fault=1e-2)
    gap = np.abs(lc.curvature_a().value - lc.curvature_b().value).max()
    assert gap > 1e-3
