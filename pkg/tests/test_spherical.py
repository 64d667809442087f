import numpy as np
import pytest

from pfaffgeo.connection import connection_at
from pfaffgeo.errors import ParabolicPointError
from pfaffgeo.spherical import local_spherical, spherical_at, beltrami3_check, tilde_gradient
from pfaffgeo.surface import catalog, sample_points


@pytest.mark.parametrize("n", [3, 4, 5])
def test_sphere_inverse_connection(n, rng):
    P = catalog("hypersphere", [n])
    for u in sample_points(P, 3, rng):
        sd = spherical_at(P, u)
        qN = connection_at(P, u).q[n - 1, : n - 1, :]
        np.testing.assert_allclose(sd.q1, np.linalg.inv(qN), atol=1e-12)
        assert abs(sd.w) == pytest.approx(1.0)


def test_plane_is_parabolic():
    with pytest.raises(ParabolicPointError):
        spherical_at(catalog("hyperplane", [3]), [0.1, 0.2])


def test_torus_inner_circle_is_parabolic():
    # cos v = 0 on the top circle of the tube
    with pytest.raises(ParabolicPointError):
        spherical_at(catalog("torus3", [2.0, 0.5]), [0.3, np.pi / 2])


def test_q1_inverts_kappa_on_torus(rng):
    P = catalog("torus3", [2.0, 0.5])
    for u in sample_points(P, 5, rng, box=((-2.5, 2.5), (-1.2, 1.2))):
        sd = spherical_at(P, u)
        qN = connection_at(P, u).q[2, :2, :]
        np.testing.assert_allclose(sd.q1 @ qN, np.eye(2), atol=1e-8)


def test_tilde_gradient_of_constant():
    P = catalog("hypersphere", [4])
    np.testing.assert_array_equal(tilde_gradient(lambda u: 2.0 + 0.0 * u[0], P, [1.0, 1.1, 0.2]), 0.0)


def test_tilde_gradient_of_support(rng):
    P = catalog("ellipsoid", [3, 1.0, 1.5, 2.0])
    for u in sample_points(P, 3, rng):
        ls = local_spherical(P, u)
        got = ls.tgrad(ls.w).value
        want = ls.lf.e.value[:2] @ ls.lf.x.value
        np.testing.assert_allclose(got, want, atol=1e-10)


@pytest.mark.parametrize("case", [("hypersphere", [3]), ("hypersphere", [4]), ("ellipsoid", [3, 1.0, 1.0, 1.01])])
def test_beltrami_third_form_identity(case, rng):
    P = catalog(*case)
    for u in sample_points(P, 5, rng):
        assert beltrami3_check(P, u) <= 1e-3
