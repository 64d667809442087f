import numpy as np
import pytest

from oracles import fd_jacobian, sphere_point, torus_d2, torus_x
from pfaffgeo.errors import ConfigError, DomainError, EvaluationError
from pfaffgeo.surface import SurfacePatch, catalog, jet, regularity, sample_points


def test_plane_jet_is_affine():
    P = catalog("hyperplane", [3])
    j = jet(P, [0.1, -0.3], 3)
    np.testing.assert_array_equal(j.d1, [[1, 0], [0, 1], [0, 0]])
    assert np.all(j.d2 == 0) and np.all(j.d3 == 0)


def test_sphere_equator_point():
    P = catalog("hypersphere", [3])
    np.testing.assert_allclose(P([np.pi / 2, 0.0]), [1.0, 0.0, 0.0], atol=1e-15)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_sphere_matches_oracle(n, rng):
    P = catalog("hypersphere", [n])
    for u in sample_points(P, 5, rng):
        np.testing.assert_allclose(P(u), sphere_point(u), atol=1e-14)


def test_torus_second_partials_match_hand_derivation(rng):
    P = catalog("torus3", [2.0, 0.5])
    for u in sample_points(P, 10, rng):
        np.testing.assert_allclose(P(u), torus_x(2.0, 0.5, u), atol=1e-14)
        np.testing.assert_allclose(jet(P, u, 2).d2, torus_d2(2.0, 0.5, u), atol=1e-12)
        np.testing.assert_allclose(jet(P, u, 2, engine="fd").d2, torus_d2(2.0, 0.5, u), atol=1e-7)


def test_ad_and_fd_first_derivatives_agree(any_surface, rng):
    for u in sample_points(any_surface, 100, rng):
        ad = jet(any_surface, u, 1, engine="ad").d1
        fd = jet(any_surface, u, 1, engine="fd").d1
        scale = max(1.0, np.abs(ad).max())
        assert np.abs(ad - fd).max() <= 1e-6 * scale


def test_ad_matches_independent_fd_oracle(any_surface, rng):
    for u in sample_points(any_surface, 5, rng):
        np.testing.assert_allclose(jet(any_surface, u, 1).d1, fd_jacobian(any_surface, u), atol=1e-8)


def test_higher_partials_symmetric(any_surface, rng):
    u = sample_points(any_surface, 1, rng)[0]
    for engine in ("ad", "fd"):
        j = jet(any_surface, u, 3, engine=engine)
        np.testing.assert_allclose(j.d2, j.d2.swapaxes(1, 2), atol=1e-8)
        np.testing.assert_allclose(j.d3, j.d3.swapaxes(1, 3), atol=1e-8)


def test_catalog_regularity(any_surface, rng):
    for u in sample_points(any_surface, 30, rng, shrink=0.0):
        assert regularity(any_surface, u) >= 1e-8


def test_catalog_errors():
    with pytest.raises(ConfigError):
        catalog("klein", [3])
    with pytest.raises(ConfigError):
        catalog("torus3", [2.0])
    with pytest.raises(ConfigError):
        catalog("ellipsoid", [3, 1.0, 2.0])
    with pytest.raises(ConfigError):
        catalog("hypersphere", [3.5])


def test_domain_errors():
    P = catalog("hypersphere", [3])
    with pytest.raises(DomainError):
        jet(P, [0.0, 0.0])
    lo = P.domain[0][0]
    with pytest.raises(DomainError):
        jet(P, [lo + 1e-9, 0.0], engine="fd")


def test_non_finite_embedding():
    P = SurfacePatch("bad", 3, lambda u: [u[0], u[1], np.log(u[0])], ((-1.0, 1.0), (-1.0, 1.0)), jet_capable=False)
    with np.errstate(invalid="ignore"), pytest.raises(EvaluationError):
        jet(P, [-0.5, 0.0], engine="fd")


def test_black_box_patch_uses_fd():
    P = SurfacePatch("box", 3, lambda u: [u[0], u[1], np.sin(u[0]) * u[1]], ((-1.0, 1.0),) * 2, jet_capable=False)
    j = jet(P, [0.2, 0.4])
    np.testing.assert_allclose(j.d1[2], [np.cos(0.2) * 0.4, np.sin(0.2)], atol=1e-9)
    with pytest.raises(ConfigError):
        jet(P, [0.2, 0.4], engine="ad")
