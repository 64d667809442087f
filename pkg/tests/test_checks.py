import numpy as np
import pytest

from pfaffgeo.checks import (
    CHECKS,
    PointContext,
    check_ids,
    invariant_snapshot,
    resolve_checks,
    reparametrize,
    rigid_motion,
    run_checks,
)
from pfaffgeo.errors import ConfigError
from pfaffgeo.surface import catalog, sample_points

# Identities that fail on curved surfaces for reasons recorded in the README.
KNOWN_DEFECTS = {"sphere-rstar", "sphere-rn", "position-laplacian-normal"}


def test_registry_ids_unique_and_grouped():
    ids = check_ids()
    assert len(ids) == len(set(ids))
    assert {c.group for c in CHECKS} == {"connection", "operators", "sphere", "flat", "third", "curves", "invariance"}
    assert [c.id for c in resolve_checks(["sphere"])][:2] == ["sphere-kappa", "sphere-rstar-k"]
    assert len(resolve_checks(["all"])) == len(CHECKS)
    with pytest.raises(ConfigError):
        resolve_checks(["no-such-check"])


@pytest.mark.parametrize("case", [("torus3", [2.0, 0.5]), ("graph", [4]), ("ellipsoid", [3, 1.0, 1.5, 2.0])])
def test_suite_passes_except_known_defects(case):
    P = catalog(*case)
    rep = run_checks(P, n_points=3, seed=7)
    assert set(rep.failures()) <= KNOWN_DEFECTS


def test_plane_suite_fully_passes():
    rep = run_checks(catalog("hyperplane", [4]), n_points=3, seed=1)
    assert rep.ok, rep.failures()
    assert "flat" in [r.check_id for r in rep.results]
    assert "sphere-kappa" not in [r.check_id for r in rep.results]


def test_sphere_defects_are_reported():
    rep = run_checks(catalog("hypersphere", [4]), checks=["sphere"], n_points=2)
    assert set(rep.failures()) == {"sphere-rstar", "sphere-rn"}
    # the consistent total (N-1)^2 = 9 sits 3 away from N(N-1) = 12
    assert rep.get("sphere-rstar").max_residual == pytest.approx(3.0, abs=1e-8)


def test_explicit_out_of_scope_check_is_skipped():
    rep = run_checks(catalog("torus3", [2.0, 0.5]), checks=["flat"], n_points=2)
    r = rep.get("flat")
    assert r.passed and r.points == 0 and r.skipped == 2


def test_parabolic_points_are_skipped_for_third_form():
    P = catalog("torus3", [2.0, 0.5])
    rep = run_checks(P, points=[[0.1, np.pi / 2], [0.1, 0.2]], checks=["third-inverse"])
    r = rep.get("third-inverse")
    assert r.points == 1 and r.skipped == 1


def test_fault_injection_fails_commutator():
    P = catalog("torus3", [2.0, 0.5])
    rep = run_checks(P, checks=["commutator"], n_points=3, fault=1e-2)
    assert not rep.get("commutator").passed


def test_tolerance_overrides():
    P = catalog("hypersphere", [3])
    rep = run_checks(P, checks=["sphere-rstar"], tolerances={"sphere-rstar": 10.0}, n_points=2)
    assert rep.ok
    rep = run_checks(P, checks=["q-antisymmetry"], tolerances={"*": 0.0}, n_points=2)
    assert rep.get("q-antisymmetry").tolerance == 0.0
    with pytest.raises(ConfigError):
        run_checks(P, tolerances={"bogus": 1.0})


def test_workers_do_not_change_results():
    P = catalog("graph", [3])
    a = run_checks(P, checks=["connection"], n_points=4, seed=3).as_dict()
    b = run_checks(P, checks=["connection"], n_points=4, seed=3, workers=4).as_dict()
    assert a == b


def test_point_rng_is_deterministic():
    P = catalog("graph", [3])
    a = PointContext(P, np.array([0.1, 0.2]), 5, 0.0).rng("x").normal(size=3)
    b = PointContext(P, np.array([0.1, 0.2]), 5, 0.0).rng("x").normal(size=3)
    c = PointContext(P, np.array([0.1, 0.2]), 5, 0.0).rng("y").normal(size=3)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c)


def test_rigid_motion_preserves_invariants(any_surface, rng):
    moved = rigid_motion(any_surface, rng)
    for u in sample_points(any_surface, 3, rng):
        a, b = invariant_snapshot(any_surface, u), invariant_snapshot(moved, u)
        for k in a:
            np.testing.assert_allclose(a[k], b[k], atol=1e-9)


def test_frame_preserving_reparametrization(rng):
    P = catalog("ellipsoid", [4, 1.0, 1.5, 2.0, 1.2])
    u = sample_points(P, 1, rng)[0]
    other = reparametrize(P, u, rng)
    a, b = invariant_snapshot(P, u), invariant_snapshot(other, u)
    for k in a:
        np.testing.assert_allclose(a[k], b[k], atol=1e-9)


def test_coordinate_swap_changes_q():
    # negative control: swapping parameters reorders the Gram-Schmidt frame
    P = catalog("ellipsoid", [3, 1.0, 1.5, 2.0])
    swapped = P.with_embedding(lambda v: P.embed([v[1], v[0]]), name=P.name, domain=(P.domain[1], P.domain[0]))
    u = np.array([1.0, 0.4])
    a = invariant_snapshot(P, u)["q"]
    b = invariant_snapshot(swapped, u[::-1])["q"]
    assert np.abs(a - b).max() > 1e-3
    # the Gauss curvature still agrees
    assert invariant_snapshot(P, u)["K"] == pytest.approx(invariant_snapshot(swapped, u[::-1])["K"])
