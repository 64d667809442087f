import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import torus_gauss
from pfaffgeo import jets as J
from pfaffgeo.errors import GeometryError
from pfaffgeo.operators import (
    LambdaField,
    beltrami2,
    beltrami_lambda,
    builtin_lambda,
    constant_field,
    d_k,
    delta_field,
    epsilon_field,
    eta,
    invariants_report,
    local_operators,
    metric_field,
    pi_lambda,
    sr_diagnostic,
)
from pfaffgeo.surface import catalog, sample_points

wave = lambda u: J.sin(u[0] + 2 * u[-1]) + u[0] * u[-1]
const = lambda u: 3.0 + 0.0 * u[0]


def test_constants_are_annihilated():
    P = catalog("hyperplane", [3])
    assert d_k(const, 1, P, [0.1, 0.2]) == 0.0
    S = catalog("hypersphere", [4])
    assert beltrami2(const, S, [1.0, 1.1, 0.2]) == pytest.approx(0.0, abs=1e-12)


def test_plane_beltrami_is_scaled_laplacian():
    P = catalog("hyperplane", [3])
    f = lambda u: u[0] ** 2 + 3 * u[1] ** 2
    assert beltrami2(f, P, [0.3, -0.2]) == pytest.approx(2 * (2 + 6))


def test_beltrami_two_forms_agree(any_surface, rng):
    for u in sample_points(any_surface, 5, rng):
        a = beltrami2(wave, any_surface, u)
        b = beltrami2(wave, any_surface, u, form="pairs")
        assert a == pytest.approx(b, abs=1e-8 * (1 + abs(a)))


def test_delta_lambda_reproduces_beltrami(any_surface, rng):
    for u in sample_points(any_surface, 3, rng):
        assert beltrami_lambda(wave, delta_field(), any_surface, u) == pytest.approx(beltrami2(wave, any_surface, u), abs=1e-10)


def test_epsilon_lambda_closed_form(any_surface, rng):
    # Delta^(eps) f = +sum_k ((N-1) A_k + sum_s eps_ks R_s / (N-1)) nabla_k f
    for u in sample_points(any_surface, 3, rng):
        ops = local_operators(any_surface, u)
        lc = ops.lc
        n1 = ops.n1
        G = ops.grad(ops.field(wave)).value
        A = lc.A.value
        R = lc.R.value
        expected = np.sum((n1 * A + lc.eps @ R / n1) * G)
        assert beltrami_lambda(wave, epsilon_field(), any_surface, u) == pytest.approx(expected, abs=1e-8)


def test_d_product_rule(any_surface, rng):
    g = lambda u: J.exp(0.3 * u[0]) + u[-1] ** 2
    for u in sample_points(any_surface, 3, rng):
        ops = local_operators(any_surface, u)
        F, G = ops.field(wave), ops.field(g)
        lhs = ops.D(F * G).value
        rhs = F.value * ops.D(G).value + G.value * ops.D(F).value + F.value * G.value * ops.R.value / ops.n1
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)


def test_pi_symmetric_is_eta_times_f(rng):
    P = catalog("ellipsoid", [3, 1.0, 1.5, 2.0])
    lam = metric_field()
    for u in sample_points(P, 3, rng):
        f = wave
        ops = local_operators(P, u)
        assert pi_lambda(f, lam, P, u) == pytest.approx(eta(lam, P, u) * float(ops.field(f).value), abs=1e-8)


def test_pi_symmetric_on_plane_vanishes():
    P = catalog("hyperplane", [4])
    assert pi_lambda(wave, delta_field(), P, [0.1, 0.2, 0.3]) == 0.0


def test_lambda_field_validation():
    with pytest.raises(GeometryError):
        LambdaField("bad", np.array([[0.0, 1.0], [2.0, 0.0]]), "symmetric").at(local_operators(catalog("hyperplane", [3]), [0, 0]).lc)
    with pytest.raises(GeometryError):
        constant_field(np.eye(2)).at(local_operators(catalog("hyperplane", [3]), [0, 0]).lc)
    with pytest.raises(GeometryError):
        builtin_lambda("nope")
    assert constant_field(np.eye(3)).symmetry == "symmetric"
    assert constant_field(np.triu(np.ones((3, 3)), 1) - np.tril(np.ones((3, 3)), -1)).symmetry == "antisymmetric"
    assert builtin_lambda("g-coord").name == "g-coord"


@given(st.lists(st.floats(-2, 2), min_size=9, max_size=9))
def test_lambda_split_recombines(entries):
    lc = local_operators(catalog("hypersphere", [3]), [1.0, 0.3]).lc
    lam = constant_field(np.reshape(entries, (3, 3)))
    total = lam.symmetric_part().at(lc).value + lam.antisymmetric_part().at(lc).value
    np.testing.assert_allclose(total, lam.at(lc).value, atol=1e-14)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_sphere_invariants(n, rng):
    P = catalog("hypersphere", [n])
    for u in sample_points(P, 3, rng):
        rep = invariants_report(P, u)
        assert abs(rep.K) == pytest.approx(1.0)
        np.testing.assert_allclose(rep.Rstar_j, n - 1, atol=1e-10)
        # the consistent total is (N-1)^2
        assert rep.Rstar == pytest.approx((n - 1) ** 2)
        assert not rep.flat


def test_plane_invariants():
    rep = invariants_report(catalog("hyperplane", [3]), [0.2, 0.4])
    assert rep.K == 0.0 and rep.Rstar == 0.0 and rep.flat and rep.two_minimal


def test_torus_gauss_at_outer_equator():
    rep = invariants_report(catalog("torus3", [2.0, 0.5]), [0.1, 0.0])
    assert rep.K == pytest.approx(1 / (0.5 * 2.5), abs=1e-5)
    rep = invariants_report(catalog("torus3", [2.0, 0.5]), [0.1, 2.0])
    assert rep.K == pytest.approx(torus_gauss(2.0, 0.5, 2.0), abs=1e-10)


def test_sigma_only_with_lambda():
    P = catalog("hypersphere", [3])
    assert invariants_report(P, [1.0, 0.2]).sigma is None
    assert "sigma" in invariants_report(P, [1.0, 0.2], lam=delta_field()).as_dict()


def test_sr_diagnostic_verdicts(rng):
    plane = catalog("hyperplane", [3])
    rep = sr_diagnostic(plane, sample_points(plane, 5, rng))
    assert rep.max_residual == 0.0 and rep.verdict == "consistent with S-R"
    # pinned regression fixture: the graph surface has a non-closed R form
    graph = catalog("graph", [3])
    rep = sr_diagnostic(graph, sample_points(graph, 5, rng))
    assert rep.max_residual > 1e-3 and rep.verdict == "not S-R"
    with pytest.raises(GeometryError):
        sr_diagnostic(plane, [])


def test_d_k_range():
    with pytest.raises(GeometryError):
        d_k(wave, 4, catalog("hyperplane", [3]), [0.0, 0.0])
