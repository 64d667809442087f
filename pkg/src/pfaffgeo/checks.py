"""Identity suite: named residual checks evaluated over sample points.

Every check maps a :class:`PointContext` to a non-negative residual.  A check
passes when the largest residual over the points is within its tolerance.
Checks carry a scope so surface-specific closed forms only run where they
apply; asking explicitly for an out-of-scope check yields a skipped row.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from . import jets as J
from .connection import LocalConnection, connection_fd, frame_aware, local_connection, pad_axes
from .curves import CurveOnSurface, dnu_checks, direction_sum_check, rho_matrix, rho_matrix_direct, vertical_curvature
from .errors import ConfigError, GeometryError
from .operators import LocalOperators
from .spherical import LocalSpherical
from .surface import SurfacePatch, sample_points

# Smooth scalar test fields; the last one is ambient and frame-aware.
TEST_FIELDS: tuple[tuple[str, Callable], ...] = (
    ("wave", lambda v: J.sin(v[0] + 0.5 * v[-1]) * (1 + v[0] * v[0])),
    ("exp", lambda v: J.exp(0.3 * v[0] - 0.2 * v[-1]) + v[-1] ** 3),
    ("cubic", lambda v: v[0] * v[0] * v[-1] - 2.0 * v[-1] + 1.5),
    ("ratio", lambda v: J.reciprocal(2.0 + J.cos(v[0]) * v[-1])),
    ("radius", frame_aware(lambda lf: J.dot(lf.x, lf.x) + lf.x[0])),
)

# Fields that stay positive on every catalog domain (used where f divides).
POSITIVE_FIELDS = ("exp", "ratio")


class PointContext:
    """Lazily built per-point data shared by all checks at one point."""

    def __init__(self, patch: SurfacePatch, u, seed: int, fault: float = 0.0):
        self.patch = patch
        self.u = np.asarray(u, dtype=float)
        self.seed = seed
        self.fault = fault

    @cached_property
    def lc(self) -> LocalConnection:
        return local_connection(self.patch, self.u, fault=self.fault)

    @cached_property
    def ops(self) -> LocalOperators:
        return LocalOperators(self.lc)

    @cached_property
    def sph(self) -> LocalSpherical:
        return LocalSpherical(self.lc)

    @property
    def N(self) -> int:
        return self.lc.N

    @property
    def M(self) -> int:
        return self.lc.M

    @property
    def n1(self) -> float:
        return self.N - 1.0

    def rng(self, tag: str) -> np.random.Generator:
        """Independent stream per check so check selection never shifts draws."""
        return np.random.default_rng([self.seed, sum(map(ord, tag)), len(tag)])

    @cached_property
    def fields(self) -> list[J.Jet]:
        return [self.lc.field(f) for _, f in TEST_FIELDS]

    @cached_property
    def positive_fields(self) -> list[J.Jet]:
        return [self.lc.field(f) for name, f in TEST_FIELDS if name in POSITIVE_FIELDS]

    def lam(self, tag: str, kind: str, block: str = "full") -> J.Jet:
        """Random constant weight table; ``block="tangent"`` zeroes the normal row and column."""
        A = self.rng(tag).normal(size=(self.N, self.N))
        if block == "tangent":
            A[-1, :] = 0.0
            A[:, -1] = 0.0
        if kind == "symmetric":
            A = A + A.T
        elif kind == "antisymmetric":
            A = A - A.T
        return J.asjet(A, self.lc.lf.space)

    def jet(self, table) -> J.Jet:
        return J.asjet(table, self.lc.lf.space)

    @cached_property
    def elliptic(self) -> bool:
        """Shape operator definite and comfortably away from parabolic points."""
        k = self.lc.kappa.value
        ev = np.linalg.eigvalsh(0.5 * (k + k.T))
        return bool((np.all(ev > 0) or np.all(ev < 0)) and np.abs(ev).min() > 0.05)

    def probe_curve(self) -> CurveOnSurface:
        """Short straight parameter line through ``u`` in a random direction."""
        d = self.rng("curve").normal(size=self.M)
        d *= 0.5 / np.linalg.norm(d)
        u0 = self.u.copy()
        return CurveOnSurface(self.patch, lambda t: [u0[l] + d[l] * t for l in range(len(u0))], -0.02, 0.02, "probe")


def _amax(x) -> float:
    a = np.abs(np.asarray(x, dtype=float))
    return float(a.max()) if a.size else 0.0


# -- connection -------------------------------------------------------------

def _q_antisym(c: PointContext) -> float:
    return c.lc.antisym_residual


def _gamma_antisym(c: PointContext) -> float:
    g = c.lc.gamma.value
    return _amax(g + g.transpose(1, 0, 2))


def _q_fd(c: PointContext) -> float:
    return _amax(c.lc.q.value - connection_fd(c.patch, c.u))


def _commutator(c: PointContext) -> float:
    lf, M = c.lc.lf, c.M
    Q = c.lc.Q.value[:, :M, :]
    worst = 0.0
    for F in c.fields:
        g1 = lf.grad(F)
        g2 = lf.grad(g1).value  # [m, l] = nabla_l nabla_m f
        worst = max(worst, _amax(g2.T - g2 + np.einsum("k,lkm->lm", g1.value, Q)))
    return worst


def _curvature_dual(c: PointContext) -> float:
    return _amax(c.lc.curvature_a().value - c.lc.curvature_b().value)


def _curvature_semicolon(c: PointContext) -> float:
    s = c.lc.semicolon(c.lc.q, [2]).value  # [i, k, m, l] = q_ik{m};l
    return _amax(s.transpose(0, 1, 3, 2) - s - c.lc.curvature_b().value)


def _curvature_antisym(c: PointContext) -> float:
    R = c.lc.curvature_a().value
    return max(_amax(R + R.transpose(1, 0, 2, 3)), _amax(R + R.transpose(0, 1, 3, 2)))


def _frame_hessian(c: PointContext) -> np.ndarray:
    lf = c.lc.lf
    return lf.grad(lf.grad(lf.e)).value  # [i, a, m, l] = nabla_l nabla_m e_i


def _frame_second(c: PointContext) -> float:
    He, e, q = _frame_hessian(c), c.lc.lf.e.value, c.lc.q.value
    return max(abs(He[m, :, k, k] @ e[m] + (q[m, :, k] ** 2).sum()) for m in range(c.N) for k in range(c.M))


def _frame_torsion(c: PointContext) -> float:
    He, e, M = _frame_hessian(c), c.lc.lf.e.value, c.M
    T = np.einsum("iaml,ja->ijlm", He, e) - np.einsum("iaml,ja->ijml", He, e)
    return _amax(T + np.einsum("ijs,lsm->ijlm", c.lc.q.value, c.lc.Q.value[:, :M, :]))


def _r_dot_a(c: PointContext) -> float:
    return abs(float(c.lc.R.value @ c.lc.A.value))


def _theta_exact(c: PointContext) -> float:
    return max(_amax(c.lc.theta(c.ops.grad(F)).value) for F in c.fields)


def _theta_coframe(c: PointContext) -> float:
    N, lc = c.N, c.lc
    worst = 0.0
    for j in range(N):
        th = lc.theta(np.eye(N)[j]).value
        worst = max(worst, _amax(th - lc.Q.value[:, j, :]))
    return worst


def _theta_connection(c: PointContext) -> float:
    N, lc = c.N, c.lc
    Rb = lc.curvature_b().value
    worst = 0.0
    for i in range(N):
        for j in range(N):
            a = pad_axes(lc.q[i, j][None], {1: N})[0]
            worst = max(worst, _amax(lc.theta(a).value - Rb[i, j]))
    return worst


def _position_semicolon(c: PointContext) -> float:
    lf = c.lc.lf
    f = J.einsum("a,ka->k", lf.x, lf.e)
    return _amax(c.lc.semicolon(f, [0]).value - np.eye(c.N)[:, : c.M])


def _constant_vector(c: PointContext) -> float:
    Y = c.rng("const-vector").normal(size=c.N)
    comps = J.einsum("a,ka->k", c.jet(Y), c.lc.lf.e)
    return _amax(c.lc.semicolon(comps, [0]).value)


def _lambda_hessian_antisym(c: PointContext) -> float:
    lam = c.lam("cor-antisym", "antisymmetric", "tangent").value
    worst = 0.0
    for F in c.fields:
        H = c.ops.hess(F).value  # [j, i]
        G = c.ops.grad(F).value
        worst = max(worst, abs(float(np.sum(lam * H.T) + np.einsum("ij,ikj,k", lam, c.lc.q_full.value, G))))
    return worst


# -- operators --------------------------------------------------------------

def _beltrami_pairs(c: PointContext) -> float:
    return max(abs(float(c.ops.beltrami2(F).value - c.ops.beltrami2_pairs(F).value)) for F in c.fields)


def _d_product(c: PointContext) -> float:
    ops, R = c.ops, c.lc.R.value
    F, G = c.fields[0], c.fields[1]
    lhs = ops.D(F * G).value - F.value * ops.D(G).value - G.value * ops.D(F).value
    return _amax(lhs - F.value * G.value * R / c.n1)


def _d_commutator(c: PointContext) -> float:
    ops = c.ops
    gR = np.diag(ops.grad(c.lc.R).value)
    worst = 0.0
    for F in c.fields:
        DG = ops.D(ops.grad(F)).value  # [j, k] = D_k nabla_j f
        gD = ops.grad(ops.D(F)).value  # [k, j] = nabla_j D_k f
        worst = max(worst, _amax(np.diag(DG) - np.diag(gD) - gR / c.n1 * F.value))
    return worst


def _d_gradient(c: PointContext) -> float:
    ops, e, R = c.ops, c.lc.lf.e.value, c.lc.R.value
    worst = 0.0
    for F in c.fields:
        lhs = ops.D(F).value @ e
        rhs = c.n1 * ops.grad(F).value @ e - F.value * (R @ e) / c.n1
        worst = max(worst, _amax(lhs - rhs))
    return worst


def _beltrami_delta(c: PointContext) -> float:
    I = c.jet(np.eye(c.N))
    return max(abs(float(c.ops.beltrami2(F).value - c.ops.beltrami_lambda(F, I).value)) for F in c.fields)


def _beltrami_epsilon(c: PointContext) -> float:
    ops, lc, n1 = c.ops, c.lc, c.n1
    eps, A, R = lc.eps, lc.A.value, lc.R.value
    coef = n1 * A + eps @ R / n1
    E = c.jet(eps)
    return max(abs(float(ops.beltrami_lambda(F, E).value - coef @ ops.grad(F).value)) for F in c.fields)


def _lambda_expanded(c: PointContext) -> float:
    lam = c.lam("expanded", "general")
    return max(abs(float(c.ops.beltrami_lambda(F, lam).value - c.ops.beltrami_lambda_expanded(F, lam).value)) for F in c.fields)


def _position_lambda(c: PointContext, lam: J.Jet) -> np.ndarray:
    """Frame components of ``Delta^(lam) x``."""
    return c.ops.beltrami_lambda(c.ops.position(), lam).value @ c.lc.lf.e.value.T


def _lambda_position(c: PointContext) -> float:
    lam = c.lam("position", "antisymmetric")
    Dx = _position_lambda(c, lam)
    return max(abs(float(c.ops.beltrami_lambda(F, lam).value - Dx @ c.ops.grad(F).value)) for F in c.fields)


def _lambda_sigma(c: PointContext) -> float:
    lam = c.lam("sigma", "general", "tangent")
    return _amax(_position_lambda(c, lam) - c.ops.sigma(lam).value)


def _antisym_closed(c: PointContext) -> float:
    lam = c.lam("antisym-closed", "antisymmetric")
    Al, R, n1 = c.ops.A_lambda(lam).value, c.lc.R.value, c.n1
    coef = n1 * Al + lam.value.T @ R / n1  # [k] = sum_i lam_ik R_i
    return max(abs(float(c.ops.beltrami_lambda(F, lam).value + coef @ c.ops.grad(F).value)) for F in c.fields)


def _antisym_position_r(c: PointContext) -> float:
    lam = c.lam("antisym-r", "antisymmetric", "tangent")
    R = c.lc.R.value
    return abs(float(_position_lambda(c, lam) @ R + c.n1 * c.ops.A_lambda(lam).value @ R))


def _lambda_a_r(c: PointContext) -> float:
    lam = c.lam("lambda-ar", "general").value
    qf = c.lc.q_full.value
    up = np.triu(np.ones((c.N, c.N)), 1)
    worst = 0.0
    for sign in (-1.0, 1.0):
        Qx = qf + sign * qf.transpose(2, 1, 0)  # Q_ikj or Q*_ikj
        A = np.einsum("ikj,ij->k", Qx, lam * up)
        worst = max(worst, abs(float(A @ (c.lc.eps @ A))))
    return worst


def _antisym_product(c: PointContext) -> float:
    lam = c.lam("product", "antisymmetric")
    ops = c.ops
    F, G = c.fields[0], c.fields[1]
    lhs = ops.beltrami_lambda(F * G, lam).value
    return abs(float(lhs - F.value * ops.beltrami_lambda(G, lam).value - G.value * ops.beltrami_lambda(F, lam).value))


def _semicolon_form(c: PointContext, lam: J.Jet, F: J.Jet) -> float:
    """``(N-1) sum_{i<=j} lam+*_ij (nabla_j f)_{;i} + <Delta^(lam) x, grad f>``."""
    ls = 0.5 * (lam.value + lam.value.T)
    star = 2.0 * np.triu(ls, 1) + np.diag(np.diag(ls))
    sg = c.ops.semicolon_grad(F).value  # [j, i]
    Dx = _position_lambda(c, lam)
    return c.n1 * float(np.sum(star * sg.T)) + float(Dx @ c.ops.grad(F).value)


def _symmetric_semicolon(c: PointContext) -> float:
    worst = 0.0
    for lam in (c.lam("sym-semicolon", "symmetric", "tangent"), c.jet(np.eye(c.N))):
        for F in c.fields:
            worst = max(worst, abs(float(c.ops.beltrami_lambda(F, lam).value) - _semicolon_form(c, lam, F)))
    return worst


def _general_semicolon(c: PointContext) -> float:
    lam = c.lam("gen-semicolon", "general", "tangent")
    return max(abs(float(c.ops.beltrami_lambda(F, lam).value) - _semicolon_form(c, lam, F)) for F in c.fields)


def _general_hessian(c: PointContext) -> float:
    lam = c.lam("gen-hessian", "general", "tangent")
    ls = 0.5 * (lam.value + lam.value.T)
    qf = c.lc.q_full.value
    Dx = _position_lambda(c, lam)
    HS = c.n1 * np.einsum("ij,jki->k", ls, qf)
    worst = 0.0
    for F in c.fields:
        rhs = c.n1 * float(np.sum(ls * c.ops.hess(F).value.T)) + float((Dx - HS) @ c.ops.grad(F).value)
        worst = max(worst, abs(float(c.ops.beltrami_lambda(F, lam).value) - rhs))
    return worst


def _pi_antisym(c: PointContext) -> float:
    """Antisymmetric bracket identity with the Theta(R) sign made consistent."""
    lam = c.lam("pi-antisym", "antisymmetric")
    ops, n1 = c.ops, c.n1
    Al = ops.A_lambda(lam).value
    th = ops.theta_full(c.lc.R).value
    worst = 0.0
    for F in c.positive_fields:
        f = float(F.value)
        lhs = float(ops.pi_lambda(F, lam).value) + Al @ ops.D(F * F).value / f
        worst = max(worst, abs(lhs + f / (2 * n1) * float(np.sum(lam.value * th))))
    return worst


def _pi_general(c: PointContext) -> float:
    lam = c.lam("pi-general", "general").value
    ops, n1, qf = c.ops, c.n1, c.lc.Q_full.value
    ls, la = 0.5 * (lam + lam.T), 0.5 * (lam - lam.T)
    Hm = n1 * np.einsum("ij,ikj->k", la, qf)
    th = ops.theta_full(c.lc.R).value
    gR = ops.grad(c.lc.R).value  # [i, j] = nabla_j R_i
    worst = 0.0
    for F in c.positive_fields:
        f = float(F.value)
        rhs = -Hm @ ops.D(F * F).value / (2 * f * n1) - f / (2 * n1) * float(np.sum(la * th)) + f / n1 * float(np.sum(ls * gR))
        worst = max(worst, abs(float(ops.pi_lambda(F, c.jet(lam)).value) - rhs))
    return worst


def _pi_symmetric(c: PointContext) -> float:
    lam = c.lam("pi-sym", "symmetric")
    eta = float(c.ops.eta(lam).value)
    return max(abs(float(c.ops.pi_lambda(F, lam).value) - eta * float(F.value)) for F in c.fields)


def _pi_metric(c: PointContext) -> float:
    g = c.jet(np.diag([1.0] * c.M + [0.0]))
    gR = c.ops.grad(c.lc.R).value
    eta_direct = float(np.sum(g.value * gR)) / c.n1
    eta = float(c.ops.eta(g).value)
    worst = abs(eta - eta_direct)
    for F in c.fields:
        worst = max(worst, abs(float(c.ops.pi_lambda(F, g).value) - eta * float(F.value)))
    return worst


def _metric_position(c: PointContext) -> float:
    g = np.diag([1.0] * c.M + [0.0])
    qf, R = c.lc.q_full.value, c.lc.R.value
    H = c.n1 * np.einsum("ij,ikj->k", g, qf)
    return _amax(_position_lambda(c, c.jet(g)) - (H - g @ R / c.n1))


def _vector_product(c: PointContext) -> float:
    ops, lf = c.ops, c.lc.lf
    V1, V2 = lf.x, lf.e[c.N - 1]
    lhs = float(ops.beltrami2(J.dot(V1, V2)).value)
    cross = 2 * c.n1 * float(np.sum(ops.grad(V1).value * ops.grad(V2).value))
    rhs = float(ops.beltrami2(V1).value @ V2.value + V1.value @ ops.beltrami2(V2).value) + cross
    return abs(lhs - rhs)


def _frame_laplacian(c: PointContext) -> float:
    qf = c.lc.q_full.value
    worst = 0.0
    for k in range(c.N):
        ek = c.lc.lf.e[k]
        worst = max(worst, abs(float(c.ops.beltrami2(ek).value @ ek.value) + c.n1 * float(np.sum(qf[k] ** 2))))
    return worst


def _normal_laplacian(c: PointContext) -> float:
    eN = c.lc.lf.e[c.N - 1]
    return abs(float(c.ops.beltrami2(eN).value @ eN.value) + c.n1 * float(np.sum(c.lc.kappa.value ** 2)))


def _position_laplacian(c: PointContext, part: slice) -> float:
    D2x = c.ops.beltrami2(c.ops.position()).value @ c.lc.lf.e.value.T
    qf, R = c.lc.q_full.value, c.lc.R.value
    h = c.n1 * np.einsum("lkl->k", qf)
    return _amax((D2x - (h - R / c.n1))[part])


def _sr_closed_plane(c: PointContext) -> float:
    return _amax(c.lc.theta(c.lc.R).value)


# -- hypersphere closed forms ----------------------------------------------

def _sphere_kappa(c: PointContext) -> float:
    k = c.lc.kappa.value
    I = np.eye(c.M)
    return min(_amax(k + I), _amax(k - I))


def _sphere_rstar_k(c: PointContext) -> float:
    Rj = c.n1 * (c.lc.kappa.value ** 2).sum(axis=0)
    return _amax(Rj - c.n1)


def _sphere_rstar(c: PointContext) -> float:
    Rs = c.n1 * float((c.lc.kappa.value ** 2).sum())
    return abs(Rs - c.N * c.n1)


def _sphere_rn(c: PointContext) -> float:
    return abs(float(c.lc.R.value[-1]))


def _sphere_gauss(c: PointContext) -> float:
    return abs(abs(float(np.linalg.det(c.lc.kappa.value))) - 1.0)


def _sphere_curvature(c: PointContext) -> float:
    """``-sum_s rot_lm(q_isl q_Nsm) = Q_mil`` with the normal oriented so kappa = -I."""
    Rb, Q, M = c.lc.curvature_b().value, c.lc.Q.value, c.M
    s = -np.sign(np.trace(c.lc.kappa.value))
    lhs = s * Rb[:M, c.N - 1, :, :]  # [i, l, m]
    return _amax(lhs - np.einsum("mil->ilm", Q[:, :M, :]))


def _flat(c: PointContext) -> float:
    lc = c.lc
    K = float(np.linalg.det(lc.kappa.value))
    Rs = c.n1 * float((lc.kappa.value ** 2).sum())
    return max(_amax(lc.q.value), _amax(lc.curvature_b().value), _amax(lc.curvature_a().value), abs(K), abs(Rs))


# -- third fundamental form -------------------------------------------------

def _third_inverse(c: PointContext) -> float:
    M = c.M
    qN = c.lc.q.value[-1, :M, :]
    return _amax(c.sph.q1.value @ qN - np.eye(M))


def _third_qtilde(c: PointContext) -> float:
    return _amax(c.sph.qtilde.value - np.einsum("mjs,sl->mjl", c.lc.q.value, c.sph.q1.value))


def _third_duality(c: PointContext) -> float:
    M = c.M
    qN = c.lc.q.value[-1, :M, :]
    worst = 0.0
    for F in c.fields:
        back = c.sph.tgrad(F).value @ qN  # sum_k tilde_k f q_Nks
        worst = max(worst, _amax(back - c.lc.lf.grad(F).value))
    return worst


def _third_support(c: PointContext) -> float:
    lf = c.lc.lf
    xe = lf.e.value[: c.M] @ lf.x.value
    return _amax(c.sph.tgrad(c.sph.w).value - xe)


def _third_position(c: PointContext) -> float:
    lf = c.lc.lf
    tx = c.sph.tgrad(lf.x).value  # [a, j]
    ref = np.einsum("kj,ka->aj", c.sph.q1.value, lf.e.value[: c.M])
    return _amax(tx - ref)


def _third_contraction(c: PointContext) -> float:
    q1 = c.sph.q1.value
    qt = c.sph.qtilde.value[-1, : c.M, :]  # [j, k] = qtilde_Njk
    return abs(float(np.einsum("kj,jk->", q1, qt)) - float(np.trace(q1)))


def _third_beltrami(c: PointContext) -> float:
    lhs, rhs = c.sph.beltrami3_sides()
    return abs(lhs - rhs)


# -- curves -----------------------------------------------------------------

def _direction_sum(c: PointContext) -> float:
    return direction_sum_check(c.patch, c.u, c.rng("dirsum")).residual


def _direction_sum_t0(c: PointContext) -> float:
    return direction_sum_check(c.patch, c.u, c.rng("dirsum-t0")).t0_residual


def _vertical(c: PointContext) -> float:
    quad, direct = vertical_curvature(c.probe_curve(), 0.0)
    return abs(quad - direct)


def _rho_antisym(c: PointContext) -> float:
    rho = rho_matrix(c.probe_curve(), None, 0.0)
    return _amax(rho + rho.T)


def _rho_direct(c: PointContext) -> float:
    curve = c.probe_curve()
    return _amax(rho_matrix(curve, None, 0.0) - rho_matrix_direct(curve, None, 0.0))


def _tangent_curvature(c: PointContext) -> float:
    r = dnu_checks(c.probe_curve(), 0.0)
    return max(r.residual_kstar, r.residual_dnu)


# -- invariance ---------------------------------------------------------------

def invariant_snapshot(patch: SurfacePatch, u) -> dict[str, np.ndarray]:
    """Frame-level invariants compared by the invariance checks."""
    lc = local_connection(patch, u)
    n1 = lc.N - 1.0
    kappa = lc.kappa.value
    g = np.diag([1.0] * lc.M + [0.0])
    return {
        "q": lc.q.value,
        "R": lc.R.value,
        "K": np.array(np.linalg.det(kappa)),
        "Rstar": np.array(n1 * (kappa ** 2).sum()),
        "H": n1 * np.einsum("ij,ikj->k", g, lc.q_full.value),
    }


def _snapshot_gap(a: dict, b: dict) -> float:
    return max(_amax(a[k] - b[k]) for k in a)


def rigid_motion(patch: SurfacePatch, rng: np.random.Generator) -> SurfacePatch:
    """Same patch moved by a random proper rotation and translation."""
    N = patch.ambient_dim
    Q, _ = np.linalg.qr(rng.normal(size=(N, N)))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    shift = rng.normal(size=N)
    inner = patch.embed

    def embed(u):
        x = inner(u)
        return [sum(Q[i, j] * x[j] for j in range(N)) + shift[i] for i in range(N)]

    return patch.with_embedding(embed, name=patch.name)


def reparametrize(patch: SurfacePatch, u0, rng: np.random.Generator, scale: float = 0.3) -> SurfacePatch:
    """Reparametrization fixing ``u0`` whose Jacobian is upper triangular with positive diagonal.

    Each new coordinate bends monotonically and shears by the later ones, so the
    ordered Gram-Schmidt frame (and with it every frame-level quantity) is
    unchanged at corresponding points.
    """
    u0 = np.asarray(u0, dtype=float)
    M = len(u0)
    diag = np.exp(rng.uniform(-scale, scale, size=M))
    bend = rng.uniform(-scale, scale, size=M)
    shear = np.triu(rng.uniform(-scale, scale, size=(M, M)), 1)
    inner = patch.embed

    def phi(v):
        d = [v[l] - u0[l] for l in range(M)]
        out = []
        for l in range(M):
            acc = u0[l] + diag[l] * d[l] + bend[l] * d[l] * d[l]
            for m in range(l + 1, M):
                acc = acc + shear[l, m] * (d[m] + 0.5 * d[m] * d[m])
            out.append(acc)
        return out

    return patch.with_embedding(lambda v: inner(phi(v)), name=patch.name)


def _rigid(c: PointContext) -> float:
    moved = rigid_motion(c.patch, c.rng("rigid"))
    gap = _snapshot_gap(invariant_snapshot(c.patch, c.u), invariant_snapshot(moved, c.u))
    curve = c.probe_curve()
    moved_curve = CurveOnSurface(moved, curve.param, curve.t0, curve.t1, curve.name)
    a, b = vertical_curvature(curve, 0.0)[0], vertical_curvature(moved_curve, 0.0)[0]
    return max(gap, abs(a - b))


def _reparam(c: PointContext) -> float:
    other = reparametrize(c.patch, c.u, c.rng("reparam"))
    return _snapshot_gap(invariant_snapshot(c.patch, c.u), invariant_snapshot(other, c.u))


# -- registry -----------------------------------------------------------------

@dataclass(frozen=True)
class Check:
    id: str
    anchor: str
    tol: float
    fn: Callable[[PointContext], float]
    scope: str = "any"  # any | hypersphere | hyperplane | elliptic
    group: str = "connection"


def _c(id, anchor, tol, fn, scope="any", group="connection") -> Check:
    return Check(id, anchor, tol, fn, scope, group)


CHECKS: tuple[Check, ...] = (
    # connection
    _c("q-antisymmetry", "q_ijm + q_jim = 0 before symmetrizing", 1e-8, _q_antisym),
    _c("gamma-antisymmetry", "Gamma_ijl + Gamma_jil = 0", 1e-8, _gamma_antisym),
    _c("q-jet-vs-fd", "q from exact jets = q from differenced frames", 1e-6, _q_fd),
    _c("commutator", "nabla_l nabla_m f - nabla_m nabla_l f + sum_k nabla_k f Q_lkm = 0", 1e-4, _commutator),
    _c("curvature-dual", "nabla_l q_ikm - nabla_m q_ikl + sum_s q_iks Q_lsm = -sum_s rot_lm(q_isl q_ksm)", 1e-4, _curvature_dual),
    _c("curvature-semicolon", "q_ik{m};l - q_ik{l};m = R_iklm", 1e-4, _curvature_semicolon),
    _c("curvature-antisymmetry", "R_ijlm = -R_jilm = -R_ijml", 1e-6, _curvature_antisym),
    _c("frame-second-derivative", "<nabla_k^2 e_m, e_m> = -sum_s q_msk^2", 1e-4, _frame_second),
    _c("frame-torsion", "<[nabla_l, nabla_m] e_i, e_j> = -sum_s q_ijs Q_lsm", 1e-4, _frame_torsion),
    _c("r-dot-a", "sum_k R_k A_k = 0", 1e-8, _r_dot_a),
    _c("theta-exact", "Theta_lm(df) = 0", 1e-4, _theta_exact),
    _c("theta-coframe", "Theta_lm(omega_j) = Q_ljm", 1e-6, _theta_coframe),
    _c("theta-connection", "Theta_lm(omega_ij) = R_ijlm", 1e-4, _theta_connection),
    _c("position-semicolon", "<x, e_k>_{;l} = delta_kl", 1e-5, _position_semicolon),
    _c("constant-vector", "Y_{j;l} = <nabla_l Y, e_j> = 0 for constant Y", 1e-6, _constant_vector),
    _c("antisym-hessian", "sum lam_ij nabla_i nabla_j f + sum lam_ij q_ikj nabla_k f = 0, lam antisymmetric tangential", 1e-4, _lambda_hessian_antisym),
    # operators
    _c("beltrami-pairs", "closed-form Beltrami = pairwise determinant form", 1e-4, _beltrami_pairs, group="operators"),
    _c("d-product", "D_k(fg) = f D_k g + g D_k f + fg R_k/(N-1)", 1e-6, _d_product, group="operators"),
    _c("d-commutator", "[D_k, nabla_k] f = nabla_k R_k f/(N-1)", 1e-4, _d_commutator, group="operators"),
    _c("d-gradient", "sum_k D_k f e_k = (N-1) grad f - R f/(N-1)", 1e-6, _d_gradient, group="operators"),
    _c("beltrami-delta", "Delta_2 f = sum delta_ij D_i nabla_j f", 1e-4, _beltrami_delta, group="operators"),
    _c("beltrami-epsilon", "Delta^(eps) f = sum_k ((N-1) A_k + sum_s eps_ks R_s/(N-1)) nabla_k f", 1e-4, _beltrami_epsilon, group="operators"),
    _c("lambda-expanded", "Delta^(lam) f = (N-1) sum lam_ij nabla_i nabla_j f - sum lam_ij R_i nabla_j f/(N-1)", 1e-4, _lambda_expanded, group="operators"),
    _c("lambda-sigma", "<Delta^(lam) x, e_k> = (N-1) sum lam_ij q_jki - sum_i lam_ik R_i/(N-1), lam tangential", 1e-4, _lambda_sigma, group="operators"),
    _c("lambda-position", "Delta^(lam) f = <Delta^(lam) x, grad f>, lam antisymmetric", 1e-4, _lambda_position, group="operators"),
    _c("antisym-closed", "Delta^(lam) f = -sum_k ((N-1) A^(lam)_k + sum_i lam_ik R_i/(N-1)) nabla_k f, lam antisymmetric", 1e-4, _antisym_closed, group="operators"),
    _c("antisym-position-r", "<Delta^(lam) x, R> = -(N-1) sum_k A^(lam)_k R_k, lam antisymmetric tangential", 1e-4, _antisym_position_r, group="operators"),
    _c("lambda-a-r", "sum_s A^(lam)_s R^(lam)_s = 0 and the starred analogue", 1e-8, _lambda_a_r, group="operators"),
    _c("antisym-product", "Delta^(lam)(fg) = f Delta^(lam) g + g Delta^(lam) f, lam antisymmetric", 1e-4, _antisym_product, group="operators"),
    _c("symmetric-semicolon", "Delta^(lam) f = (N-1) sum_{i<=j} lam*_ij (nabla_j f)_{;i} + <Delta^(lam) x, grad f>, lam symmetric", 1e-4, _symmetric_semicolon, group="operators"),
    _c("general-semicolon", "semicolon form of Delta^(lam) with the symmetric part of a general lam", 1e-4, _general_semicolon, group="operators"),
    _c("general-hessian", "Delta^(lam) f = (N-1) sum lam+_ij nabla_i nabla_j f + <Delta^(lam) x - H^(lam+), grad f>", 1e-4, _general_hessian, group="operators"),
    _c("pi-antisym", "Pi^(lam) f + sum_k A^(lam)_k D_k(f^2)/f = -f/(2(N-1)) sum lam_ij Theta_ij(R), lam antisymmetric", 1e-4, _pi_antisym, group="operators"),
    _c("pi-general", "Pi^(lam) f = -H^(lam-).D(f^2)/(2f(N-1)) - f/(2(N-1)) sum lam- Theta(R) + f/(N-1) sum lam+_ij nabla_j R_i", 1e-4, _pi_general, group="operators"),
    _c("pi-symmetric", "Pi^(lam) f = eta^(lam) f, lam symmetric", 1e-4, _pi_symmetric, group="operators"),
    _c("pi-metric", "Pi f = eta f with eta = sum g_ij nabla_j R_i/(N-1)", 1e-4, _pi_metric, group="operators"),
    _c("metric-position", "<Delta^(g) x, e_k> = H_k - sum_i g_ik R_i/(N-1)", 1e-4, _metric_position, group="operators"),
    _c("vector-product", "Delta_2<V1,V2> = <Delta_2 V1, V2> + <V1, Delta_2 V2> + 2(N-1) sum_k <nabla_k V1, nabla_k V2>", 1e-4, _vector_product, group="operators"),
    _c("frame-laplacian", "<Delta_2 e_k, e_k> = -(N-1) sum_jl q_kjl^2", 1e-4, _frame_laplacian, group="operators"),
    _c("normal-laplacian", "<Delta_2 e_N, e_N> = -(N-1) sum kappa_km^2", 1e-4, _normal_laplacian, group="operators"),
    _c("position-laplacian-tangent", "<Delta_2 x, e_k> = h_k - R_k/(N-1), k < N", 1e-4, lambda c: _position_laplacian(c, slice(None, -1)), group="operators"),
    _c("position-laplacian-normal", "<Delta_2 x, e_N> = h_N - R_N/(N-1)", 1e-4, lambda c: _position_laplacian(c, slice(-1, None)), group="operators"),
    # closed forms
    _c("sphere-kappa", "kappa = -I up to a global sign", 1e-5, _sphere_kappa, "hypersphere", "sphere"),
    _c("sphere-rstar-k", "R*_k = N-1", 1e-4, _sphere_rstar_k, "hypersphere", "sphere"),
    _c("sphere-rstar", "R* = N(N-1)", 1e-3, _sphere_rstar, "hypersphere", "sphere"),
    _c("sphere-rn", "R_N = 0", 1e-4, _sphere_rn, "hypersphere", "sphere"),
    _c("sphere-gauss", "|K| = 1", 1e-5, _sphere_gauss, "hypersphere", "sphere"),
    _c("sphere-curvature", "-sum_s rot_lm(q_isl q_Nsm) = Q_mil (kappa = -I orientation)", 1e-4, _sphere_curvature, "hypersphere", "sphere"),
    _c("flat", "q = 0, R_ijlm = 0, K = 0, R* = 0", 1e-8, _flat, "hyperplane", "flat"),
    _c("flat-closed-r", "Theta_lm(R) = 0", 1e-8, _sr_closed_plane, "hyperplane", "flat"),
    # third fundamental form
    _c("third-inverse", "sum_j q1_mNj q_Njs = delta_ms", 1e-8, _third_inverse, "elliptic", "third"),
    _c("third-qtilde", "qtilde_mjl = sum_s q_mjs q1_sNl", 1e-10, _third_qtilde, "elliptic", "third"),
    _c("third-duality", "nabla_s f = sum_k tilde_k f q_Nks", 1e-8, _third_duality, "elliptic", "third"),
    _c("third-support", "tilde_k w = <x, e_k> with w = <x, e_N>", 1e-5, _third_support, "elliptic", "third"),
    _c("third-position", "tilde_j x = sum_k q1_kNj e_k", 1e-5, _third_position, "elliptic", "third"),
    _c("third-contraction", "sum_kj q1_kNj qtilde_Njk = sum_k q1_kNk", 1e-8, _third_contraction, "elliptic", "third"),
    _c("third-beltrami", "<Delta_III x, e_N> = -(N-1) sum_l q1_lNl", 1e-3, _third_beltrami, "elliptic", "third"),
    # curves
    _c("direction-sum", "sum over orthonormal directions of vertical curvature = trace kappa", 1e-5, _direction_sum, group="curves"),
    _c("direction-sum-t0", "direction sum of a I + b III + c <dx, de_N> = (N-1) a + b sum q_Nkm^2 + c sum q_Nkk", 1e-8, _direction_sum_t0, group="curves"),
    _c("vertical-curvature", "sum kappa_km (omega_k/ds)(omega_m/ds) = <dt/ds, e_N>", 1e-5, _vertical, group="curves"),
    _c("rho-antisymmetry", "1/rho_ij = -1/rho_ji", 1e-6, _rho_antisym, group="curves"),
    _c("rho-direct", "connection form of 1/rho_ij = <dt_i/ds, t_j>", 1e-5, _rho_direct, group="curves"),
    _c("tangent-curvature", "k* = sqrt((N-1)^2 k^2 + (dR/ds)^2/(N-1)^2) and <D nu, nu> = -dR/(N-1)", 1e-4, _tangent_curvature, group="curves"),
    # invariance
    _c("rigid-motion", "q, R_k, K, R*, H_k and vertical curvature unchanged by ambient rigid motions", 1e-6, _rigid, group="invariance"),
    _c("reparametrization", "q, R_k, K, R*, H_k unchanged by frame-preserving reparametrization", 1e-5, _reparam, group="invariance"),
)

CHECK_INDEX = {c.id: c for c in CHECKS}


def check_ids() -> list[str]:
    return [c.id for c in CHECKS]


def applies(check: Check, patch: SurfacePatch, ctx: PointContext | None = None) -> bool:
    """Whether ``check`` is meaningful on ``patch`` (and at ``ctx`` for point scopes)."""
    if check.scope == "hypersphere":
        return patch.name == "hypersphere" and patch.params[1] == 1.0
    if check.scope == "hyperplane":
        return patch.name == "hyperplane"
    if check.scope == "elliptic":
        return patch.name != "hyperplane" and (ctx is None or ctx.elliptic)
    return True


def resolve_checks(selection: Sequence[str] | None) -> list[Check]:
    """Expand ids, group names and ``all`` into registry order."""
    if not selection or list(selection) == ["all"]:
        return list(CHECKS)
    groups = {c.group for c in CHECKS}
    wanted = set()
    for s in selection:
        if s == "all":
            wanted |= set(CHECK_INDEX)
        elif s in CHECK_INDEX:
            wanted.add(s)
        elif s in groups:
            wanted |= {c.id for c in CHECKS if c.group == s}
        else:
            raise ConfigError(f"unknown check {s!r}")
    return [c for c in CHECKS if c.id in wanted]


@dataclass
class CheckResult:
    check_id: str
    anchor: str
    max_residual: float
    tolerance: float
    passed: bool
    points: int
    skipped: int = 0
    worst_point: list | None = None

    def as_dict(self) -> dict:
        return {
            "check_id": self.check_id,
            "anchor": self.anchor,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "points": self.points,
            "skipped": self.skipped,
            "worst_point": self.worst_point,
        }


@dataclass
class IdentityReport:
    surface: str
    params: list
    seed: int
    results: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> int:
        return sum(r.passed for r in self.results)

    @property
    def failed(self) -> int:
        return len(self.results) - self.passed

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def failures(self) -> list[str]:
        return [r.check_id for r in self.results if not r.passed]

    def get(self, check_id: str) -> CheckResult:
        for r in self.results:
            if r.check_id == check_id:
                return r
        raise KeyError(check_id)

    def as_dict(self) -> dict:
        return {
            "surface": self.surface,
            "params": self.params,
            "seed": self.seed,
            "results": [r.as_dict() for r in self.results],
            "summary": {"total": len(self.results), "passed": self.passed, "failed": self.failed},
        }


def _evaluate_point(patch: SurfacePatch, u, seed: int, fault: float, checks: Sequence[Check]) -> list[float | None]:
    ctx = PointContext(patch, u, seed, fault)
    out = []
    for chk in checks:
        if not applies(chk, patch, ctx):
            out.append(None)
            continue
        try:
            r = float(chk.fn(ctx))
        except (GeometryError, np.linalg.LinAlgError):
            r = float("inf")  # a check that cannot be evaluated counts as failed
        out.append(r if np.isfinite(r) else float("inf"))
    return out


def run_checks(
    patch: SurfacePatch,
    points: Sequence | None = None,
    checks: Sequence[str] | None = None,
    tolerances: dict[str, float] | None = None,
    seed: int = 0,
    n_points: int = 5,
    fault: float = 0.0,
    workers: int = 1,
) -> IdentityReport:
    """Evaluate the selected checks at ``points`` (seeded samples when omitted).

    Rows follow registry order; scope-restricted checks are dropped unless
    they were named explicitly, in which case they report as skipped.
    """
    explicit = bool(checks) and list(checks) != ["all"]
    selected = resolve_checks(checks)
    if not explicit:
        selected = [c for c in selected if applies(c, patch)]
    tolerances = dict(tolerances or {})
    unknown = set(tolerances) - set(CHECK_INDEX) - {"*"}
    if unknown:
        raise ConfigError(f"tolerance override for unknown checks {sorted(unknown)}")
    if points is None:
        points = sample_points(patch, n_points, np.random.default_rng(seed))
    points = [np.asarray(p, dtype=float) for p in points]
    if not points:
        raise GeometryError("run_checks needs at least one point")

    seeds = [seed * 1_000_003 + i for i in range(len(points))]
    args = [(patch, u, s, fault, selected) for u, s in zip(points, seeds)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda a: _evaluate_point(*a), args))
    else:
        rows = [_evaluate_point(*a) for a in args]

    report = IdentityReport(patch.name, list(patch.params), seed)
    for j, chk in enumerate(selected):
        vals = [(r[j], p) for r, p in zip(rows, points) if r[j] is not None]
        tol = tolerances.get(chk.id, tolerances.get("*", chk.tol))
        if vals:
            worst, where = max(vals, key=lambda t: t[0])
            report.results.append(CheckResult(chk.id, chk.anchor, worst, tol, worst <= tol, len(vals), len(points) - len(vals), where.tolist()))
        else:
            report.results.append(CheckResult(chk.id, chk.anchor, 0.0, tol, True, 0, len(points), None))
    return report
