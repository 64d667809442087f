"""Derived differential operators: D_k, Beltrami operators, Pi, eta and invariants.

All operators work on jets from :class:`LocalConnection`; frame indices run
over the full range ``0..N-1`` with the normal Pfaff derivative equal to zero
and ``Q`` extended by zero on normal direction slots.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import jets as J
from .connection import LocalConnection, local_connection, pad_axes
from .errors import GeometryError
from .surface import SurfacePatch

SYM_TOL = 1e-12


@dataclass(frozen=True)
class LambdaField:
    """An N x N weight table, constant or point dependent.

    ``table`` is either an array or a callable receiving the
    :class:`LocalConnection` and returning an (N, N) array or jet.
    """

    name: str
    table: object
    symmetry: str = "general"

    def at(self, lc: LocalConnection) -> J.Jet:
        t = self.table(lc) if callable(self.table) else np.asarray(self.table, dtype=float)
        t = J.asjet(t, lc.lf.space)
        if t.shape != (lc.N, lc.N):
            raise GeometryError(f"lambda field {self.name!r} has shape {t.shape}, expected {(lc.N, lc.N)}")
        v = t.value
        if self.symmetry == "symmetric" and np.abs(v - v.T).max() > SYM_TOL:
            raise GeometryError(f"lambda field {self.name!r} declared symmetric but is not")
        if self.symmetry == "antisymmetric" and np.abs(v + v.T).max() > SYM_TOL:
            raise GeometryError(f"lambda field {self.name!r} declared antisymmetric but is not")
        return t

    def symmetric_part(self) -> "LambdaField":
        return LambdaField(self.name + "+", lambda lc: _sym(self.at(lc)), "symmetric")

    def antisymmetric_part(self) -> "LambdaField":
        return LambdaField(self.name + "-", lambda lc: _antisym(self.at(lc)), "antisymmetric")


def _sym(t: J.Jet) -> J.Jet:
    return (t + t.T) * 0.5


def _antisym(t: J.Jet) -> J.Jet:
    return (t - t.T) * 0.5


def epsilon_field() -> LambdaField:
    return LambdaField("eps", lambda lc: lc.eps, "antisymmetric")


def delta_field() -> LambdaField:
    return LambdaField("delta", lambda lc: np.eye(lc.N), "symmetric")


def metric_field(kind: str = "frame") -> LambdaField:
    """The first fundamental form as a weight table.

    ``kind="frame"``: components in the orthonormal coframe (identity on the
    tangential block, zero normal row and column); reparametrization invariant.
    ``kind="coordinate"``: the coordinate metric ``g_ij`` placed on the
    tangential block; depends on the chosen parameters.
    """
    if kind == "frame":
        return LambdaField("g", lambda lc: np.diag([1.0] * lc.M + [0.0]), "symmetric")
    if kind == "coordinate":
        return LambdaField("g-coord", lambda lc: pad_axes(lc.lf.g, {0: lc.N, 1: lc.N}), "symmetric")
    raise GeometryError(f"unknown metric kind {kind!r}")


def constant_field(table, name: str = "const") -> LambdaField:
    t = np.asarray(table, dtype=float)
    if np.abs(t - t.T).max() <= SYM_TOL:
        sym = "symmetric"
    elif np.abs(t + t.T).max() <= SYM_TOL:
        sym = "antisymmetric"
    else:
        sym = "general"
    return LambdaField(name, t, sym)


def builtin_lambda(name: str) -> LambdaField:
    table = {"eps": epsilon_field, "delta": delta_field, "g": metric_field}
    if name == "g-coord":
        return metric_field("coordinate")
    if name not in table:
        raise GeometryError(f"unknown lambda field {name!r}")
    return table[name]()


class LocalOperators:
    """Operator algebra at one point, on jet-valued fields."""

    def __init__(self, lc: LocalConnection):
        self.lc = lc
        self.lf = lc.lf
        self.N = lc.N
        self.n1 = lc.N - 1.0
        self.R = lc.R
        self.Qf = lc.Q_full
        self.qf = lc.q_full

    def field(self, f) -> J.Jet:
        return self.lc.field(f)

    def grad(self, F) -> J.Jet:
        """Trailing axis k holds ``nabla_k F`` for k < N (normal entry zero)."""
        return self.lf.grad_full(F)

    def hess(self, F) -> J.Jet:
        """``[..., j, i] = nabla_i nabla_j F`` (order of application preserved)."""
        return self.grad(self.grad(F))

    def D(self, F) -> J.Jet:
        """``[..., k] = D_k F = (N-1) nabla_k F - R_k F / (N-1)``."""
        F = J.asjet(F, self.lf.space)
        return self.grad(F) * self.n1 - J.einsum("...,k->...k", F, self.R) * (1.0 / self.n1)

    def beltrami2(self, F) -> J.Jet:
        """Closed form ``sum_k ((N-1) nabla_k^2 F - R_k nabla_k F / (N-1))``."""
        H = self.hess(F)
        G = self.grad(F)
        return _trace_last2(H) * self.n1 - J.einsum("...k,k->...", G, self.R) * (1.0 / self.n1)

    def beltrami2_pairs(self, F) -> J.Jet:
        """Double sum over pairs ``l < m`` with the 2x2 determinant correction."""
        N = self.N
        H = self.hess(F)
        G = self.grad(F)
        upper = np.triu(np.ones((N, N)), 1)
        d2 = _trace_last2(H)
        # sum_{l<m} (H_ll + H_mm) = (N-1) sum_k H_kk
        second = d2 * float(N - 1)
        # sum_{l<m} sum_{i<j} (G_i Q_ljm - G_j Q_lim)
        W = J.einsum("lim,lm->i", self.Qf, upper)  # sum_{l<m} Q_lim
        Gi_Wj = J.einsum("...i,j->...ij", G, W)
        det = Gi_Wj - Gi_Wj.transpose(*_swap_last2(Gi_Wj.ndim))
        corr = J.einsum("...ij,ij->...", det, upper)
        return second + corr * (1.0 / self.n1)

    def beltrami_lambda(self, F, lam: J.Jet) -> J.Jet:
        """``sum_ij lam_ij D_i nabla_j F`` evaluated directly."""
        H = self.hess(F)  # [..., j, i]
        G = self.grad(F)
        DG = H.transpose(*_swap_last2(H.ndim)) * self.n1 - J.einsum("i,...j->...ij", self.R, G) * (1.0 / self.n1)
        return J.einsum("...ij,ij->...", DG, lam)

    def beltrami_lambda_expanded(self, F, lam: J.Jet) -> J.Jet:
        """``(N-1) sum lam_ij nabla_i nabla_j F - sum lam_ij R_i nabla_j F / (N-1)``."""
        H = self.hess(F)
        G = self.grad(F)
        first = J.einsum("...ji,ij->...", H, lam) * self.n1
        second = J.einsum("...j,ij->...", G, J.einsum("i,ij->ij", self.R, lam))
        return first - second * (1.0 / self.n1)

    def pi_lambda(self, F, lam: J.Jet) -> J.Jet:
        """``sum_ij lam_ij [D_i, nabla_j] F`` from the two orderings."""
        H = self.hess(F)
        G = self.grad(F)
        DG = H.transpose(*_swap_last2(H.ndim)) * self.n1 - J.einsum("i,...j->...ij", self.R, G) * (1.0 / self.n1)
        gD = self.grad(self.D(F))  # [..., i, j] = nabla_j D_i F
        return J.einsum("...ij,ij->...", DG - gD, lam)

    def eta(self, lam: J.Jet) -> J.Jet:
        """``sum_ij lam_ij nabla_j R_i / (N-1)``."""
        return J.einsum("ij,ij->", self.grad(self.R), lam) * (1.0 / self.n1)

    def theta_full(self, a) -> J.Jet:
        """Theta over the full N x N index range."""
        a = J.asjet(a, self.lf.space)
        ga = self.grad(a)  # [m, l] = nabla_l a_m
        return ga.T - ga + J.einsum("k,lkm->lm", a, self.Qf)

    def A_lambda(self, lam: J.Jet) -> J.Jet:
        """``A^(lam)_k = sum_{i<j} lam_ij Q_ikj``."""
        upper = np.triu(np.ones((self.N, self.N)), 1)
        return J.einsum("ikj,ij->k", self.Qf, J.einsum("ij,ij->ij", lam, upper))

    def semicolon_grad(self, F) -> J.Jet:
        """``[j, i] = (nabla_j F)_{;i} = nabla_i nabla_j F - sum_k q_jki nabla_k F``."""
        H = self.hess(F)
        G = self.grad(F)
        return H - J.einsum("k,jki->ji", G, self.qf)

    def position(self) -> J.Jet:
        return self.lf.x

    def sigma(self, lam: J.Jet) -> J.Jet:
        """``(N-1) sum lam_ij q_jki - sum_i lam_ik R_i / (N-1)``."""
        return J.einsum("ij,jki->k", lam, self.qf) * self.n1 - J.einsum("ik,i->k", lam, self.R) * (1.0 / self.n1)


def _trace_last2(H: J.Jet) -> J.Jet:
    n = H.shape[-1]
    return J.einsum("...kl,kl->...", H, np.eye(n))


def _swap_last2(ndim: int) -> tuple[int, ...]:
    axes = list(range(ndim))
    axes[-1], axes[-2] = axes[-2], axes[-1]
    return tuple(axes)


def local_operators(patch: SurfacePatch, u, engine: str = "auto") -> LocalOperators:
    return LocalOperators(local_connection(patch, u, engine=engine))


def _scalar(x: J.Jet) -> float:
    return float(np.asarray(x.value))


# public point-wise API --------------------------------------------------------

def d_k(f, k: int, patch: SurfacePatch, u, engine: str = "auto") -> float:
    """``D_k f`` at ``u`` (1-based k in 1..N)."""
    ops = local_operators(patch, u, engine)
    if not 1 <= k <= ops.N:
        raise GeometryError(f"k must lie in 1..{ops.N}")
    return float(ops.D(ops.field(f)).value[k - 1])


def beltrami2(f, patch: SurfacePatch, u, engine: str = "auto", form: str = "closed") -> float:
    """Beltrami operator of a scalar field; ``form="pairs"`` uses the pairwise expansion."""
    ops = local_operators(patch, u, engine)
    F = ops.field(f)
    return _scalar(ops.beltrami2(F) if form == "closed" else ops.beltrami2_pairs(F))


def beltrami_lambda(f, lam: LambdaField, patch: SurfacePatch, u, engine: str = "auto") -> float:
    ops = local_operators(patch, u, engine)
    return _scalar(ops.beltrami_lambda(ops.field(f), lam.at(ops.lc)))


def pi_lambda(f, lam: LambdaField, patch: SurfacePatch, u, engine: str = "auto") -> float:
    ops = local_operators(patch, u, engine)
    return _scalar(ops.pi_lambda(ops.field(f), lam.at(ops.lc)))


def eta(lam: LambdaField, patch: SurfacePatch, u, engine: str = "auto") -> float:
    ops = local_operators(patch, u, engine)
    return _scalar(ops.eta(lam.at(ops.lc)))


@dataclass
class OperatorReport:
    K: float
    H: np.ndarray
    h: np.ndarray
    hstar: np.ndarray
    Rstar: float
    Rstar_j: np.ndarray
    Rvec: np.ndarray
    sigma: np.ndarray | None = None
    flat: bool = False
    two_minimal: bool = False

    def as_dict(self) -> dict:
        out = {
            "K": self.K,
            "H": self.H.tolist(),
            "h": self.h.tolist(),
            "hstar": self.hstar.tolist(),
            "Rstar": self.Rstar,
            "Rstar_j": self.Rstar_j.tolist(),
            "R": self.Rvec.tolist(),
            "flat": self.flat,
            "two_minimal": self.two_minimal,
        }
        if self.sigma is not None:
            out["sigma"] = self.sigma.tolist()
        return out


def invariants_report(
    patch: SurfacePatch,
    u,
    lam: LambdaField | None = None,
    metric: LambdaField | None = None,
    tol: float = 1e-8,
    engine: str = "auto",
) -> OperatorReport:
    """Curvature invariants at ``u``.

    ``H`` uses ``metric`` (default: the frame metric); ``sigma`` is filled when
    a weight table ``lam`` is supplied.
    """
    ops = local_operators(patch, u, engine)
    lc = ops.lc
    n1 = ops.n1
    q = lc.q_full.value
    kappa = lc.kappa.value
    R = lc.R.value
    g = (metric or metric_field()).at(lc).value
    h = n1 * np.einsum("lkl->k", q)
    H = n1 * np.einsum("ij,ikj->k", g, q)
    Rstar_j = n1 * (kappa ** 2).sum(axis=0)
    sigma = ops.sigma(lam.at(lc)).value if lam is not None else None
    return OperatorReport(
        K=float(np.linalg.det(kappa)),
        H=H,
        h=h,
        hstar=h - R / n1,
        Rstar=float(Rstar_j.sum()),
        Rstar_j=Rstar_j,
        Rvec=R,
        sigma=sigma,
        flat=bool(np.abs(kappa).max() <= tol),
        two_minimal=bool(np.abs(h).max() <= tol),
    )


@dataclass
class SRReport:
    max_residual: float
    residuals: list = field(default_factory=list)
    threshold: float = 1e-3

    @property
    def verdict(self) -> str:
        return "not S-R" if self.max_residual > self.threshold else "consistent with S-R"


def sr_diagnostic(patch: SurfacePatch, grid: Sequence, threshold: float = 1e-3, engine: str = "auto") -> SRReport:
    """Closedness of the form ``R = sum_k R_k omega_k`` over a set of points.

    A nonzero ``Theta(R)`` anywhere certifies that ``R`` is not exact.
    """
    grid = list(grid)
    if not grid:
        raise GeometryError("sr_diagnostic needs at least one point")
    res = []
    for u in grid:
        lc = local_connection(patch, u, engine=engine)
        res.append(float(np.abs(lc.theta(lc.R).value).max()))
    return SRReport(max(res), res, threshold)
