"""Calculus of the third fundamental form.

Differentiation against the forms ``omega_Nk`` uses the inverse connection
``q1`` (``sum_j q1_mNj q_Njs = delta_ms``) on the tangential block.  Tables are
stored with the middle ``N`` index dropped: ``q1[m, j] = q1_mNj``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets as J
from .connection import LocalConnection, local_connection
from .errors import ParabolicPointError
from .surface import SurfacePatch

DET_TOL = 1e-10


@dataclass
class SphericalData:
    q1: np.ndarray  # (M, M)
    qtilde: np.ndarray  # (N, N, M)
    Atilde: np.ndarray  # (N,)
    Rtilde: np.ndarray  # (N,)
    w: float


class LocalSpherical:
    def __init__(self, lc: LocalConnection):
        self.lc = lc
        self.lf = lc.lf
        N, M = lc.N, lc.M
        self.N, self.M = N, M
        self.n1 = N - 1.0
        qN = lc.q[N - 1, :M, :]  # q_Njs
        if abs(np.linalg.det(qN.value)) < DET_TOL:
            raise ParabolicPointError(f"third fundamental form degenerate at {self.lf.u} (det kappa ~ 0)")
        self.q1 = J.inverse(qN)
        self.qtilde = J.einsum("mjs,sl->mjl", lc.q, self.q1)
        self.Qtilde = self.qtilde[:M] - self.qtilde[:M].transpose(2, 1, 0)
        self.Atilde = J.einsum("lsm,lm->s", self.Qtilde, np.triu(np.ones((M, M)), 1))
        self.Rtilde = J.einsum("ks,s->k", lc.eps, self.Atilde)
        self.w = J.dot(self.lf.x, self.lf.e[N - 1])

    def tgrad(self, F) -> J.Jet:
        """Trailing axis l holds ``sum_s nabla_s F q1_sNl`` (length M)."""
        return J.einsum("...s,sl->...l", self.lf.grad(F), self.q1)

    def beltrami3(self, F) -> J.Jet:
        """``(N-1) sum_j tilde_j^2 F - sum_j (tilde_j F) Rtilde_j / (N-1)``."""
        T = self.tgrad(F)
        TT = self.tgrad(T)
        M = self.M
        return J.einsum("...jk,jk->...", TT, np.eye(M)) * self.n1 - J.einsum("...j,j->...", T, self.Rtilde[:M]) * (1.0 / self.n1)

    def beltrami3_sides(self) -> tuple[float, float]:
        lhs = float(self.beltrami3(self.lf.x).value @ self.lf.e.value[-1])
        rhs = -self.n1 * float(np.trace(self.q1.value))
        return lhs, rhs

    def data(self) -> SphericalData:
        return SphericalData(
            q1=self.q1.value,
            qtilde=self.qtilde.value,
            Atilde=self.Atilde.value,
            Rtilde=self.Rtilde.value,
            w=float(self.w.value),
        )


def local_spherical(patch: SurfacePatch, u, engine: str = "auto") -> LocalSpherical:
    return LocalSpherical(local_connection(patch, u, engine=engine))


def spherical_at(patch: SurfacePatch, u, engine: str = "auto") -> SphericalData:
    return local_spherical(patch, u, engine).data()


def tilde_gradient(f, patch: SurfacePatch, u, engine: str = "auto") -> np.ndarray:
    """Derivatives of ``f`` against ``omega_N1 .. omega_NM``."""
    ls = local_spherical(patch, u, engine)
    return ls.tgrad(ls.lc.field(f)).value


def beltrami3_check(patch: SurfacePatch, u, engine: str = "auto") -> float:
    """``|<Delta3 x, e_N> + (N-1) trace q1|`` at an elliptic point."""
    lhs, rhs = local_spherical(patch, u, engine).beltrami3_sides()
    return abs(lhs - rhs)
