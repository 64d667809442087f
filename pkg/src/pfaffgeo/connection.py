"""Connection coefficients, curvature, semicolon derivatives and the Theta operators.

Index conventions (0-based internally): frame indices run over ``0..N-1`` with
``N-1`` the normal, direction indices over ``0..M-1``.  Pfaff derivatives in
the normal direction vanish, so any table carrying a direction slot is
extended by zero when a formula sums that slot up to ``N``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import jets as J
from .errors import GeometryError
from .frames import LocalFrame, frame_at, local_frame
from .surface import SurfacePatch


def eps_matrix(n: int) -> np.ndarray:
    """``eps[k, s] = -1`` for k < s, ``+1`` for k > s, 0 on the diagonal."""
    return np.tril(np.ones((n, n)), -1) - np.triu(np.ones((n, n)), 1)


@dataclass
class ConnectionData:
    q: np.ndarray  # (N, N, M)
    gamma: np.ndarray  # (N, N, M)
    Q: np.ndarray  # (M, N, M)
    A: np.ndarray  # (N,)
    Rvec: np.ndarray  # (N,)
    eps: np.ndarray  # (N, N)
    kappa: np.ndarray  # (M, M)
    Rcurv: np.ndarray  # (N, N, M, M)
    antisym_residual: float = 0.0

    @property
    def N(self) -> int:
        return self.q.shape[0]

    @property
    def M(self) -> int:
        return self.q.shape[2]


def frame_aware(fn: Callable) -> Callable:
    """Mark a field so it receives the :class:`LocalFrame` instead of the parameters.

    Lets fields such as ``<x, e_k>`` be written in terms of frame quantities.
    """
    fn.frame_aware = True
    return fn


class LocalConnection:
    """Jet-valued connection data built on a :class:`LocalFrame`.

    ``q`` and everything derived from it carry one derivative order less than
    the frame.  Padded variants (suffix ``_full``) extend direction slots to
    length N with zeros.
    """

    def __init__(self, lf: LocalFrame, fault: float = 0.0):
        self.lf = lf
        N, M = lf.N, lf.M
        self.N, self.M = N, M
        de = lf.e.gradient()  # (N, N_amb, M): d e_i / du_l
        self.gamma = J.einsum("ial,ja->ijl", de, lf.e)
        q_raw = J.einsum("ijl,lm->ijm", self.gamma, lf.binv)
        self.antisym_residual = float(np.abs((q_raw + q_raw.transpose(1, 0, 2)).value).max())
        q = (q_raw - q_raw.transpose(1, 0, 2)) * 0.5
        if fault:
            # Deterministic corruption used by the fault-injection path.
            bump = np.zeros((N, N, M))
            bump[0, 1, 0], bump[1, 0, 0] = fault, -fault
            q = q + J.Jet(q.space, _constant_coeffs(bump, q.space), q.order) * lf.field(lambda u: 1.0 + u[0] ** 2)
        self.q = q
        self.Q = q[:M] - q[:M].transpose(2, 1, 0)
        self.eps = eps_matrix(N)
        self.A = J.einsum("lsm,lm->s", self.Q, np.triu(np.ones((M, M)), 1))
        self.R = J.einsum("ks,s->k", self.eps, self.A)
        self.kappa = q[:M, N - 1, :]

    # padded tables -------------------------------------------------------
    @property
    def q_full(self) -> J.Jet:
        return pad_axes(self.q, {2: self.N})

    @property
    def Q_full(self) -> J.Jet:
        return pad_axes(self.Q, {0: self.N, 2: self.N})

    # derived quantities --------------------------------------------------
    def curvature_a(self) -> J.Jet:
        """``nabla_l q_ikm - nabla_m q_ikl + sum_s q_iks Q_lsm`` as (N, N, M, M)."""
        gq = self.lf.grad(self.q)  # [i, k, m, l] = nabla_l q_ikm
        M = self.M
        return gq.transpose(0, 1, 3, 2) - gq + J.einsum("iks,lsm->iklm", self.q, self.Q[:, :M, :])

    def curvature_b(self) -> J.Jet:
        """``-sum_s rot_lm(q_isl q_ksm)`` as (N, N, M, M)."""
        P = J.einsum("isl,ksm->iklm", self.q, self.q)
        return -(P - P.transpose(0, 1, 3, 2))

    def semicolon(self, t, slots: Sequence[int]) -> J.Jet:
        """Semicolon derivative with a trailing direction axis of length M.

        ``slots`` are the bracketed axes of ``t`` (each of length N or M); every
        bracketed slot subtracts one contraction with ``q``.
        """
        t = J.asjet(t, self.lf.space)
        out = self.lf.grad(t)
        for slot in slots:
            if not 0 <= slot < t.ndim:
                raise GeometryError(f"bracket slot {slot} out of range for a rank-{t.ndim} table")
            n = t.shape[slot]
            conn = self.q[:n, :n, :]  # q[k, nu, l]
            moved = t.transpose(*_move_last(t.ndim, slot))  # slot moved to the end
            corr = J.einsum("...v,kvl->...kl", moved, conn)
            back = _insert_axis_perm(t.ndim, slot)
            out = out - corr.transpose(*back)
        return out

    def theta(self, a) -> J.Jet:
        """``Theta_lm(a) = nabla_l a_m - nabla_m a_l + sum_k a_k Q_lkm`` for l, m < M.

        ``a`` holds N form (or frame-vector) coefficients; the result is M x M.
        """
        a = J.asjet(a, self.lf.space)
        M = self.M
        ga = self.lf.grad(a)[:M]  # [m, l] = nabla_l a_m
        return ga.T - ga + J.einsum("k,lkm->lm", a, self.Q)

    def field(self, f) -> J.Jet:
        if getattr(f, "frame_aware", False):
            return J.asjet(f(self.lf), self.lf.space)
        return self.lf.field(f)

    def data(self) -> ConnectionData:
        return ConnectionData(
            q=self.q.value,
            gamma=self.gamma.value,
            Q=self.Q.value,
            A=self.A.value,
            Rvec=self.R.value,
            eps=self.eps,
            kappa=self.kappa.value,
            Rcurv=self.curvature_b().value,
            antisym_residual=self.antisym_residual,
        )


def _constant_coeffs(arr: np.ndarray, space: J.JetSpace) -> np.ndarray:
    c = np.zeros(arr.shape + (space.size,))
    c[..., 0] = arr
    return c


def _move_last(ndim: int, slot: int) -> tuple[int, ...]:
    return tuple(a for a in range(ndim) if a != slot) + (slot,)


def _insert_axis_perm(ndim: int, slot: int) -> tuple[int, ...]:
    """Permutation taking (...others, slot, l) back to the original order plus l."""
    others = [a for a in range(ndim) if a != slot]
    pos = {a: i for i, a in enumerate(others)}
    pos[slot] = ndim - 1
    return tuple(pos[a] for a in range(ndim)) + (ndim,)


def pad_axes(t: J.Jet, sizes: dict[int, int]) -> J.Jet:
    """Zero-extend the given axes of a jet table."""
    width = [(0, 0)] * (t.ndim + 1)
    for ax, n in sizes.items():
        width[ax] = (0, n - t.shape[ax])
    return J.Jet(t.space, np.pad(t.c, width), t.order)


@lru_cache(maxsize=256)
def _local_connection_cached(patch: SurfacePatch, key: tuple, order: int, engine: str, fault: float) -> LocalConnection:
    return LocalConnection(local_frame(patch, key, order, engine), fault)


def local_connection(patch: SurfacePatch, u, order: int = 3, engine: str = "auto", fault: float = 0.0) -> LocalConnection:
    key = tuple(float(x) for x in np.asarray(u, dtype=float))
    return _local_connection_cached(patch, key, order, engine, float(fault))


def connection_at(patch: SurfacePatch, u, engine: str = "auto") -> ConnectionData:
    """All connection tables at ``u``."""
    return local_connection(patch, u, engine=engine).data()


def connection_fd(patch: SurfacePatch, u, h: float = 1e-5) -> np.ndarray:
    """``q`` from central differences of :func:`frame_at`; an independent oracle."""
    u = np.asarray(u, dtype=float)
    fr = frame_at(patch, u)
    M = len(u)
    de = []
    for l in range(M):
        du = np.zeros(M)
        du[l] = h
        de.append((frame_at(patch, u + du).e - frame_at(patch, u - du).e) / (2 * h))
    gamma = np.einsum("lia,ja->ijl", np.array(de), fr.e)
    q = gamma @ np.linalg.inv(fr.b[:M])
    return 0.5 * (q - q.transpose(1, 0, 2))


def curvature_two_ways(patch: SurfacePatch, u, engine: str = "auto") -> tuple[np.ndarray, np.ndarray]:
    lc = local_connection(patch, u, engine=engine)
    return lc.curvature_a().value, lc.curvature_b().value


def semicolon_derivative(t, bracket_slots: Sequence[int], l: int, patch: SurfacePatch, u, engine: str = "auto") -> np.ndarray:
    """``t_{..{k}..;l}`` at ``u`` with 1-based slots and direction ``l``.

    ``t`` is a field returning a table whose bracketed axes have length N or M.
    """
    lc = local_connection(patch, u, engine=engine)
    if not 1 <= l <= lc.M:
        raise GeometryError(f"direction index {l} outside 1..{lc.M}")
    table = lc.field(t)
    return lc.semicolon(table, [s - 1 for s in bracket_slots]).value[..., l - 1]


def theta1(Y, l: int, m: int, patch: SurfacePatch, u, engine: str = "auto") -> float:
    """``Theta^(1)_lm`` of a vector field given by its N frame components (1-based l, m)."""
    return _theta(Y, l, m, patch, u, engine)


def theta2(a, l: int, m: int, patch: SurfacePatch, u, engine: str = "auto") -> float:
    """``Theta^(2)_lm`` of a Pfaff form given by its N coefficients (1-based l, m)."""
    return _theta(a, l, m, patch, u, engine)


def _theta(a, l: int, m: int, patch: SurfacePatch, u, engine: str) -> float:
    lc = local_connection(patch, u, engine=engine)
    if not (1 <= l <= lc.M and 1 <= m <= lc.M):
        raise GeometryError(f"Theta indices must lie in 1..{lc.M}")
    return float(lc.theta(lc.field(a)).value[l - 1, m - 1])
