"""Adapted orthonormal frames, first-form coefficients and Pfaff gradients.

Internally everything is carried as Taylor jets around the evaluation point
(:class:`LocalFrame`), so derivatives of frame quantities are exact; the
public helpers return plain arrays at the point.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import jets as J
from .errors import DegeneracyError
from .surface import SurfacePatch, taylor

RANK_TOL = 1e-10

ScalarField = Callable[[Sequence], object]


@dataclass
class FrameData:
    """Frame at a point: rows of ``e`` are the frame vectors, ``e[-1]`` the normal.

    ``b[k, l] = <e_k, dx/du_l>`` (so the last row vanishes) and ``g`` is the
    coordinate metric.
    """

    e: np.ndarray
    b: np.ndarray
    g: np.ndarray


class LocalFrame:
    """Jet-valued frame data around one parameter point.

    Attributes are jets in the ``M`` parameter offsets: ``x`` (N,), ``tangents``
    (N, M), ``e`` (N, N) with rows as frame vectors, ``b`` (N, M), ``binv``
    (M, M, inverse of the tangential block of ``b``) and ``g`` (M, M).
    """

    def __init__(self, patch: SurfacePatch, u, order: int = 3, engine: str = "auto"):
        self.patch = patch
        self.u = np.asarray(u, dtype=float)
        self.N = patch.ambient_dim
        self.M = patch.intrinsic_dim
        self.x = taylor(patch, self.u, order, engine)
        self.space = self.x.space
        self.uvars = self.space.variables(self.u)
        self.tangents = self.x.gradient()

        sv = np.linalg.svd(self.tangents.value, compute_uv=False)
        if sv.min() < RANK_TOL:
            raise DegeneracyError(f"{patch.name}: tangent vectors rank deficient at {self.u} (sigma_min={sv.min():.2e})")

        rows = gram_schmidt([self.tangents[:, l] for l in range(self.M)])
        rows.append(oriented_normal(rows))
        self.e = J.stack(rows)
        self.b = J.einsum("ka,al->kl", self.e, self.tangents)
        self.binv = J.inverse(self.b[: self.M])
        self.g = J.einsum("al,am->lm", self.tangents, self.tangents)

    @property
    def order(self) -> int:
        return self.x.order

    def data(self) -> FrameData:
        return FrameData(e=self.e.value.copy(), b=self.b.value.copy(), g=self.g.value.copy())

    def field(self, f: ScalarField) -> J.Jet:
        """Jet of a field given as a function of the parameters."""
        return J.asjet(f(self.uvars), self.space)

    def grad(self, F) -> J.Jet:
        """Tangential Pfaff derivatives: trailing axis ``k`` holds ``nabla_k F``, k < M."""
        F = J.asjet(F, self.space)
        return J.einsum("...l,lk->...k", F.gradient(), self.binv)

    def grad_full(self, F) -> J.Jet:
        """Pfaff derivatives padded with ``nabla_N F = 0`` (trailing axis of length N)."""
        G = self.grad(F)
        zero = J.Jet(self.space, np.zeros(G.shape[:-1] + (1, self.space.size)), G.order)
        return J.Jet(self.space, np.concatenate([G.c, zero.c], axis=-2), G.order)


def gram_schmidt(vectors: Sequence) -> list:
    """Orthonormalize in the given order (no pivoting)."""
    out = []
    for v in vectors:
        for e in out:
            v = v - e * J.dot(v, e)
        out.append(v * (1.0 / J.sqrt(J.dot(v, v))))
    return out


def oriented_normal(rows: Sequence) -> object:
    """Unit vector completing ``rows`` to a frame with determinant +1.

    Starts from the ambient basis vector least aligned with the span, which
    only affects conditioning: the result is the unique smooth normal field.
    """
    E0 = np.array([J.value(r) for r in rows])
    n = E0.shape[1]
    residual = 1.0 - (E0 ** 2).sum(axis=0)
    j = int(np.argmax(residual))
    v = np.eye(n)[j]
    for r in rows:
        v = v - r * r[j]
    v = v * (1.0 / J.sqrt(J.dot(v, v)))
    if np.linalg.det(np.vstack([E0, J.value(v)])) < 0:
        v = -v
    return v


@lru_cache(maxsize=256)
def _local_frame_cached(patch: SurfacePatch, key: tuple, order: int, engine: str) -> LocalFrame:
    return LocalFrame(patch, np.array(key), order, engine)


def local_frame(patch: SurfacePatch, u, order: int = 3, engine: str = "auto") -> LocalFrame:
    return _local_frame_cached(patch, tuple(float(x) for x in np.asarray(u, dtype=float)), order, engine)


def frame_at(patch: SurfacePatch, u, engine: str = "auto") -> FrameData:
    """Frame ``e``, coefficients ``b`` and metric ``g`` at ``u``."""
    return local_frame(patch, u, order=1, engine=engine).data()


def pfaff_gradient(field: ScalarField, patch: SurfacePatch, u, engine: str = "auto") -> np.ndarray:
    """``(nabla_1 f, ..., nabla_M f, 0)`` at ``u`` for a field given on the parameters."""
    lf = local_frame(patch, u, order=1, engine=engine)
    return lf.grad_full(lf.field(field)).value


def gradient_vector(field: ScalarField, patch: SurfacePatch, u, engine: str = "auto") -> np.ndarray:
    """Ambient vector ``sum_k (nabla_k f) e_k``."""
    lf = local_frame(patch, u, order=1, engine=engine)
    return lf.grad_full(lf.field(field)).value @ lf.e.value
