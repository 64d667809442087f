"""Parametric hypersurface patches, their derivative jets and a fixture catalog."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import jets as J
from .errors import ConfigError, DomainError, EvaluationError

EPS = np.finfo(float).eps
# central-difference steps per derivative order (relative to max(1, |u_l|))
FD_STEPS = {1: EPS ** (1 / 3), 2: EPS ** (1 / 4), 3: EPS ** (1 / 5)}
MAX_AMBIENT_DIM = 8


@dataclass(frozen=True, eq=False)
class SurfacePatch:
    """Embedding ``u in R^(N-1) -> x in R^N`` over an open parameter box.

    ``embed`` receives a length-``M`` sequence and returns ``N`` components.
    When ``jet_capable`` is true it is written with :mod:`pfaffgeo.jets`
    functions and accepts jets, which gives exact derivatives; otherwise only
    finite differences are used.
    """

    name: str
    ambient_dim: int
    embed: Callable[[Sequence], Sequence]
    domain: tuple[tuple[float, float], ...]
    params: tuple[float, ...] = ()
    jet_capable: bool = True
    description: str = ""

    def __post_init__(self):
        if not 3 <= self.ambient_dim <= MAX_AMBIENT_DIM:
            raise ConfigError(f"ambient dimension must be in 3..{MAX_AMBIENT_DIM}, got {self.ambient_dim}")
        if len(self.domain) != self.ambient_dim - 1:
            raise ConfigError("domain box needs one interval per parameter")
        for lo, hi in self.domain:
            if not lo < hi:
                raise ConfigError(f"empty domain interval ({lo}, {hi})")

    @property
    def intrinsic_dim(self) -> int:
        return self.ambient_dim - 1

    def __call__(self, u) -> np.ndarray:
        return evaluate(self, u)

    def contains(self, u, margin: float = 0.0) -> bool:
        u = np.asarray(u, dtype=float)
        return all(lo + margin <= x <= hi - margin for x, (lo, hi) in zip(u, self.domain))

    def with_embedding(self, embed, name: str | None = None, domain=None) -> "SurfacePatch":
        return SurfacePatch(
            name=name or self.name,
            ambient_dim=self.ambient_dim,
            embed=embed,
            domain=tuple(domain) if domain is not None else self.domain,
            params=self.params,
            jet_capable=self.jet_capable,
            description=self.description,
        )


@dataclass
class Jet3:
    """Position and partial derivatives of the embedding at one point.

    ``d1[i, l] = dx_i/du_l``; ``d2`` and ``d3`` add further parameter slots
    and are symmetric in them.  Entries above the requested order are None.
    """

    x: np.ndarray
    d1: np.ndarray
    d2: np.ndarray | None = None
    d3: np.ndarray | None = None

    @property
    def order(self) -> int:
        return 1 if self.d2 is None else 2 if self.d3 is None else 3


def evaluate(patch: SurfacePatch, u) -> np.ndarray:
    x = np.asarray([float(J.value(c)) for c in patch.embed(np.asarray(u, dtype=float))])
    if x.shape != (patch.ambient_dim,):
        raise EvaluationError(f"{patch.name}: embedding returned {x.shape[0]} components")
    if not np.all(np.isfinite(x)):
        raise EvaluationError(f"{patch.name}: non-finite embedding value at {u}")
    return x


def fd_steps(u, order: int) -> np.ndarray:
    return FD_STEPS[order] * np.maximum(1.0, np.abs(np.asarray(u, dtype=float)))


def _check_point(patch: SurfacePatch, u: np.ndarray, margin: np.ndarray | float) -> None:
    if u.shape != (patch.intrinsic_dim,):
        raise DomainError(f"{patch.name}: expected {patch.intrinsic_dim} parameters, got {u.shape}")
    margin = np.broadcast_to(np.asarray(margin, dtype=float), u.shape)
    for l, (x, (lo, hi)) in enumerate(zip(u, patch.domain)):
        if not (lo + margin[l] <= x <= hi - margin[l]):
            raise DomainError(f"{patch.name}: u[{l}]={x} outside ({lo}, {hi}) with margin {margin[l]:.3g}")


def taylor(patch: SurfacePatch, u, order: int = 3, engine: str = "auto") -> J.Jet:
    """Local Taylor model of the embedding as a jet array of shape ``(N,)``.

    ``engine='ad'`` pushes jets through the embedding (exact), ``'fd'`` builds
    the model from finite-difference partials; ``'auto'`` picks AD whenever the
    patch supports it.
    """
    u = np.asarray(u, dtype=float)
    engine = _resolve_engine(patch, engine)
    if engine == "ad":
        _check_point(patch, u, 0.0)
        sp = J.jet_space(patch.intrinsic_dim, order)
        out = J.asjet(list(patch.embed(sp.variables(u))), sp)
        if out.shape != (patch.ambient_dim,):
            raise EvaluationError(f"{patch.name}: embedding returned {out.shape} components")
        if not np.all(np.isfinite(out.c)):
            raise EvaluationError(f"{patch.name}: non-finite jet at {u}")
        return out
    return _jet3_to_taylor(jet(patch, u, order, engine="fd"), order)


def _resolve_engine(patch: SurfacePatch, engine: str) -> str:
    if engine not in ("auto", "ad", "fd"):
        raise ConfigError(f"unknown differentiation engine {engine!r}")
    if engine == "auto":
        return "ad" if patch.jet_capable else "fd"
    if engine == "ad" and not patch.jet_capable:
        raise ConfigError(f"{patch.name}: embedding is a black box, AD unavailable")
    return engine


def _jet3_to_taylor(j3: Jet3, order: int) -> J.Jet:
    m = j3.d1.shape[1]
    sp = J.jet_space(m, order)
    c = np.zeros((j3.x.shape[0], sp.size))
    derivs = {0: None, 1: j3.d1, 2: j3.d2, 3: j3.d3}
    for k, alpha in enumerate(sp.monomials):
        d = sum(alpha)
        if d == 0:
            c[:, k] = j3.x
            continue
        slots = tuple(l for l, e in enumerate(alpha) for _ in range(e))
        c[:, k] = derivs[d][(slice(None),) + slots] / sp.factorial[k]
    return J.Jet(sp, c, order)


def jet(patch: SurfacePatch, u, order: int = 3, engine: str = "auto") -> Jet3:
    """Position and partials of the embedding up to ``order`` (1, 2 or 3)."""
    if order not in (1, 2, 3):
        raise ConfigError(f"jet order must be 1, 2 or 3, got {order}")
    u = np.asarray(u, dtype=float)
    engine = _resolve_engine(patch, engine)
    if engine == "ad":
        t = taylor(patch, u, order, engine="ad")
        return Jet3(
            x=t.value.copy(),
            d1=t.derivatives(1),
            d2=t.derivatives(2) if order >= 2 else None,
            d3=t.derivatives(3) if order >= 3 else None,
        )
    return _fd_jet(patch, u, order)


def _fd_jet(patch: SurfacePatch, u: np.ndarray, order: int) -> Jet3:
    m = patch.intrinsic_dim
    steps = {k: fd_steps(u, k) for k in range(1, order + 1)}
    _check_point(patch, u, 3 * max(steps[k].max() for k in steps))
    f = lambda v: evaluate(patch, v)
    eye = np.eye(m)
    x = f(u)

    h = steps[1]
    d1 = np.stack([(f(u + h[l] * eye[l]) - f(u - h[l] * eye[l])) / (2 * h[l]) for l in range(m)], axis=-1)
    d2 = d3 = None
    if order >= 2:
        d2 = _fd_second(f, u, steps[2])
    if order >= 3:
        h3 = steps[3]
        d3 = np.empty(x.shape + (m, m, m))
        for c in range(m):
            hi = _fd_second(f, u + h3[c] * eye[c], h3)
            lo = _fd_second(f, u - h3[c] * eye[c], h3)
            d3[..., c] = (hi - lo) / (2 * h3[c])
        d3 = _symmetrize(d3, 3)
    return Jet3(x=x, d1=d1, d2=d2, d3=d3)


def _fd_second(f, v: np.ndarray, h: np.ndarray) -> np.ndarray:
    m = v.shape[0]
    eye = np.eye(m)
    fv = f(v)
    out = np.empty(fv.shape + (m, m))
    for a in range(m):
        ea = h[a] * eye[a]
        out[..., a, a] = (f(v + ea) - 2 * fv + f(v - ea)) / h[a] ** 2
        for b in range(a + 1, m):
            eb = h[b] * eye[b]
            val = (f(v + ea + eb) - f(v + ea - eb) - f(v - ea + eb) + f(v - ea - eb)) / (4 * h[a] * h[b])
            out[..., a, b] = out[..., b, a] = val
    return out


def _symmetrize(d: np.ndarray, k: int) -> np.ndarray:
    from itertools import permutations

    lead = d.ndim - k
    perms = list(permutations(range(k)))
    acc = np.zeros_like(d)
    for p in perms:
        acc += np.transpose(d, tuple(range(lead)) + tuple(lead + i for i in p))
    return acc / len(perms)


def regularity(patch: SurfacePatch, u) -> float:
    """Smallest singular value of the first-derivative matrix at ``u``."""
    return float(np.linalg.svd(jet(patch, u, 1).d1, compute_uv=False).min())


def sample_points(patch: SurfacePatch, n: int, rng: np.random.Generator, box=None, shrink: float = 0.05) -> np.ndarray:
    """``n`` uniform points of ``box`` (default: the domain) pulled in by ``shrink`` of each width."""
    box = patch.domain if box is None else box
    lo = np.array([a for a, _ in box], dtype=float)
    hi = np.array([b for _, b in box], dtype=float)
    pad = shrink * (hi - lo)
    return rng.uniform(lo + pad, hi - pad, size=(n, len(box)))


# -- catalog ---------------------------------------------------------------

def unit_sphere_map(angles: Sequence) -> list:
    """Polar-angle map of ``len(angles)`` angles onto the unit sphere of R^(len+1).

    The first angle is measured from the last axis; the final angle runs
    around a circle, so for two angles ``(theta, phi)`` this is the usual
    ``(sin t cos p, sin t sin p, cos t)``.
    """
    if len(angles) == 1:
        return [J.cos(angles[0]), J.sin(angles[0])]
    head = J.sin(angles[0])
    return [head * c for c in unit_sphere_map(angles[1:])] + [J.cos(angles[0])]


def _sphere_box(m: int, pad: float = 0.2) -> tuple[tuple[float, float], ...]:
    return tuple([(pad, math.pi - pad)] * (m - 1) + [(-math.pi + pad, math.pi - pad)])


def hyperplane(n: int) -> SurfacePatch:
    m = int(n) - 1
    return SurfacePatch(
        name="hyperplane",
        ambient_dim=int(n),
        embed=lambda u: [u[l] for l in range(m)] + [0.0],
        domain=((-1.0, 1.0),) * m,
        params=(float(n),),
        description="flat graph x_N = 0",
    )


def hypersphere(n: int, r: float = 1.0) -> SurfacePatch:
    if r <= 0:
        raise ConfigError("hypersphere radius must be positive")
    m = int(n) - 1
    return SurfacePatch(
        name="hypersphere",
        ambient_dim=int(n),
        embed=lambda u: [r * c for c in unit_sphere_map([u[l] for l in range(m)])],
        domain=_sphere_box(m),
        params=(float(n), float(r)),
        description="round sphere of radius r in polar angles",
    )


def ellipsoid(n: int, *axes: float) -> SurfacePatch:
    if len(axes) != int(n) or min(axes) <= 0:
        raise ConfigError(f"ellipsoid in R^{n} needs {n} positive semi-axes")
    m = int(n) - 1
    return SurfacePatch(
        name="ellipsoid",
        ambient_dim=int(n),
        embed=lambda u: [a * c for a, c in zip(axes, unit_sphere_map([u[l] for l in range(m)]))],
        domain=_sphere_box(m),
        params=(float(n),) + tuple(float(a) for a in axes),
        description="axis-aligned ellipsoid in polar angles",
    )


def torus3(big_r: float, r: float) -> SurfacePatch:
    if not 0 < r < big_r:
        raise ConfigError("torus3 needs 0 < r < R")

    def embed(u):
        ring = big_r + r * J.cos(u[1])
        return [ring * J.cos(u[0]), ring * J.sin(u[0]), r * J.sin(u[1])]

    pad = 0.2
    return SurfacePatch(
        name="torus3",
        ambient_dim=3,
        embed=embed,
        domain=((-math.pi + pad, math.pi - pad),) * 2,
        params=(float(big_r), float(r)),
        description="torus of revolution; u[0] around the axis, u[1] around the tube (0 = outer equator)",
    )


def graph(n: int, a: float = 0.4, b: float = 0.3) -> SurfacePatch:
    m = int(n) - 1

    def embed(u):
        quad = sum(u[l] * u[l] for l in range(m))
        wave = J.sin(sum((l + 1) * u[l] for l in range(m)))
        return [u[l] for l in range(m)] + [quad * a + wave * b]

    return SurfacePatch(
        name="graph",
        ambient_dim=int(n),
        embed=embed,
        domain=((-1.0, 1.0),) * m,
        params=(float(n), float(a), float(b)),
        description="graph x_N = a|u|^2 + b sin(sum (l+1) u_l)",
    )


@dataclass(frozen=True)
class CatalogEntry:
    build: Callable[..., SurfacePatch]
    arity: Callable[[Sequence[float]], bool]
    usage: str
    int_first: bool = True


CATALOG: dict[str, CatalogEntry] = {
    "hyperplane": CatalogEntry(hyperplane, lambda p: len(p) == 1, "N"),
    "hypersphere": CatalogEntry(hypersphere, lambda p: len(p) in (1, 2), "N [r=1]"),
    "ellipsoid": CatalogEntry(ellipsoid, lambda p: len(p) >= 1 and len(p) == int(p[0]) + 1, "N a_1 ... a_N"),
    "torus3": CatalogEntry(torus3, lambda p: len(p) == 2, "R r", int_first=False),
    "graph": CatalogEntry(graph, lambda p: len(p) in (1, 3), "N [a b]"),
}


def catalog(name: str, params: Sequence[float] = ()) -> SurfacePatch:
    """Build a fixture surface by name; see :data:`CATALOG` for arities."""
    entry = CATALOG.get(name)
    if entry is None:
        raise ConfigError(f"unknown surface {name!r}; choose from {sorted(CATALOG)}")
    params = [float(p) for p in params]
    if not entry.arity(params):
        raise ConfigError(f"{name} expects parameters: {entry.usage}; got {params}")
    if entry.int_first:
        if params[0] != int(params[0]):
            raise ConfigError(f"{name}: dimension N must be an integer")
        params[0] = int(params[0])
    return entry.build(*params)
