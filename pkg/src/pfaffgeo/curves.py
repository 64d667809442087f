"""Curves on a hypersurface: vertical curvature, direction sums and ik-curvatures.

Along a curve ``u(t)`` every surface quantity is pulled back to a univariate
Taylor jet in ``t`` by substituting ``u(t) - u(t0)`` into the local jets, so
t-derivatives are exact.  Arc-length derivatives are t-derivatives divided by
the speed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import jets as J
from .connection import local_connection
from .errors import DegeneracyError, DomainError, GeometryError
from .surface import SurfacePatch

SPEED_TOL = 1e-10
ORTHO_TOL = 1e-8
SKIP_TOL = 0.3


@dataclass(frozen=True, eq=False)
class CurveOnSurface:
    """A parameter curve ``t -> u(t)`` on ``patch`` for ``t`` in ``[t0, t1]``.

    ``param`` must accept jets (use the functions of :mod:`pfaffgeo.jets`).
    """

    patch: SurfacePatch
    param: Callable
    t0: float = 0.0
    t1: float = 1.0
    name: str = "curve"

    def __call__(self, t: float) -> np.ndarray:
        return np.array([J.value(c) for c in self.param(t)], dtype=float)


class CurvePoint:
    """Jets in ``t`` of the surface data at one curve parameter."""

    def __init__(self, curve: CurveOnSurface, t: float, order: int = 3):
        patch = curve.patch
        sp = J.jet_space(1, order)
        tj = sp.variables([t])[0]
        U = [J.asjet(c, sp) for c in curve.param(tj)]
        u0 = np.array([c.value for c in U], dtype=float)
        if not patch.contains(u0):
            raise DomainError(f"curve {curve.name!r} leaves the domain at t={t}")
        self.t = t
        self.u = u0
        self.lc = local_connection(patch, u0)
        self.N, self.M = self.lc.N, self.lc.M
        self._delta = [c - float(c.value) for c in U]
        lf = self.lc.lf
        self.x = self.pull(lf.x)
        self.e = self.pull(lf.e)
        self.kappa = self.pull(self.lc.kappa)
        self.R = self.pull(self.lc.R)
        self.q = self.pull(self.lc.q)
        xt = self.x.partial(0)
        speed2 = J.dot(xt, xt)
        if speed2.value < SPEED_TOL ** 2:
            raise DegeneracyError(f"curve {curve.name!r} has zero speed at t={t}")
        speed = J.sqrt(speed2)
        self.speed = speed
        self.tangent = xt * (1.0 / speed)  # unit tangent, jet in t
        self.w = J.einsum("ka,a->k", self.e, self.tangent)  # omega_k / ds, length N

    def pull(self, F: J.Jet) -> J.Jet:
        return J.compose(F, self._delta)

    def d_ds(self, F: J.Jet) -> J.Jet:
        return F.partial(0) * (1.0 / self.speed)


@dataclass(frozen=True)
class CurveFrame:
    """Orthonormal frame along a curve, ``t_i = sum_k A_ki e_k``.

    ``kind`` is ``"default"`` (unit tangent first, then Gram-Schmidt of
    ``e_2 .. e_N, e_1`` skipping candidates nearly in the span so far), ``"surface"`` (``A = I``) or ``"custom"`` with ``fn``
    mapping a :class:`CurvePoint` to the ambient rows ``t_i``.  An optional
    constant orthogonal ``P`` right-multiplies ``A``.
    """

    kind: str = "default"
    P: np.ndarray | None = None
    fn: Callable | None = None

    def vectors(self, cp: CurvePoint) -> J.Jet:
        """Ambient rows ``t_i`` as jets in t, before applying ``P``."""
        if self.kind == "surface":
            return cp.e
        if self.kind == "custom":
            return J.asjet(self.fn(cp), cp.e.space)
        if self.kind != "default":
            raise GeometryError(f"unknown curve frame kind {self.kind!r}")
        rows = [cp.tangent]
        for k in list(range(1, cp.N)) + [0]:
            if len(rows) == cp.N:
                break
            v = cp.e[k]
            for r in rows:
                v = v - r * J.dot(v, r)
            n2 = J.dot(v, v)
            # Some candidate always keeps residual >= 1/sqrt(N) > SKIP_TOL.
            if n2.value < SKIP_TOL ** 2:
                continue
            rows.append(v * (1.0 / J.sqrt(n2)))
        return J.stack(rows)

    def matrix(self, cp: CurvePoint) -> J.Jet:
        """``A[k, i] = <e_k, t_i>``."""
        A = J.einsum("ka,ia->ki", cp.e, self.vectors(cp))
        if self.P is not None:
            A = J.einsum("ki,ij->kj", A, np.asarray(self.P, dtype=float))
        return A


def curve_point(curve: CurveOnSurface, t: float) -> CurvePoint:
    return CurvePoint(curve, t)


def vertical_curvature(curve: CurveOnSurface, t: float) -> tuple[float, float]:
    """``(sum kappa_km w_k w_m, <dt/ds, n>)`` with ``w_k = omega_k / ds``."""
    cp = curve_point(curve, t)
    M = cp.M
    w = cp.w.value[:M]
    quad = float(w @ cp.kappa.value @ w)
    direct = float(cp.d_ds(cp.tangent).value @ cp.e.value[-1])
    return quad, direct


def arc_length(curve: CurveOnSurface, t: float, n: int = 64) -> float:
    """Arc length from ``t0`` to ``t`` by Gauss-Legendre quadrature of the speed."""
    if t == curve.t0:
        return 0.0
    xs, ws = np.polynomial.legendre.leggauss(n)
    a, b = curve.t0, t
    ts = 0.5 * (b - a) * xs + 0.5 * (b + a)
    speeds = np.array([curve_point(curve, float(s)).speed.value for s in ts])
    return float(0.5 * (b - a) * (ws @ speeds))


@dataclass
class DirectionSum:
    total: float
    trace: float
    residual: float
    t0_sum: float
    t0_formula: float
    t0_residual: float
    t0_printed: float
    constants: tuple = field(default_factory=tuple)


def direction_sum_check(patch: SurfacePatch, u, rng: np.random.Generator | None = None, directions=None) -> DirectionSum:
    """Vertical curvatures summed over an orthonormal set of tangent directions.

    The sum must equal ``trace(kappa)`` for every choice of directions.  The
    same directions also sum ``T0 = a I + b III + c <dx, de_N>``, compared
    with ``(N-1) a + b sum q_Nkm^2 + c sum q_Nkk``.
    """
    rng = rng or np.random.default_rng(0)
    lc = local_connection(patch, u)
    M = lc.M
    if directions is None:
        directions, _ = np.linalg.qr(rng.normal(size=(M, M)))
        directions = directions.T
    lam = np.asarray(directions, dtype=float)  # rows are directions in frame components
    kappa = lc.kappa.value
    total = float(np.einsum("ik,km,im->", lam, kappa, lam))
    qN = lc.q.value[-1, :M, :]  # q_Nkm
    a, b, c = rng.uniform(-1, 1, size=3)
    omegaN = lam @ qN.T  # [i, k] = sum_m q_Nkm lam_im
    t0_sum = float(sum(a + b * omegaN[i] @ omegaN[i] + c * lam[i] @ omegaN[i] for i in range(M)))
    t0_formula = (lc.N - 1) * a + b * float((qN ** 2).sum()) + c * float(np.trace(qN))
    t0_printed = a + b * float((qN ** 2).sum()) + c * float(np.trace(lc.q.value[:M, -1, :]))
    return DirectionSum(
        total=total,
        trace=float(np.trace(kappa)),
        residual=abs(total - float(np.trace(kappa))),
        t0_sum=t0_sum,
        t0_formula=t0_formula,
        t0_residual=abs(t0_sum - t0_formula),
        t0_printed=t0_printed,
        constants=(float(a), float(b), float(c)),
    )


def _checked_frame(frame: CurveFrame, cp: CurvePoint) -> J.Jet:
    A = frame.matrix(cp)
    if np.abs(A.value.T @ A.value - np.eye(cp.N)).max() > ORTHO_TOL:
        raise GeometryError(f"curve frame not orthogonal at t={cp.t}")
    return A


def rho_matrix(curve: CurveOnSurface, frame: CurveFrame | None = None, t: float = 0.0) -> np.ndarray:
    """ik-curvatures from the frame coefficients and the connection.

    ``c_im = dA_mi/ds + sum_kl A_ki q_kml w_l`` and ``rho[i, j] = sum_m c_im A_mj``.
    """
    cp = curve_point(curve, t)
    A = _checked_frame(frame or CurveFrame(), cp)
    dA = cp.d_ds(A).value
    Av = A.value
    M = cp.M
    conn = np.einsum("ki,kml,l->im", Av, cp.q.value, cp.w.value[:M])
    c = dA.T + conn
    return c @ Av


def rho_matrix_direct(curve: CurveOnSurface, frame: CurveFrame | None = None, t: float = 0.0) -> np.ndarray:
    """``<d t_i/ds, t_j>`` by differentiating the ambient frame vectors."""
    cp = curve_point(curve, t)
    frame = frame or CurveFrame()
    A = _checked_frame(frame, cp)
    T = J.einsum("ki,ka->ia", A, cp.e)
    return cp.d_ds(T).value @ T.value.T


@dataclass
class DnuReport:
    k: float
    kstar: float
    kstar_formula: float
    dR_ds: float
    D_nu_dot_nu: float
    residual_kstar: float
    residual_dnu: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def dnu_checks(curve: CurveOnSurface, t: float) -> DnuReport:
    """Curvature of the unit tangent under ``D = (N-1) d - R/(N-1)``."""
    cp = curve_point(curve, t)
    n1 = cp.N - 1.0
    nu = cp.tangent.value
    dnu = cp.d_ds(cp.tangent).value
    dR = float(cp.R.value @ cp.w.value)
    Dnu = n1 * dnu - dR / n1 * nu
    k = float(np.linalg.norm(dnu))
    kstar = float(np.linalg.norm(Dnu))
    formula = float(np.sqrt(n1 ** 2 * k ** 2 + dR ** 2 / n1 ** 2))
    proj = float(Dnu @ nu)
    return DnuReport(k, kstar, formula, dR, proj, abs(kstar - formula), abs(proj + dR / n1))


# fixtures -------------------------------------------------------------------

def polynomial_curve(patch: SurfacePatch, coeffs: Sequence[Sequence[float]], t0: float = 0.0, t1: float = 1.0, name: str = "poly") -> CurveOnSurface:
    """``u_l(t) = sum_j coeffs[l][j] t^j``."""
    coeffs = [list(map(float, c)) for c in coeffs]
    if len(coeffs) != patch.intrinsic_dim:
        raise GeometryError(f"need {patch.intrinsic_dim} coefficient rows, got {len(coeffs)}")

    def param(t):
        out = []
        for row in coeffs:
            acc = 0.0
            for c in reversed(row):
                acc = acc * t + c
            out.append(acc)
        return out

    return CurveOnSurface(patch, param, t0, t1, name)


def great_circle(patch: SurfacePatch, phi: float = 0.3) -> CurveOnSurface:
    """Meridian of a catalog hypersphere: first angle varies, the others fixed."""
    lo, hi = patch.domain[0]
    rest = [phi] * (patch.intrinsic_dim - 1)
    return CurveOnSurface(patch, lambda t: [t] + rest, lo + 0.1, hi - 0.1, "great-circle")


def torus_outer_equator(patch: SurfacePatch) -> CurveOnSurface:
    lo, hi = patch.domain[0]
    return CurveOnSurface(patch, lambda t: [t, 0.0], lo + 0.1, hi - 0.1, "outer-equator")


def plane_circle(patch: SurfacePatch, radius: float = 0.5, center=(0.0, 0.0)) -> CurveOnSurface:
    cx, cy = center
    rest = [0.0] * (patch.intrinsic_dim - 2)
    return CurveOnSurface(
        patch,
        lambda t: [cx + radius * J.cos(t), cy + radius * J.sin(t)] + rest,
        0.0,
        2 * np.pi,
        "circle",
    )


def plane_line(patch: SurfacePatch, start=None, direction=None) -> CurveOnSurface:
    M = patch.intrinsic_dim
    start = np.zeros(M) if start is None else np.asarray(start, dtype=float)
    direction = np.eye(M)[0] * 0.5 if direction is None else np.asarray(direction, dtype=float)
    return polynomial_curve(patch, [[s, d] for s, d in zip(start, direction)], -1.0, 1.0, "line")
