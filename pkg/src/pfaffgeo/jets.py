"""Truncated multivariate Taylor jets (higher-order dual numbers).

A :class:`Jet` stores the Taylor coefficients of a (possibly array-valued)
function around a base point, up to a fixed total degree.  Order-1 jets are
ordinary multivariate dual numbers; higher orders carry exact second and
third partials through the closed arithmetic ``+ - * /`` and the elementary
functions defined at the bottom of this module.

Jets may be arrays: the coefficient axis is always the last one, leading axes
behave like a numpy array of scalar jets.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np


class JetSpace:
    """Monomial bookkeeping for jets in ``nvars`` variables up to ``order``."""

    def __init__(self, nvars: int, order: int):
        if nvars < 1 or order < 0:
            raise ValueError(f"invalid jet space ({nvars}, {order})")
        self.nvars = nvars
        self.order = order
        monos = [
            a
            for d in range(order + 1)
            for a in sorted(_exponents(nvars, d), reverse=True)
        ]
        self.monomials: list[tuple[int, ...]] = monos
        self.index = {a: i for i, a in enumerate(monos)}
        self.size = len(monos)
        self.degree = np.array([sum(a) for a in monos])
        self.factorial = np.array([math.prod(math.factorial(k) for k in a) for a in monos], dtype=float)

        left, right, target = [], [], []
        for i, a in enumerate(monos):
            for j, b in enumerate(monos):
                if self.degree[i] + self.degree[j] <= order:
                    left.append(i)
                    right.append(j)
                    target.append(self.index[tuple(x + y for x, y in zip(a, b))])
        self._left = np.array(left)
        self._right = np.array(right)
        scatter = np.zeros((len(left), self.size))
        scatter[np.arange(len(left)), target] = 1.0
        self._scatter = scatter

        # d/du_l: coefficient k of the derivative reads coefficient k + e_l
        self._dsrc = np.zeros((nvars, self.size), dtype=int)
        self._dfac = np.zeros((nvars, self.size))
        for l in range(nvars):
            for k, a in enumerate(monos):
                if self.degree[k] < order:
                    up = list(a)
                    up[l] += 1
                    self._dsrc[l, k] = self.index[tuple(up)]
                    self._dfac[l, k] = up[l]

    def __repr__(self) -> str:
        return f"JetSpace(nvars={self.nvars}, order={self.order})"

    def unit(self, l: int) -> int:
        """Coefficient index of the linear monomial in variable ``l``."""
        e = [0] * self.nvars
        e[l] = 1
        return self.index[tuple(e)]

    def variables(self, point: Sequence[float]) -> "Jet":
        """Jet array ``point + delta`` (shape ``(nvars,)``)."""
        point = np.asarray(point, dtype=float)
        if point.shape != (self.nvars,):
            raise ValueError(f"point must have shape ({self.nvars},)")
        c = np.zeros((self.nvars, self.size))
        c[:, 0] = point
        for l in range(self.nvars):
            c[l, self.unit(l)] = 1.0
        return Jet(self, c)

    def constant(self, value, order: int | None = None) -> "Jet":
        value = np.asarray(value, dtype=float)
        c = np.zeros(value.shape + (self.size,))
        c[..., 0] = value
        return Jet(self, c, self.order if order is None else order)

    def mul_coeffs(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return (a[..., self._left] * b[..., self._right]) @ self._scatter

    def contract(self, subscripts: str, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """``np.einsum`` over leading axes with jet multiplication of entries."""
        lhs, out = subscripts.split("->")
        sa, sb = lhs.split(",")
        pairs = np.einsum(f"{sa}z,{sb}z->{out}z", a[..., self._left], b[..., self._right])
        return pairs @ self._scatter


@lru_cache(maxsize=None)
def jet_space(nvars: int, order: int) -> JetSpace:
    return JetSpace(nvars, order)


def _exponents(nvars: int, degree: int) -> Iterable[tuple[int, ...]]:
    for combo in itertools.combinations_with_replacement(range(nvars), degree):
        a = [0] * nvars
        for v in combo:
            a[v] += 1
        yield tuple(a)


class Jet:
    """Array of truncated Taylor polynomials sharing one :class:`JetSpace`.

    ``order`` is the degree up to which the coefficients are valid; it drops by
    one with every differentiation and is the minimum of the operands' orders
    under arithmetic.
    """

    __array_priority__ = 1000

    def __init__(self, space: JetSpace, coeffs: np.ndarray, order: int | None = None):
        self.space = space
        self.order = space.order if order is None else order
        if self.order < 0:
            raise ValueError("jet differentiated below order 0")
        c = np.asarray(coeffs, dtype=float)
        if c.shape[-1:] != (space.size,):
            raise ValueError("coefficient axis does not match jet space")
        if self.order < space.order:
            c = np.where(space.degree > self.order, 0.0, c)
        self.c = c

    # -- array behaviour -------------------------------------------------
    @property
    def shape(self) -> tuple[int, ...]:
        return self.c.shape[:-1]

    @property
    def ndim(self) -> int:
        return self.c.ndim - 1

    def __len__(self) -> int:
        return self.shape[0]

    def __getitem__(self, key) -> "Jet":
        if not isinstance(key, tuple):
            key = (key,)
        if any(k is Ellipsis for k in key):
            key = key + (slice(None),)
        return Jet(self.space, self.c[key], self.order)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @property
    def T(self) -> "Jet":
        return self.transpose()

    def transpose(self, *axes) -> "Jet":
        if not axes:
            axes = tuple(reversed(range(self.ndim)))
        elif len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return Jet(self.space, np.transpose(self.c, tuple(axes) + (self.ndim,)), self.order)

    def reshape(self, *shape) -> "Jet":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return Jet(self.space, self.c.reshape(tuple(shape) + (self.space.size,)), self.order)

    def sum(self, axis=None) -> "Jet":
        if axis is None:
            axis = tuple(range(self.ndim))
        axes = (axis,) if isinstance(axis, int) else tuple(axis)
        axes = tuple(a % self.ndim if self.ndim else a for a in axes)
        return Jet(self.space, self.c.sum(axis=axes), self.order)

    def copy(self) -> "Jet":
        return Jet(self.space, self.c.copy(), self.order)

    # -- values and derivatives -----------------------------------------
    @property
    def value(self) -> np.ndarray:
        """Value at the base point (float array of the jet's shape)."""
        v = self.c[..., 0]
        return v if v.ndim else float(v)

    def partial(self, l: int) -> "Jet":
        """Exact ``d/du_l``; the result is valid to one order less."""
        sp = self.space
        return Jet(sp, self.c[..., sp._dsrc[l]] * sp._dfac[l], self.order - 1)

    def gradient(self) -> "Jet":
        """Stack of all first partials on a new trailing axis."""
        sp = self.space
        c = np.stack([self.c[..., sp._dsrc[l]] * sp._dfac[l] for l in range(sp.nvars)], axis=-2)
        return Jet(sp, c, self.order - 1)

    def derivative(self, alpha: Sequence[int]) -> np.ndarray:
        """Partial derivative of multi-index ``alpha`` at the base point."""
        alpha = tuple(alpha)
        if sum(alpha) > self.order:
            raise ValueError(f"jet of order {self.order} has no derivative {alpha}")
        k = self.space.index[alpha]
        return self.c[..., k] * self.space.factorial[k]

    def derivatives(self, degree: int) -> np.ndarray:
        """Dense symmetric array of all partials of one degree, slots last."""
        n = self.space.nvars
        out = np.zeros(self.shape + (n,) * degree)
        for slots in itertools.product(range(n), repeat=degree):
            alpha = [0] * n
            for s in slots:
                alpha[s] += 1
            out[(Ellipsis,) + slots] = self.derivative(alpha)
        return out

    # -- arithmetic ------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.space is not self.space:
                raise ValueError("jets from different spaces")
            return other.c, other.order
        v = np.asarray(other, dtype=float)
        c = np.zeros(v.shape + (self.space.size,))
        c[..., 0] = v
        return c, self.space.order

    def __add__(self, other) -> "Jet":
        c, o = self._coerce(other)
        return Jet(self.space, self.c + c, min(self.order, o))

    __radd__ = __add__

    def __sub__(self, other) -> "Jet":
        c, o = self._coerce(other)
        return Jet(self.space, self.c - c, min(self.order, o))

    def __rsub__(self, other) -> "Jet":
        c, o = self._coerce(other)
        return Jet(self.space, c - self.c, min(self.order, o))

    def __neg__(self) -> "Jet":
        return Jet(self.space, -self.c, self.order)

    def __pos__(self) -> "Jet":
        return self

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            v = np.asarray(other, dtype=float)
            return Jet(self.space, self.c * v[..., None], self.order)
        c, o = self._coerce(other)
        a, b = np.broadcast_arrays(self.c, c)
        return Jet(self.space, self.space.mul_coeffs(a, b), min(self.order, o))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            v = np.asarray(other, dtype=float)
            return Jet(self.space, self.c / v[..., None], self.order)
        return self * reciprocal(other)

    def __rtruediv__(self, other) -> "Jet":
        return reciprocal(self) * other

    def __pow__(self, p) -> "Jet":
        if isinstance(p, (int, np.integer)) and p >= 0:
            out = self.space.constant(np.ones(self.shape), self.order)
            for _ in range(int(p)):
                out = out * self
            return out
        return power(self, float(p))

    def __repr__(self) -> str:
        return f"Jet(shape={self.shape}, order={self.order}, value={self.value!r})"


def is_jet(x) -> bool:
    return isinstance(x, Jet)


def _compose(a: Jet, taylor: Callable[[np.ndarray, int], list[np.ndarray]]) -> Jet:
    """Evaluate ``f(a)`` from ``taylor(a0, K) = [f(a0), f'(a0), f''(a0)/2!, ...]``."""
    a0 = a.c[..., 0]
    coefs = taylor(a0, a.order)
    nil = a - a0
    out = Jet(a.space, np.zeros_like(a.c), a.order)
    out.c[..., 0] = coefs[0]
    term = None
    for k in range(1, a.order + 1):
        term = nil if term is None else term * nil
        out = out + term * coefs[k]
    return out


def _binomial_series(p: float):
    def taylor(a0, K):
        out, coef = [], 1.0
        for k in range(K + 1):
            out.append(coef * a0 ** (p - k))
            coef *= (p - k) / (k + 1)
        return out
    return taylor


def reciprocal(a: Jet) -> Jet:
    if np.any(a.c[..., 0] == 0.0):
        raise ZeroDivisionError("jet division by zero base value")
    return _compose(a, lambda a0, K: [(-1.0) ** k * a0 ** (-1 - k) for k in range(K + 1)])


def power(a, p: float):
    if not is_jet(a):
        return np.power(a, p)
    return _compose(a, _binomial_series(p))


def sqrt(a):
    if not is_jet(a):
        return np.sqrt(a)
    if np.any(a.c[..., 0] <= 0.0):
        raise ValueError("jet sqrt needs a positive base value")
    return _compose(a, _binomial_series(0.5))


def exp(a):
    if not is_jet(a):
        return np.exp(a)
    return _compose(a, lambda a0, K: [np.exp(a0) / math.factorial(k) for k in range(K + 1)])


def log(a):
    if not is_jet(a):
        return np.log(a)
    return _compose(
        a, lambda a0, K: [np.log(a0)] + [(-1.0) ** (k + 1) / (k * a0 ** k) for k in range(1, K + 1)]
    )


def _trig(f0, f1):
    cycle = [f0, f1, lambda x: -f0(x), lambda x: -f1(x)]
    return lambda a0, K: [cycle[k % 4](a0) / math.factorial(k) for k in range(K + 1)]


def sin(a):
    if not is_jet(a):
        return np.sin(a)
    return _compose(a, _trig(np.sin, np.cos))


def cos(a):
    if not is_jet(a):
        return np.cos(a)
    return _compose(a, _trig(np.cos, lambda x: -np.sin(x)))


def sinh(a):
    if not is_jet(a):
        return np.sinh(a)
    return (exp(a) - exp(-a)) * 0.5


def cosh(a):
    if not is_jet(a):
        return np.cosh(a)
    return (exp(a) + exp(-a)) * 0.5


# -- array helpers ------------------------------------------------------

def stack(items: Sequence, axis: int = 0, space: JetSpace | None = None):
    """Stack scalars/jets into one array; plain floats if no jet is present."""
    items = list(items)
    if space is None:
        space = next((x.space for x in _flatten(items) if is_jet(x)), None)
    if space is None:
        return np.stack([np.asarray(x, dtype=float) for x in items], axis=axis)
    parts = [_as_jet(x, space) for x in items]
    order = min(p.order for p in parts)
    shapes = {p.shape for p in parts}
    if len(shapes) > 1:
        parts = [Jet(space, np.broadcast_to(p.c, np.broadcast_shapes(*shapes) + (space.size,)), p.order) for p in parts]
    ax = axis if axis >= 0 else axis - 1
    return Jet(space, np.stack([p.c for p in parts], axis=ax), order)


def _flatten(items):
    for x in items:
        if isinstance(x, (list, tuple)):
            yield from _flatten(x)
        else:
            yield x


def _as_jet(x, space: JetSpace) -> Jet:
    if is_jet(x):
        return x
    if isinstance(x, (list, tuple)):
        return stack(x, space=space)
    return space.constant(x)


def asjet(x, space: JetSpace) -> Jet:
    """Promote floats, arrays or nested lists of jets to a :class:`Jet`."""
    return _as_jet(x, space)


def einsum(subscripts: str, a, b):
    """Two-operand einsum where either operand may be a jet array."""
    if is_jet(a) and is_jet(b):
        sp = a.space
        return Jet(sp, sp.contract(subscripts, a.c, b.c), min(a.order, b.order))
    if is_jet(a):
        lhs, out = subscripts.split("->")
        sa, sb = lhs.split(",")
        return Jet(a.space, np.einsum(f"{sa}z,{sb}->{out}z", a.c, np.asarray(b, float)), a.order)
    if is_jet(b):
        lhs, out = subscripts.split("->")
        sa, sb = lhs.split(",")
        return Jet(b.space, np.einsum(f"{sa},{sb}z->{out}z", np.asarray(a, float), b.c), b.order)
    return np.einsum(subscripts, a, b)


def matmul(a, b):
    return einsum("ij,jk->ik", a, b)


def dot(a, b):
    """Inner product over the last axis."""
    return einsum("...i,...i->...", a, b) if not (is_jet(a) and is_jet(b)) else _jdot(a, b)


def _jdot(a: Jet, b: Jet) -> Jet:
    return (a * b).sum(axis=-1)


def value(x):
    """Base-point value of a jet, identity for floats."""
    return x.value if is_jet(x) else x


def inverse(a: Jet) -> Jet:
    """Inverse of a square jet matrix by the nilpotent Neumann series."""
    a0 = a.c[..., 0]
    inv0 = np.linalg.inv(a0)
    nil = a - a0
    step = -einsum("ij,jk->ik", inv0, nil)
    out = a.space.constant(inv0, a.order)
    term = out
    for _ in range(a.order):
        term = matmul(step, term)
        out = out + term
    return out


def compose(f: Jet, inner: Sequence[Jet]) -> Jet:
    """Substitute jets ``inner`` (without constant term) for the variables of ``f``.

    ``f`` lives in an ``n``-variable space; ``inner`` holds ``n`` jets in some
    other space.  The result is ``f(inner)`` as a jet of that other space.
    """
    sp = f.space
    inner = list(inner)
    if len(inner) != sp.nvars:
        raise ValueError("compose needs one inner jet per variable")
    target = inner[0].space
    order = min([f.order] + [g.order for g in inner])
    powers = []
    for g in inner:
        if np.any(np.abs(g.c[..., 0]) > 0):
            raise ValueError("inner jets must vanish at the base point")
        p = [target.constant(1.0, order)]
        for _ in range(sp.order):
            p.append(p[-1] * g)
        powers.append(p)
    out = target.constant(np.zeros(f.shape), order)
    for k, alpha in enumerate(sp.monomials):
        if sum(alpha) > order:
            continue
        mono = target.constant(1.0, order)
        for l, e in enumerate(alpha):
            if e:
                mono = mono * powers[l][e]
        coef = f.c[..., k]
        out = out + mono * coef if coef.ndim else out + mono * float(coef)
    return out
