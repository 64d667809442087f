"""Reference computations that share no code with the package.

Everything here uses plain numpy with central differences or closed forms.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import permutations

import numpy as np


def permutation_sign(p) -> int:
    """Sign of a permutation of 0..n-1 by counting inversions."""
    inv = sum(1 for a in range(len(p)) for b in range(a + 1, len(p)) if p[a] > p[b])
    return -1 if inv % 2 else 1


def kronecker_enum(i, j) -> int:
    """Generalized Kronecker symbol by enumerating every permutation."""
    i, j = tuple(i), tuple(j)
    if len(i) != len(j):
        return 0
    for p in permutations(range(len(i))):
        if tuple(i[k] for k in p) == j:
            return permutation_sign(p) if len(set(i)) == len(i) else 0
    return 0


def wedge12_bruteforce(a, b, target, n):
    """``(1/2) sum_{ijk} delta_{ijk,target} a_i b_jk`` over all n^3 triples (1-based callables)."""
    total = 0
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            for k in range(1, n + 1):
                d = kronecker_enum((i, j, k), tuple(target))
                if d:
                    total += d * a(i) * b(j, k)
    return Fraction(total, 2) if isinstance(total, int) else total / 2


# -- classical surfaces -------------------------------------------------------

def torus_x(R, r, u):
    a, v = u
    return np.array([(R + r * np.cos(v)) * np.cos(a), (R + r * np.cos(v)) * np.sin(a), r * np.sin(v)])


def torus_d2(R, r, u):
    """Hand-derived second partials ``d2[i, l, m]`` of the torus embedding."""
    a, v = u
    ring = R + r * np.cos(v)
    d = np.zeros((3, 2, 2))
    d[:, 0, 0] = [-ring * np.cos(a), -ring * np.sin(a), 0.0]
    d[:, 0, 1] = d[:, 1, 0] = [r * np.sin(v) * np.sin(a), -r * np.sin(v) * np.cos(a), 0.0]
    d[:, 1, 1] = [-r * np.cos(v) * np.cos(a), -r * np.cos(v) * np.sin(a), -r * np.sin(v)]
    return d


def torus_gauss(R, r, v):
    return np.cos(v) / (r * (R + r * np.cos(v)))


def torus_principal(R, r, v):
    """Unsigned principal curvatures along the tube and around the axis."""
    return sorted([1.0 / r, np.cos(v) / (R + r * np.cos(v))])


def sphere_point(angles):
    """Polar-angle point on the unit sphere (first angle from the last axis)."""
    angles = list(angles)
    if len(angles) == 1:
        return np.array([np.cos(angles[0]), np.sin(angles[0])])
    head = np.sin(angles[0]) * sphere_point(angles[1:])
    return np.concatenate([head, [np.cos(angles[0])]])


# -- finite-difference geometry ------------------------------------------------

def fd_jacobian(f, u, h=1e-6):
    u = np.asarray(u, dtype=float)
    cols = []
    for l in range(len(u)):
        e = np.zeros_like(u)
        e[l] = h
        cols.append((np.asarray(f(u + e)) - np.asarray(f(u - e))) / (2 * h))
    return np.stack(cols, axis=-1)


def fd_shape_operator(f, u, h=1e-4):
    """Principal curvatures (unsigned, sorted) from first and second fundamental forms."""
    u = np.asarray(u, dtype=float)
    d1 = fd_jacobian(f, u, 1e-6)
    n = _normal(d1)
    M = len(u)
    second = np.zeros((M, M))
    for l in range(M):
        for m in range(M):
            el, em = np.eye(M)[l] * h, np.eye(M)[m] * h
            dd = (f(u + el + em) - f(u + el - em) - f(u - el + em) + f(u - el - em)) / (4 * h * h)
            second[l, m] = dd @ n
    g = d1.T @ d1
    w = np.linalg.eigvals(np.linalg.solve(g, second))
    return sorted(np.abs(w.real))


def _normal(d1):
    N = d1.shape[0]
    q, _ = np.linalg.qr(np.column_stack([d1, np.eye(N)[:, [np.argmin(np.abs(d1).sum(axis=1))]]]))
    return q[:, -1]


def gram_schmidt_frame(d1):
    """Orthonormal rows from the columns of ``d1`` plus the det=+1 normal."""
    rows = []
    for l in range(d1.shape[1]):
        v = d1[:, l].copy()
        for r in rows:
            v -= (v @ r) * r
        rows.append(v / np.linalg.norm(v))
    E = np.array(rows)
    n = np.linalg.svd(E)[2][-1]
    E = np.vstack([E, n])
    if np.linalg.det(E) < 0:
        E[-1] = -E[-1]
    return E


def fd_frame(f, u, h=1e-6):
    return gram_schmidt_frame(fd_jacobian(f, u, h))
