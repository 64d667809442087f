"""Index-level exterior algebra on coefficient arrays.

All public indices are 1-based.  Coefficients may be floats or exact
numbers such as :class:`fractions.Fraction`; nothing here forces a float.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from math import factorial
import numpy as np

from .errors import GeometryError


@dataclass(frozen=True)
class MultiIndex:
    """Ordered list of indices in ``1..n`` with length at most ``n``."""

    indices: tuple[int, ...]
    n: int

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", idx)
        if len(idx) > self.n:
            raise GeometryError(f"multi-index of length {len(idx)} exceeds dimension {self.n}")
        if any(not 1 <= i <= self.n for i in idx):
            raise GeometryError(f"indices {idx} must lie in 1..{self.n}")

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    @property
    def distinct(self) -> bool:
        return len(set(self.indices)) == len(self.indices)


def _as_tuple(i) -> tuple[int, ...]:
    return i.indices if isinstance(i, MultiIndex) else tuple(int(k) for k in i)


def kronecker_delta(i, j) -> int:
    """Generalized Kronecker symbol of two index lists.

    +1 or -1 when ``j`` is an even or odd permutation of the distinct entries
    of ``i``, otherwise 0 (including mismatched lengths).
    """
    a, b = list(_as_tuple(i)), _as_tuple(j)
    if len(a) != len(b) or len(set(a)) != len(a) or sorted(a) != sorted(b):
        return 0
    # Sort a into b by transpositions, counting swaps.
    sign = 1
    for pos, target in enumerate(b):
        k = a.index(target, pos)
        if k != pos:
            a[pos], a[k] = a[k], a[pos]
            sign = -sign
    return sign


def rot(idx_a: int, idx_b: int, tensor):
    """``A[..i..j..] - A[..j..i..]`` over the 1-based slots ``idx_a`` and ``idx_b``."""
    A = np.asarray(tensor)
    nd = A.ndim
    if idx_a == idx_b or not (1 <= idx_a <= nd and 1 <= idx_b <= nd):
        raise GeometryError(f"rot slots ({idx_a}, {idx_b}) invalid for a rank-{nd} table")
    a, b = idx_a - 1, idx_b - 1
    if A.shape[a] != A.shape[b]:
        raise GeometryError(f"rot slots have different lengths {A.shape[a]} and {A.shape[b]}")
    return A - np.swapaxes(A, a, b)


@dataclass(frozen=True)
class Form1:
    """Pfaff form ``sum_k a_k omega_k``."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))

    @property
    def n(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, k: int):
        if not 1 <= k <= self.n:
            raise GeometryError(f"index {k} outside 1..{self.n}")
        return self.coeffs[k - 1]


@dataclass(frozen=True)
class Form2:
    """2-form ``sum_{l<m} c_lm omega_l ^ omega_m``; only ``l < m`` is stored."""

    n: int
    upper: tuple  # row-major c_lm for l < m

    @classmethod
    def from_table(cls, table) -> "Form2":
        """Build from a square table, keeping its upper triangle."""
        T = np.asarray(table, dtype=object)
        n = T.shape[0]
        if T.shape != (n, n):
            raise GeometryError(f"2-form table must be square, got {T.shape}")
        return cls(n, tuple(T[l, m] for l in range(n) for m in range(l + 1, n)))

    @classmethod
    def from_entries(cls, n: int, entries: dict) -> "Form2":
        """``entries`` maps 1-based ``(l, m)`` with ``l != m`` to coefficients."""
        T = np.zeros((n, n), dtype=object)
        for (l, m), v in entries.items():
            if l == m:
                raise GeometryError("diagonal 2-form entry")
            if l < m:
                T[l - 1, m - 1] = v
            else:
                T[m - 1, l - 1] = -v
        return cls.from_table(T)

    def __post_init__(self):
        if len(self.upper) != self.n * (self.n - 1) // 2:
            raise GeometryError("wrong number of stored 2-form entries")

    def _pos(self, l: int, m: int) -> int:
        return (l - 1) * self.n - (l - 1) * l // 2 + (m - l - 1)

    def __getitem__(self, lm: tuple[int, int]):
        l, m = lm
        if not (1 <= l <= self.n and 1 <= m <= self.n):
            raise GeometryError(f"index ({l}, {m}) outside 1..{self.n}")
        if l == m:
            return 0
        if l < m:
            return self.upper[self._pos(l, m)]
        return -self.upper[self._pos(m, l)]

    def table(self) -> np.ndarray:
        out = np.zeros((self.n, self.n), dtype=object)
        for l in range(1, self.n + 1):
            for m in range(1, self.n + 1):
                out[l - 1, m - 1] = self[l, m]
        return out


def _target(target, n: int, length: int) -> tuple[int, ...]:
    t = MultiIndex(_as_tuple(target), n)
    if len(t) != length or not t.distinct:
        raise GeometryError(f"target {t.indices} must hold {length} distinct indices")
    return t.indices


def wedge11(a: Form1, b: Form1, target) -> object:
    """Coefficient of ``a ^ b`` on ``omega_i ^ omega_j``: ``a_i b_j - a_j b_i``."""
    if a.n != b.n:
        raise GeometryError("forms live in different dimensions")
    i, j = _target(target, a.n, 2)
    return a[i] * b[j] - a[j] * b[i]


def wedge12(a: Form1, b: Form2, target) -> object:
    """``(1/1!)(1/2!) sum delta_{ijk, target} a_i b_jk`` over the permutations of ``target``."""
    if a.n != b.n:
        raise GeometryError("forms live in different dimensions")
    t = _target(target, a.n, 3)
    total = 0
    for i, j, k in permutations(t):
        total = total + kronecker_delta((i, j, k), t) * a[i] * b[j, k]
    return _divide(total, factorial(1) * factorial(2))


def _divide(total, d: int):
    """Divide without leaving exact arithmetic for integer input."""
    if isinstance(total, int):
        r = Fraction(total, d)
        return int(r) if r.denominator == 1 else r
    return total / d

