"""Gelfand-Tsetlin bases and gl(n) generator matrices.

Patterns are stored row by row, ``rows[k - 1]`` holding the ``k`` entries of
row ``k``; the top row ``rows[n - 1]`` equals the highest weight.  The basis
order is descending lexicographic on the pattern flattened from the top row
down, so the highest-weight vector is always basis vector 0.

Generators follow ``J^a_b = E_ab`` with ``[J^a_b, J^c_d] = d^c_b J^a_d - d^a_d J^c_b``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

Pattern = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class HighestWeight:
    lam: tuple[int, ...]

    def __post_init__(self):
        lam = tuple(int(x) for x in self.lam)
        if len(lam) < 1:
            raise ValueError("highest weight needs at least one entry")
        for i in range(len(lam) - 1):
            if lam[i] < lam[i + 1]:
                raise ValueError(f"weight {lam} is not weakly decreasing at position {i + 1}")
        object.__setattr__(self, "lam", lam)

    @property
    def n(self) -> int:
        return len(self.lam)

    def shifted(self) -> tuple[int, ...]:
        """Shifted weights lambda_i - i + 1."""
        return tuple(l - i for i, l in enumerate(self.lam))

    @classmethod
    def parse(cls, text: str) -> "HighestWeight":
        return cls(tuple(int(t) for t in text.replace(" ", "").split(",") if t))

    def __str__(self):
        return ",".join(map(str, self.lam))


def as_weight(hw) -> HighestWeight:
    if isinstance(hw, HighestWeight):
        return hw
    if isinstance(hw, str):
        return HighestWeight.parse(hw)
    return HighestWeight(tuple(hw))


@dataclass(frozen=True)
class LinOp:
    """Dense complex matrix together with a description of its basis."""

    matrix: np.ndarray
    basis_tag: tuple = field(default=(), compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"LinOp needs a square matrix, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other):
        other = other.matrix if isinstance(other, LinOp) else other
        return LinOp(self.matrix @ other, self.basis_tag)


def weyl_dimension(lam: Sequence[int]) -> int:
    num, den = 1, 1
    n = len(lam)
    for i in range(n):
        for j in range(i + 1, n):
            num *= lam[i] - lam[j] + j - i
            den *= j - i
    return num // den


def _subpatterns(top: tuple[int, ...]):
    # all rows of length len(top) - 1 interlacing with top
    ranges = [range(top[i + 1], top[i] + 1) for i in range(len(top) - 1)]
    return [tuple(r) for r in itertools.product(*ranges)]


@lru_cache(maxsize=None)
def _patterns(lam: tuple[int, ...]) -> tuple[Pattern, ...]:
    out: list[Pattern] = []

    def grow(rows_down: list[tuple[int, ...]]):
        row = rows_down[-1]
        if len(row) == 1:
            out.append(tuple(reversed(rows_down)))
            return
        for sub in _subpatterns(row):
            grow(rows_down + [sub])

    grow([lam])

    def flat(p: Pattern):
        return tuple(x for row in reversed(p) for x in row)

    out.sort(key=flat, reverse=True)
    return tuple(out)


def enumerate_patterns(hw) -> list[Pattern]:
    """All GT patterns of ``hw`` in descending lexicographic order."""
    return list(_patterns(as_weight(hw).lam))


def dimension(hw) -> int:
    return len(_patterns(as_weight(hw).lam))


def is_interlacing(p: Pattern) -> bool:
    for k in range(1, len(p)):
        up, down = p[k], p[k - 1]
        if any(not (up[i] >= down[i] >= up[i + 1]) for i in range(k)):
            return False
    return True


# sparse exact matrices: {row: {col: Fraction}}
_Sparse = dict


def _sparse_mul(a: _Sparse, b: _Sparse) -> _Sparse:
    out: _Sparse = {}
    for i, row in a.items():
        acc: dict = {}
        for k, v in row.items():
            for j, w in b.get(k, {}).items():
                acc[j] = acc.get(j, 0) + v * w
        acc = {j: v for j, v in acc.items() if v != 0}
        if acc:
            out[i] = acc
    return out


def _sparse_sub(a: _Sparse, b: _Sparse) -> _Sparse:
    out = {i: dict(r) for i, r in a.items()}
    for i, row in b.items():
        tgt = out.setdefault(i, {})
        for j, v in row.items():
            tgt[j] = tgt.get(j, 0) - v
    return {i: {j: v for j, v in r.items() if v != 0} for i, r in out.items() if any(v != 0 for v in r.values())}


def _l(p: Pattern, k: int, i: int) -> int:
    # l_{k,i} = m_{k,i} - i + 1 with 1-based k, i
    return p[k - 1][i - 1] - i + 1


class _Generators:
    """Exact generator matrices for one highest weight, built lazily."""

    def __init__(self, lam: tuple[int, ...]):
        self.lam = lam
        self.n = len(lam)
        self.pats = _patterns(lam)
        self.index = {p: i for i, p in enumerate(self.pats)}
        self._cache: dict[tuple[int, int], _Sparse] = {}

    def _shift(self, p: Pattern, k: int, i: int, d: int) -> Pattern:
        rows = [list(r) for r in p]
        rows[k - 1][i - 1] += d
        return tuple(tuple(r) for r in rows)

    def _cartan(self, k: int) -> _Sparse:
        out = {}
        for c, p in enumerate(self.pats):
            v = sum(p[k - 1]) - (sum(p[k - 2]) if k > 1 else 0)
            if v:
                out[c] = {c: Fraction(v)}
        return out

    def _raise(self, k: int) -> _Sparse:
        # E_{k,k+1}
        cols: dict[int, dict[int, Fraction]] = {}
        for c, p in enumerate(self.pats):
            for i in range(1, k + 1):
                q = self._shift(p, k, i, 1)
                r = self.index.get(q)
                if r is None:
                    continue
                num = Fraction(1)
                for j in range(1, k + 2):
                    num *= _l(p, k, i) - _l(p, k + 1, j)
                den = Fraction(1)
                for j in range(1, k + 1):
                    if j != i:
                        den *= _l(p, k, i) - _l(p, k, j)
                v = -num / den
                if v:
                    cols.setdefault(r, {})[c] = v
        return cols

    def _lower(self, k: int) -> _Sparse:
        # E_{k+1,k}
        cols: dict[int, dict[int, Fraction]] = {}
        for c, p in enumerate(self.pats):
            for i in range(1, k + 1):
                q = self._shift(p, k, i, -1)
                r = self.index.get(q)
                if r is None:
                    continue
                num = Fraction(1)
                for j in range(1, k):
                    num *= _l(p, k, i) - _l(p, k - 1, j)
                den = Fraction(1)
                for j in range(1, k + 1):
                    if j != i:
                        den *= _l(p, k, i) - _l(p, k, j)
                v = num / den
                if v:
                    cols.setdefault(r, {})[c] = v
        return cols

    def exact(self, a: int, b: int) -> _Sparse:
        key = (a, b)
        if key in self._cache:
            return self._cache[key]
        if a == b:
            m = self._cartan(a)
        elif b == a + 1:
            m = self._raise(a)
        elif b == a - 1:
            m = self._lower(b)
        elif b > a + 1:
            x, y = self.exact(a, a + 1), self.exact(a + 1, b)
            m = _sparse_sub(_sparse_mul(x, y), _sparse_mul(y, x))
        else:
            x, y = self.exact(a, a - 1), self.exact(a - 1, b)
            m = _sparse_sub(_sparse_mul(x, y), _sparse_mul(y, x))
        self._cache[key] = m
        return m

    def dense(self, a: int, b: int) -> np.ndarray:
        d = len(self.pats)
        out = np.zeros((d, d), dtype=complex)
        for i, row in self.exact(a, b).items():
            for j, v in row.items():
                out[i, j] = float(v)
        out.setflags(write=False)
        return out


@lru_cache(maxsize=None)
def _generators(lam: tuple[int, ...]) -> _Generators:
    return _Generators(lam)


@lru_cache(maxsize=None)
def _dense_generator(lam: tuple[int, ...], a: int, b: int) -> np.ndarray:
    return _generators(lam).dense(a, b)


def generator_exact(a: int, b: int, hw) -> dict:
    """Sparse exact (Fraction) matrix of J^a_b as ``{row: {col: value}}``."""
    hw = as_weight(hw)
    _check_index(a, b, hw.n)
    return _generators(hw.lam).exact(a, b)


def _check_index(a, b, n):
    if not (1 <= a <= n and 1 <= b <= n):
        raise IndexError(f"generator indices ({a}, {b}) out of range for gl({n})")


def gen(a: int, b: int, hw) -> np.ndarray:
    """Read-only dense complex matrix of J^a_b (1-based indices)."""
    hw = as_weight(hw)
    _check_index(a, b, hw.n)
    return _dense_generator(hw.lam, a, b)


def generator_matrix(a: int, b: int, hw) -> LinOp:
    hw = as_weight(hw)
    return LinOp(gen(a, b, hw), ("gt", hw.lam))


def casimir_matrix(k: int, I: Sequence[int], hw) -> np.ndarray:
    """C_k = sum J^{a1}_{ak} J^{a2}_{a1} ... J^{ak}_{a(k-1)} over indices in I."""
    hw = as_weight(hw)
    I = sorted(set(I))
    if not I:
        raise ValueError("index set for a Casimir must be nonempty")
    if k < 1:
        raise ValueError("Casimir order must be >= 1")
    d = dimension(hw)
    eye = np.eye(d, dtype=complex)
    # chain[a1][c] = sum over paths a1 -> c of J^{a2}_{a1} ... J^{c}_{.}
    chain = {a: {c: (eye if a == c else None) for c in I} for a in I}
    for _ in range(k - 1):
        new = {}
        for a in I:
            new[a] = {}
            for c in I:
                acc = None
                for b in I:
                    w = chain[a][b]
                    if w is None:
                        continue
                    term = w @ gen(c, b, hw)
                    acc = term if acc is None else acc + term
                new[a][c] = acc
        chain = new
    out = np.zeros((d, d), dtype=complex)
    for a in I:
        for c in I:
            if chain[a][c] is not None:
                out += gen(a, c, hw) @ chain[a][c]
    return out


def casimir(k: int, I: Sequence[int], hw) -> LinOp:
    hw = as_weight(hw)
    return LinOp(casimir_matrix(k, I, hw), ("gt", hw.lam))


def tensor_power_ops(op: np.ndarray, site: int, L: int) -> np.ndarray:
    """Embed a one-site operator at ``site`` (0-based) of an L-site chain."""
    d = op.shape[0]
    left = np.eye(d ** site)
    right = np.eye(d ** (L - site - 1))
    return np.kron(np.kron(left, op), right)
