"""Q-operators from twisted, normalized oscillator traces of R_I monodromies."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache, reduce
from typing import Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .gtbasis import HighestWeight, LinOp, as_weight, dimension, gen
from .laxfactory import POLYNOMIAL, PoleError, r_I
from .weights import complement, index_set


@lru_cache(maxsize=None)
def _eulerian(k: int) -> Polynomial:
    # sum_m m^k t^m = P_k(t) / (1-t)^(k+1)
    p = Polynomial([1.0])
    one_minus_t = Polynomial([1.0, -1.0])
    t = Polynomial([0.0, 1.0])
    for j in range(1, k + 1):
        p = t * (p.deriv() * one_minus_t + j * p)
    return p


def trace_rule(k: int, t: complex) -> complex:
    """Normalized single-mode trace (1 - t) sum_{m>=0} m^k t^m as a rational function of t."""
    if k < 0:
        raise ValueError("power must be nonnegative")
    if abs(1 - t) < 1e-14:
        raise PoleError("untwisted oscillator direction: t = 1")
    return complex(_eulerian(k)(t) / (1 - t) ** k)


def twist_factors(I: Sequence[int], n: int, twist: Sequence[complex]) -> list[complex]:
    """t for each oscillator mode (c, s): the twist weight exp(-i(phi_c - phi_s)) per quantum."""
    S = complement(I, n)
    return [np.exp(-1j * (twist[c - 1] - twist[s - 1])) for c in I for s in S]


def _falling_poly(offset: int, count: int) -> Polynomial:
    # (m + offset)(m + offset - 1)...(m + offset - count + 1)
    p = Polynomial([1.0])
    for j in range(count):
        p = p * Polynomial([offset - j, 1.0])
    return p


def _sequence_weight(seq, nmodes: int, tvals: Sequence[complex]) -> complex:
    weight = 1.0 + 0j
    for p in range(nmodes):
        poly = Polynomial([1.0])
        offset = 0
        for alpha, beta in reversed(seq):
            poly = poly * _falling_poly(offset, beta[p])
            offset += alpha[p] - beta[p]
        coef = poly.coef
        weight *= sum(c * trace_rule(k, tvals[p]) for k, c in enumerate(coef) if c != 0)
    return weight


def _check_twist(twist, n):
    if len(twist) != n:
        raise ValueError(f"twist needs {n} angles, got {len(twist)}")


def q_operator_matrix(z: complex, I: Sequence[int], hw, L: int, twist: Sequence[complex], normalization: str = POLYNOMIAL) -> np.ndarray:
    hw = as_weight(hw)
    I = index_set(I, hw.n)
    _check_twist(twist, hw.n)
    if L < 1:
        raise ValueError("chain length must be >= 1")
    op = r_I(z, I, hw, normalization)
    pref = np.exp(1j * z * sum(twist[a - 1] for a in I))
    if not op.modes:
        site = op.terms[((), ())]
        return pref * reduce(np.kron, [site] * L)
    tvals = twist_factors(I, hw.n, twist)
    nm = len(op.modes)
    items = list(op.terms.items())
    d = dimension(hw)
    out = np.zeros((d**L, d**L), dtype=complex)
    for choice in itertools.product(range(len(items)), repeat=L):
        keys = [items[c][0] for c in choice]
        if any(sum(k[0][p] for k in keys) != sum(k[1][p] for k in keys) for p in range(nm)):
            continue
        w = _sequence_weight(keys, nm, tvals)
        if w == 0:
            continue
        out += w * reduce(np.kron, [items[c][1] for c in choice])
    return pref * out


def q_operator(z: complex, I: Sequence[int], hw, L: int, twist: Sequence[complex], normalization: str = POLYNOMIAL) -> LinOp:
    hw = as_weight(hw)
    return LinOp(q_operator_matrix(z, I, hw, L, twist, normalization), ("gt^L", hw.lam, L))


@dataclass
class QFamily:
    """All Q_I(z) of one chain, evaluated on demand and memoized per (I, z)."""

    hw: HighestWeight
    L: int
    twist: tuple
    normalization: str = POLYNOMIAL
    _memo: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.hw = as_weight(self.hw)
        self.twist = tuple(complex(p) for p in self.twist)
        _check_twist(self.twist, self.hw.n)

    @property
    def dim(self) -> int:
        return dimension(self.hw) ** self.L

    def __call__(self, I: Sequence[int], z: complex) -> np.ndarray:
        key = (index_set(I, self.hw.n), complex(z))
        if key not in self._memo:
            self._memo[key] = q_operator_matrix(z, key[0], self.hw, self.L, self.twist, self.normalization)
        return self._memo[key]


def delta(indices: Sequence[int], twist: Sequence[complex]) -> complex:
    """prod_{i<j} 2i sin((phi_{a_i} - phi_{a_j}) / 2)."""
    out = 1.0 + 0j
    for i, j in itertools.combinations(range(len(indices)), 2):
        out *= 2j * np.sin((twist[indices[i] - 1] - twist[indices[j] - 1]) / 2)
    return out


def _rel(diff, *terms) -> float:
    scale = max(np.linalg.norm(t) for t in terms)
    return float(np.linalg.norm(diff) / scale) if scale else float(np.linalg.norm(diff))


@dataclass(frozen=True)
class Residual:
    absolute: float
    relative: float


def _report(lhs, rhs, *terms) -> Residual:
    diff = lhs - rhs
    return Residual(float(np.linalg.norm(diff)), _rel(diff, lhs, rhs, *terms))


def commutation_report(I, J, z1, z2, hw, L, twist, family: QFamily | None = None) -> Residual:
    fam = family or QFamily(hw, L, tuple(twist))
    A, B = fam(I, z1), fam(J, z2)
    na, nb = np.linalg.norm(A), np.linalg.norm(B)
    diff = A @ B - B @ A
    absolute = float(np.linalg.norm(diff))
    return Residual(absolute, absolute / (na * nb) if na and nb else absolute)


def commutation_residual(I, J, z1, z2, hw, L, twist, family: QFamily | None = None) -> float:
    return commutation_report(I, J, z1, z2, hw, L, twist, family).relative


def qq_report(I, a, b, z, hw, L, twist, family: QFamily | None = None) -> Residual:
    """D_ab Q_{Iab}(z) Q_I(z) = Q_{Ia}(z+1/2) Q_{Ib}(z-1/2) - Q_{Ia}(z-1/2) Q_{Ib}(z+1/2).

    Orientation matches the p = 2 determinant formula with the trace twist
    exp(-i (phi_a - phi_s) h).
    """
    fam = family or QFamily(hw, L, tuple(twist))
    n = fam.hw.n
    I = index_set(I, n)
    if a in I or b in I or a == b:
        raise ValueError("QQ relation needs distinct a, b outside I")
    d_ab = delta((a, b), fam.twist)
    if abs(d_ab) < 1e-14:
        raise ValueError("degenerate twist: phi_a == phi_b")
    Ia, Ib, Iab = I + (a,), I + (b,), I + (a, b)
    lhs = d_ab * fam(Iab, z) @ fam(I, z)
    t1 = fam(Ia, z + 0.5) @ fam(Ib, z - 0.5)
    t2 = fam(Ia, z - 0.5) @ fam(Ib, z + 0.5)
    return _report(lhs, t1 - t2, t1, t2)


def qq_residual(I, a, b, z, hw, L, twist, family: QFamily | None = None) -> float:
    """Relative residual of the QQ relation, see ``qq_report``."""
    return qq_report(I, a, b, z, hw, L, twist, family).relative


def operator_det(rows: list[list[np.ndarray]]) -> np.ndarray:
    """Leibniz determinant of a matrix of mutually commuting operators."""
    p = len(rows)
    out = 0
    for perm in itertools.permutations(range(p)):
        sign = 1
        for i in range(p):
            for j in range(i + 1, p):
                if perm[i] > perm[j]:
                    sign = -sign
        out = out + sign * reduce(np.matmul, [rows[i][perm[i]] for i in range(p)])
    return out


def det_formula_report(I, z, hw, L, twist, family: QFamily | None = None) -> Residual:
    """D_I Q_I(z) = det || Q_{a_i}(z - j + (p+1)/2) ||."""
    fam = family or QFamily(hw, L, tuple(twist))
    I = index_set(I, fam.hw.n)
    p = len(I)
    if p < 1:
        raise ValueError("determinant formula needs |I| >= 1")
    dI = delta(I, fam.twist)
    if abs(dI) < 1e-14:
        raise ValueError("degenerate twist inside I")
    lhs = dI * fam(I, z)
    rows = [[fam((a,), z - j + (p + 1) / 2) for j in range(1, p + 1)] for a in I]
    return _report(lhs, operator_det(rows))


def det_formula_residual(I, z, hw, L, twist, family: QFamily | None = None) -> float:
    return det_formula_report(I, z, hw, L, twist, family).relative


def cartan_charge(a: int, hw, L: int) -> np.ndarray:
    """Sum over sites of J^a_a."""
    from .gtbasis import gen, tensor_power_ops

    hw = as_weight(hw)
    return sum(tensor_power_ops(gen(a, a, hw), s, L) for s in range(L))


def single_site_closed_form(z: complex, a: int, hw, twist: Sequence[complex]) -> np.ndarray:
    """Diagonal of the gl(2), L = 1 Q-operator up to one scalar factor at each z.

    Gamma(z - m + 1/2) 2F1(m - l_1, m - l_2; 1/2 - z + m; 1/(1 - e^{i(phi_a - phi_b)})),
    with m the J^b_b eigenvalue of each basis vector and b the other index.
    """
    import mpmath

    hw = as_weight(hw)
    if hw.n != 2 or a not in (1, 2):
        raise ValueError("closed form is available for gl(2) only")
    b = 3 - a
    l1, l2 = hw.lam[0], hw.lam[1] - 1
    x = 1 / (1 - np.exp(1j * (twist[a - 1] - twist[b - 1])))
    m_vals = np.real(np.diag(gen(b, b, hw)))
    out = [
        complex(mpmath.gamma(z - m + 0.5) * mpmath.hyp2f1(m - l1, m - l2, 0.5 - z + m, x))
        for m in m_vals
    ]
    return np.array(out)
