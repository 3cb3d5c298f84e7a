"""Degenerate Lax operators R_I(z) and the fundamental Lax operator."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import special

from .gtbasis import HighestWeight, LinOp, as_weight, dimension, gen
from .weights import complement, index_set, shifted_weights

POLYNOMIAL = "polynomial"
RAW = "raw"


class PoleError(ZeroDivisionError):
    pass


def pochhammer(x: complex, m: int) -> complex:
    """Rising factorial (x)_m for integer m >= 0."""
    if m < 0:
        raise ValueError(f"negative Pochhammer length {m}")
    out = 1.0 + 0j
    for j in range(m):
        out *= x + j
    return out


def r0_block_value(z: complex, values: Sequence[int], lam: Sequence[int], normalization: str = POLYNOMIAL) -> complex:
    """Scalar value of R_0 on a block with gl(S) shifted weights ``values``.

    Polynomial normalization divides prod_k Gamma(z - q/2 - l_k + 1) by
    prod_i Gamma(z - q/2 - (lam_i - i + 1) + 1) / prod_{i>q} Gamma(z - q/2 + i - lam_n),
    leaving a product of rising factorials.
    """
    q = len(values)
    n = len(lam)
    w = z - q / 2 + 1
    if normalization == RAW:
        out = 1.0 + 0j
        for ell in values:
            arg = w - ell
            if abs(arg - round(arg.real)) < 1e-12 and round(arg.real) <= 0:
                raise PoleError(f"Gamma pole at z={z} for shifted weight {ell}")
            out *= special.gamma(arg)
        return out
    if normalization != POLYNOMIAL:
        raise ValueError(f"unknown normalization {normalization!r}")
    out = 1.0 + 0j
    for k, ell in enumerate(values, start=1):
        mu = ell + k - 1
        out *= pochhammer(w - lam[k - 1] + k - 1, lam[k - 1] - mu)
    for i in range(q + 1, n + 1):
        out *= pochhammer(w + i - 1 - lam[i - 1], lam[i - 1] - lam[-1])
    return out


def r0_matrix(z: complex, I: Sequence[int], hw, normalization: str = POLYNOMIAL) -> np.ndarray:
    hw = as_weight(hw)
    I = index_set(I, hw.n)
    S = complement(I, hw.n)
    d = dimension(hw)
    if not S:
        return r0_block_value(z, (), hw.lam, normalization) * np.eye(d, dtype=complex)
    table = shifted_weights(S, hw)
    return table.operator(lambda v: r0_block_value(z, v, hw.lam, normalization))


def r0(z: complex, I: Sequence[int], hw, normalization: str = POLYNOMIAL) -> LinOp:
    hw = as_weight(hw)
    return LinOp(r0_matrix(z, I, hw, normalization), ("gt", hw.lam))


def _nilpotent_powers(m: np.ndarray) -> list[np.ndarray]:
    """[m^0/0!, m^1/1!, ...] up to the last nonzero power."""
    out = [np.eye(m.shape[0], dtype=complex)]
    scale = max(1.0, np.abs(m).max(initial=0.0))
    for k in range(1, m.shape[0] + 2):
        nxt = out[-1] @ m / k
        if np.abs(nxt).max(initial=0.0) < 1e-13 * scale:
            return out
        out.append(nxt)
    raise ArithmeticError("cross-block generator is not nilpotent")


@lru_cache(maxsize=None)
def _dressing(I: tuple[int, ...], lam: tuple[int, ...]):
    """Per-mode expansions of exp(abar J^c_s) and exp(-a J^s_c)."""
    hw = HighestWeight(lam)
    S = complement(I, hw.n)
    modes = tuple((c, s) for c in I for s in S)
    left = [_nilpotent_powers(gen(c, s, hw)) for c, s in modes]
    right = [_nilpotent_powers(-gen(s, c, hw)) for c, s in modes]
    return modes, left, right


def truncation_degree(I: Sequence[int], hw) -> int:
    hw = as_weight(hw)
    q = hw.n - len(I)
    return (hw.lam[0] - hw.lam[-1]) * min(len(I), q)


@dataclass(frozen=True)
class AuxOperator:
    """Normal-ordered operator sum_{alpha,beta} abar^alpha a^beta (x) C_{alpha,beta}.

    ``abar`` of mode p acts as multiplication by x_p on monomials and ``a`` as d/dx_p.
    """

    modes: tuple[tuple[int, int], ...]
    terms: dict

    def apply(self, exps: Sequence[int]) -> dict:
        """Image of the monomial prod x_p^exps[p] as {monomial: matrix on V}."""
        out: dict = {}
        for (alpha, beta), mat in self.terms.items():
            coef = 1.0
            new = []
            for e, a, b in zip(exps, alpha, beta):
                if b > e:
                    coef = 0.0
                    break
                coef *= math.perm(e, b)
                new.append(e - b + a)
            if coef == 0.0:
                continue
            key = tuple(new)
            out[key] = out.get(key, 0) + coef * mat
        return out


def r_I(z: complex, I: Sequence[int], hw, normalization: str = POLYNOMIAL) -> AuxOperator:
    """exp(abar J) R_0(z) exp(-a J) expanded in normal-ordered oscillator monomials."""
    hw = as_weight(hw)
    I = index_set(I, hw.n)
    R0 = r0_matrix(z, I, hw, normalization)
    modes, left, right = _dressing(I, hw.lam)
    if not modes:
        return AuxOperator((), {((), ()): R0})

    def combos(powers):
        for exps in itertools.product(*[range(len(p)) for p in powers]):
            mat = None
            for p, e in zip(powers, exps):
                if e:
                    mat = p[e] if mat is None else mat @ p[e]
            yield exps, mat

    lefts = list(combos(left))
    rights = list(combos(right))
    bound = truncation_degree(I, hw)
    terms = {}
    scale = max(1.0, np.abs(R0).max())
    for alpha, lm in lefts:
        lr = R0 if lm is None else lm @ R0
        for beta, rm in rights:
            mat = lr if rm is None else lr @ rm
            if np.abs(mat).max() < 1e-13 * scale:
                continue
            if sum(alpha) > bound or sum(beta) > bound:
                raise ArithmeticError(f"nonzero term beyond truncation degree {bound}")
            terms[(alpha, beta)] = mat
    return AuxOperator(modes, terms)


def lax_fundamental_matrix(z: complex, hw) -> np.ndarray:
    hw = as_weight(hw)
    n = hw.n
    d = dimension(hw)
    out = z * np.eye(n * d, dtype=complex)
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            e = np.zeros((n, n))
            e[a - 1, b - 1] = 1
            out += np.kron(e, gen(b, a, hw))
    return out


def lax_fundamental(z: complex, hw) -> LinOp:
    hw = as_weight(hw)
    return LinOp(lax_fundamental_matrix(z, hw), ("fund", hw.n, "gt", hw.lam))


def yang_r(z: complex, n: int) -> np.ndarray:
    """z I + P on C^n (x) C^n."""
    P = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            P[i * n + j, j * n + i] = 1
    return z * np.eye(n * n) + P


def rll_residual(z1: complex, z2: complex, hw) -> float:
    """YBE R(z1-z2) L1(z1) L2(z2) = L2(z2) L1(z1) R(z1-z2) on C^n (x) C^n (x) V."""
    hw = as_weight(hw)
    n, d = hw.n, dimension(hw)
    R = np.kron(yang_r(z1 - z2, n), np.eye(d))
    Lz1 = lax_fundamental_matrix(z1, hw).reshape(n, d, n, d)
    Lz2 = lax_fundamental_matrix(z2, hw).reshape(n, d, n, d)
    # L acting on factors (0, V) and (1, V) of C^n (x) C^n (x) V
    L1 = np.einsum("aibj,cd->acibdj", Lz1, np.eye(n)).reshape(n * n * d, n * n * d)
    L2 = np.einsum("cidj,ab->acibdj", Lz2, np.eye(n)).reshape(n * n * d, n * n * d)
    lhs = R @ L1 @ L2
    rhs = L2 @ L1 @ R
    return float(np.abs(lhs - rhs).max())


def verify_block_equations(z: complex, I: Sequence[int], hw, normalization: str = POLYNOMIAL) -> tuple[float, float, float, float]:
    """Residuals of the four intertwining relations for R_0 with the gl(I) factor in the singlet."""
    hw = as_weight(hw)
    I = index_set(I, hw.n)
    S = complement(I, hw.n)
    q = len(S)
    R = r0_matrix(z, I, hw, normalization)
    zz = z - q / 2

    def J(a, b):
        return gen(a, b, hw)

    def comm(x, y):
        return x @ y - y @ x

    res = [0.0, 0.0, 0.0, 0.0]
    for s in S:
        for t in S:
            res[0] = max(res[0], np.abs(comm(R, J(s, t))).max())
    for s in S:
        for b in I:
            inner = zz * J(s, b) - sum(J(c, b) @ J(s, c) for c in S)
            res[1] = max(res[1], np.abs(R @ inner - J(s, b) @ R).max())
            inner = zz * J(b, s) - sum(J(c, s) @ J(b, c) for c in S)
            res[2] = max(res[2], np.abs(R @ J(b, s) - inner @ R).max())
    for a in I:
        for b in I:
            inner = zz * J(a, b) - sum(J(c, b) @ J(a, c) for c in S)
            res[3] = max(res[3], np.abs(R @ inner - inner @ R).max())
    return tuple(float(r) for r in res)
