"""Fundamental R-matrix, Hamiltonian density and twisted chain Hamiltonian for rectangular representations."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .gtbasis import HighestWeight, LinOp, as_weight, dimension, gen, weyl_dimension
from .laxfactory import PoleError, lax_fundamental_matrix
from .weights import harish_chandra

_RNG_SEED = 19820607


class NotRectangularError(ValueError):
    pass


@dataclass(frozen=True)
class RectangularShape:
    a: int
    s: int

    @property
    def alpha(self) -> int:
        return self.s - self.a

    @property
    def beta(self) -> int:
        return self.s * self.a


def _shape_of(lam: tuple[int, ...]) -> RectangularShape:
    base = lam[-1]
    rel = [x - base for x in lam]
    s = rel[0]
    if s == 0:
        return RectangularShape(0, 0)
    a = sum(1 for x in rel if x == s)
    for i, x in enumerate(rel):
        if x not in (0, s) or (x == s and i >= a):
            raise NotRectangularError(f"weight {lam} is not rectangular: entry {i + 1} = {lam[i]}")
    return RectangularShape(a, s)


def rectangularity_residual(hw) -> float:
    """Max entry of J^c_b J^a_c - alpha J^a_b - beta delta^a_b for the shifted generators."""
    hw = as_weight(hw)
    n, d = hw.n, dimension(hw)
    eye = np.eye(d)
    base = hw.lam[-1]
    s = hw.lam[0] - base
    a = sum(1 for x in hw.lam if x - base == s) if s else 0
    alpha, beta = s - a, s * a

    def J(x, y):
        return gen(x, y, hw) - (base * eye if x == y else 0)

    worst = 0.0
    for b in range(1, n + 1):
        for x in range(1, n + 1):
            lhs = sum(J(c, b) @ J(x, c) for c in range(1, n + 1))
            rhs = alpha * J(x, b) + (beta * eye if x == b else 0)
            worst = max(worst, float(np.abs(lhs - rhs).max()))
    return worst


def check_rectangular(hw, tol: float = 1e-10) -> RectangularShape:
    hw = as_weight(hw)
    shape = _shape_of(hw.lam)
    res = rectangularity_residual(hw)
    if res > tol:
        raise NotRectangularError(f"quadratic identity fails for {hw.lam} with residual {res:.3g}")
    return shape


def swap_matrix(d: int) -> np.ndarray:
    P = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            P[i * d + j, j * d + i] = 1
    return P


def diagonal_generator(a: int, b: int, hw) -> np.ndarray:
    """J^a_b (x) 1 + 1 (x) J^a_b."""
    g = gen(a, b, hw)
    eye = np.eye(g.shape[0])
    return np.kron(g, eye) + np.kron(eye, g)


@dataclass(frozen=True)
class TensorBlock:
    highest: tuple[int, ...]
    A: tuple[int, ...]
    projector: np.ndarray

    @property
    def dim(self) -> int:
        return weyl_dimension(self.highest)


@dataclass(frozen=True)
class TensorWeightTable:
    hw: HighestWeight
    shape: RectangularShape
    blocks: tuple[TensorBlock, ...]

    def operator(self, f) -> np.ndarray:
        d = dimension(self.hw) ** 2
        out = np.zeros((d, d), dtype=complex)
        for b in self.blocks:
            out += f(b) * b.projector
        return out


def _highest_weights(hw: HighestWeight) -> list[tuple[int, ...]]:
    n = hw.n
    d2 = dimension(hw) ** 2
    if n == 1:
        return [(2 * hw.lam[0],)]
    raising = np.vstack([diagonal_generator(k, k + 1, hw) for k in range(1, n)])
    _, sv, vh = np.linalg.svd(raising)
    rank = int(np.sum(sv > 1e-9 * sv[0]))
    N = vh[rank:].conj().T
    rng = np.random.default_rng(_RNG_SEED)
    coeff = rng.uniform(1, 2, size=n) * 10.0 ** np.arange(n)
    H = sum(c * diagonal_generator(a, a, hw) for a, c in zip(range(1, n + 1), coeff))
    M = np.linalg.lstsq(N, H @ N, rcond=None)[0]
    _, vecs = np.linalg.eig(M)
    out = []
    for v in (N @ vecs).T:
        w = tuple(int(round((v.conj() @ diagonal_generator(a, a, hw) @ v / (v.conj() @ v)).real)) for a in range(1, n + 1))
        out.append(w)
    if len(set(out)) != len(out):
        raise NotRectangularError(f"V (x) V for {hw.lam} is not multiplicity free: {sorted(out)}")
    if sum(weyl_dimension(w) for w in out) != d2:
        raise ArithmeticError("tensor decomposition does not exhaust V (x) V")
    return sorted(out, reverse=True)


def _diagonal_casimir(k: int, hw) -> np.ndarray:
    n = as_weight(hw).n
    D = {(a, b): diagonal_generator(a, b, hw) for a in range(1, n + 1) for b in range(1, n + 1)}
    d = next(iter(D.values())).shape[0]
    chain = {(a, c): (np.eye(d) if a == c else None) for a in range(1, n + 1) for c in range(1, n + 1)}
    for _ in range(k - 1):
        new = {}
        for a in range(1, n + 1):
            for c in range(1, n + 1):
                acc = 0
                for b in range(1, n + 1):
                    if chain[(a, b)] is not None:
                        acc = acc + chain[(a, b)] @ D[(c, b)]
                new[(a, c)] = acc
        chain = new
    return sum(D[(a, c)] @ chain[(a, c)] for a in range(1, n + 1) for c in range(1, n + 1) if chain[(a, c)] is not None)


def _block_A(Lam: tuple[int, ...], base: int, shape: RectangularShape) -> tuple[int, ...]:
    rel = [x - 2 * base for x in Lam]
    width = max(len(rel), 2 * shape.a)
    rel = rel + [0] * (width - len(rel))
    return tuple(x - k for k, x in enumerate(rel[: 2 * shape.a]))


@lru_cache(maxsize=None)
def _tensor_table(lam: tuple[int, ...]) -> TensorWeightTable:
    hw = HighestWeight(lam)
    shape = check_rectangular(hw)
    hws = _highest_weights(hw)
    d2 = dimension(hw) ** 2
    eye = np.eye(d2, dtype=complex)
    if len(hws) == 1:
        blocks = [TensorBlock(hws[0], _block_A(hws[0], lam[-1], shape), eye)]
        return TensorWeightTable(hw, shape, tuple(blocks))
    n = hw.n
    ks = range(2, min(n, 3) + 1)
    rng = np.random.default_rng(_RNG_SEED)
    coeff = {k: rng.uniform(0.5, 1.5) / k**2 for k in ks}
    K = sum(coeff[k] * _diagonal_casimir(k, hw) for k in ks)

    def kval(w):
        ell = [x - i for i, x in enumerate(w)]
        return sum(coeff[k] * harish_chandra(ell, k) for k in ks)

    vals = [kval(w) for w in hws]
    if min(abs(x - y) for i, x in enumerate(vals) for y in vals[i + 1:]) < 1e-8:
        raise ArithmeticError("tensor blocks are not separated by the Casimir probe")
    blocks = []
    for i, w in enumerate(hws):
        proj = eye.copy()
        for j, v in enumerate(vals):
            if j != i:
                proj = proj @ (K - v * eye) / (vals[i] - v)
        if abs(np.trace(proj).real - weyl_dimension(w)) > 1e-6:
            raise ArithmeticError(f"projector rank mismatch for block {w}")
        blocks.append(TensorBlock(w, _block_A(w, lam[-1], shape), proj))
    return TensorWeightTable(hw, shape, tuple(blocks))


def tensor_shifted_weights(hw) -> TensorWeightTable:
    """Multiplicity-free decomposition of V (x) V with shifted weights A_k = Lambda_k - k + 1, k <= 2a."""
    return _tensor_table(as_weight(hw).lam)


def _xy(A: tuple[int, ...], a: int, k: int) -> tuple[float, float]:
    kb = 2 * a - k + 1
    x = (A[k - 1] - A[kb - 1] + 1) / 2
    y = (A[k - 1] + A[kb - 1] + 1) / 2 + 2 * a - k
    return x, y


def _k_factors(A: tuple[int, ...], a: int, k: int) -> list[tuple[float, float]]:
    x, y = _xy(A, a, k)
    d = y - x
    if abs(d - round(d)) > 1e-12:
        raise ArithmeticError(f"non-integer gamma shift {d} for block {A}")
    d = int(round(d))
    if d >= 0:
        return [(1 - y + j, x + j) for j in range(d)]
    return [(x + j, 1 - y + j) for j in range(-d)]


def block_factors(A: tuple[int, ...], a: int) -> list[tuple[float, float]]:
    """Merged linear factors (numerator offset, denominator offset) of one block.

    Gamma(z+x)Gamma(z+1-x) / (Gamma(z+y)Gamma(z+1-y)) = prod_{j<d} (z+1-y+j)/(z+x+j), d = y - x.
    """
    return [f for k in range(1, a + 1) for f in _k_factors(A, a, k)]


def block_value(z: complex, A: tuple[int, ...], a: int) -> complex:
    val = 1.0 + 0j
    for num, den in block_factors(A, a):
        if abs(z + den) < 1e-14:
            raise PoleError(f"pole of R at z={z}: factor z + {den}")
        val *= (z + num) / (z + den)
    return val


def r_lambda_lambda_matrix(z: complex, hw) -> np.ndarray:
    table = tensor_shifted_weights(hw)
    return table.operator(lambda b: block_value(z, b.A, table.shape.a))


def r_lambda_lambda(z: complex, hw) -> LinOp:
    hw = as_weight(hw)
    return LinOp(r_lambda_lambda_matrix(z, hw), ("gt(x)gt", hw.lam))


def block_parity(A: tuple[int, ...], shape: RectangularShape) -> int:
    """Sign of R(0) on a block: prod_k (-1)^((A_k - A_kbar - 1)/2 - s - k + 1), an integer exponent."""
    sign = 1
    for k in range(1, shape.a + 1):
        e = (A[k - 1] - A[2 * shape.a - k] - 1) / 2 - shape.s - k + 1
        if abs(e - round(e)) > 1e-12:
            raise ArithmeticError(f"half-integer parity exponent {e} for block {A}")
        sign *= -1 if int(round(e)) % 2 else 1
    return sign


def block_density(A: tuple[int, ...], a: int) -> float:
    """-2 sum_k [psi(x_k) - psi(y_k)]; terms with a nonpositive argument use the finite rational form."""
    total = 0.0
    for k in range(1, a + 1):
        x, y = _xy(A, a, k)
        if x > 0 and y > 0:
            total += -2 * (special.digamma(x) - special.digamma(y))
        else:
            total += sum(1 / den - 1 / num for num, den in _k_factors(A, a, k))
    return float(total)


def block_density_rational(A: tuple[int, ...], a: int) -> float:
    """-d/dz log of the merged block product at z = 0."""
    return float(sum(1 / den - 1 / num for num, den in block_factors(A, a)))


def hamiltonian_density_matrix(hw) -> np.ndarray:
    table = tensor_shifted_weights(hw)
    return table.operator(lambda b: block_density(b.A, table.shape.a))


def hamiltonian_density(hw) -> LinOp:
    hw = as_weight(hw)
    return LinOp(hamiltonian_density_matrix(hw), ("gt(x)gt", hw.lam))


def density_blocks(hw) -> list[dict]:
    table = tensor_shifted_weights(hw)
    return [
        {"highest": b.highest, "A": b.A, "dim": b.dim, "density": block_density(b.A, table.shape.a),
         "r_at_0": block_value(0.0, b.A, table.shape.a).real}
        for b in table.blocks
    ]


def log_derivative_residual(hw, h: float = 1e-5) -> float:
    """Max relative difference between the digamma density and -d/dz log R at 0 by central differences."""
    table = tensor_shifted_weights(hw)
    worst = 0.0
    for b in table.blocks:
        a = table.shape.a
        fd = -(np.log(complex(block_value(h, b.A, a))) - np.log(complex(block_value(-h, b.A, a)))) / (2 * h)
        dens = block_density(b.A, a)
        worst = max(worst, abs(fd - dens) / max(1.0, abs(dens)))
    return float(worst)


def _embed_bond(h2: np.ndarray, d: int, i: int, j: int, L: int) -> np.ndarray:
    """Two-site operator acting on sites i, j (0-based, either order) of an L-site chain."""
    t = h2.reshape(d, d, d, d)
    full = np.einsum("abcd,xy->abxcdy", t, np.eye(d ** (L - 2))).reshape([d] * (2 * L))
    # full acts on sites (0, 1, rest...); move those axes to (i, j, rest...)
    order = [i, j] + [s for s in range(L) if s not in (i, j)]
    inv = list(np.argsort(order))
    full = full.transpose(inv + [L + p for p in inv])
    return full.reshape(d**L, d**L)


def twist_operator(hw, twist, sign: int = 1) -> np.ndarray:
    """exp(sign * i sum_a phi_a J^a_a) on one site."""
    hw = as_weight(hw)
    diag = sum(twist[a - 1] * np.diag(gen(a, a, hw)) for a in range(1, hw.n + 1))
    return np.diag(np.exp(sign * 1j * diag))


def hamiltonian_total_matrix(hw, L: int, twist) -> np.ndarray:
    """sum_i H_{i,i+1}; the closing bond H_{L,1} is conjugated by exp(i sum_a phi_a J^a_a) on site L."""
    hw = as_weight(hw)
    if L < 2:
        raise ValueError("chain length must be >= 2")
    if len(twist) != hw.n:
        raise ValueError(f"twist needs {hw.n} angles, got {len(twist)}")
    d = dimension(hw)
    dens = hamiltonian_density_matrix(hw)
    H = sum(_embed_bond(dens, d, i, i + 1, L) for i in range(L - 1))
    U = twist_operator(hw, twist, 1)
    Ul = np.kron(np.eye(d ** (L - 1)), U)
    Uli = np.kron(np.eye(d ** (L - 1)), np.linalg.inv(U))
    H = H + Ul @ _embed_bond(dens, d, L - 1, 0, L) @ Uli
    return H


def hamiltonian_total(hw, L: int, twist) -> LinOp:
    hw = as_weight(hw)
    return LinOp(hamiltonian_total_matrix(hw, L, twist), ("gt^L", hw.lam, L))


def tpg_operator(z: complex, hw) -> np.ndarray:
    """Check-R from the tensor product graph: rho_lam/rho_mu = (delta - z)/(delta + z) along one-box moves.

    delta = (C2(mu) - C2(lam))/4 on each edge, seeded with coefficient 1 on the top block.
    """
    table = tensor_shifted_weights(hw)
    blocks = table.blocks

    def c2(w):
        return harish_chandra([x - i for i, x in enumerate(w)], 2)

    def adjacent(u, v):
        return sum(abs(p - q) for p, q in zip(u, v)) == 2

    rho = {0: 1.0 + 0j}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j, b in enumerate(blocks):
            if j in rho or not adjacent(blocks[i].highest, b.highest):
                continue
            delta = (c2(blocks[i].highest) - c2(b.highest)) / 4
            if abs(delta + z) < 1e-14:
                raise PoleError(f"tensor product graph pole at z={z}")
            rho[j] = rho[i] * (delta - z) / (delta + z)
            queue.append(j)
    if len(rho) != len(blocks):
        raise ArithmeticError("tensor product graph is not connected")
    d2 = blocks[0].projector.shape[0]
    out = np.zeros((d2, d2), dtype=complex)
    for j, b in enumerate(blocks):
        out += rho[j] * b.projector
    return out


def tpg_crosscheck(z: complex, hw) -> float:
    """Residual between P R(z) and the graph construction after matching one overall scalar."""
    hw = as_weight(hw)
    d = dimension(hw)
    A = swap_matrix(d) @ r_lambda_lambda_matrix(z, hw)
    B = tpg_operator(z, hw)
    scale = np.vdot(B, A) / np.vdot(B, B)
    return float(np.linalg.norm(A - scale * B) / np.linalg.norm(A))


def permutation_residual(hw) -> float:
    d = dimension(as_weight(hw))
    return float(np.abs(r_lambda_lambda_matrix(0.0, hw) - swap_matrix(d)).max())


def unitarity_residual(z: complex, hw) -> float:
    d2 = dimension(as_weight(hw)) ** 2
    return float(np.abs(r_lambda_lambda_matrix(z, hw) @ r_lambda_lambda_matrix(-z, hw) - np.eye(d2)).max())


def invariance_residual(z: complex, hw) -> float:
    hw = as_weight(hw)
    R = r_lambda_lambda_matrix(z, hw)
    worst = 0.0
    for a in range(1, hw.n + 1):
        for b in range(1, hw.n + 1):
            D = diagonal_generator(a, b, hw)
            worst = max(worst, float(np.abs(R @ D - D @ R).max()))
    return worst


def swap_symmetry_residual(z: complex, hw) -> float:
    d = dimension(as_weight(hw))
    P = swap_matrix(d)
    R = r_lambda_lambda_matrix(z, hw)
    return float(np.abs(P @ R @ P - R).max())


def ybe_residual(z1: complex, z2: complex, hw) -> float:
    """Relative residual of L_1(z1) L_2(z2) R_12(z2 - z1) = R_12(z2 - z1) L_2(z2) L_1(z1).

    L_i acts on C^n (x) V_i and R on V_1 (x) V_2; products are taken in the shared C^n factor.
    """
    hw = as_weight(hw)
    n, d = hw.n, dimension(hw)
    L1 = lax_fundamental_matrix(z1, hw).reshape(n, d, n, d)
    L2 = lax_fundamental_matrix(z2, hw).reshape(n, d, n, d)
    eye = np.eye(d)
    big1 = np.einsum("aibj,kl->aikbjl", L1, eye).reshape(n * d * d, n * d * d)
    big2 = np.einsum("akbl,ij->aikbjl", L2, eye).reshape(n * d * d, n * d * d)
    R = np.kron(np.eye(n), r_lambda_lambda_matrix(z2 - z1, hw))
    lhs = big1 @ big2 @ R
    rhs = R @ big2 @ big1
    return float(np.abs(lhs - rhs).max() / max(np.abs(lhs).max(), 1e-300))
