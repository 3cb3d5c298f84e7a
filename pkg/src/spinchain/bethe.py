"""Bethe roots from Q-operator eigenvalues, Bethe equations, Newton solver and dispersion law."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .gtbasis import HighestWeight, as_weight
from .hambuilder import hamiltonian_total_matrix
from .laxfactory import PoleError
from .qfactory import QFamily, cartan_charge

_PROBE_Z = 0.2113 + 0.1371j
_RNG_SEED = 1983


class BetheError(RuntimeError):
    pass


def check_path(path: Sequence[int], n: int) -> tuple[int, ...]:
    path = tuple(int(a) for a in path)
    if sorted(path) != list(range(1, n + 1)):
        raise ValueError(f"path {path} is not a permutation of 1..{n}")
    return path


@dataclass
class BetheRootSet:
    """Roots per level i = 1..n-1 of the chain {a_1} < {a_1, a_2} < ... along ``path``."""

    path: tuple[int, ...]
    roots: list[np.ndarray]

    def level_set(self, i: int) -> tuple[int, ...]:
        return tuple(sorted(self.path[:i]))

    @property
    def magnons(self) -> tuple[int, ...]:
        return tuple(len(r) for r in self.roots)


@dataclass
class EigenState:
    vector: np.ndarray
    charges: tuple[float, ...]
    energy: complex
    residual: float
    extra: dict = field(default_factory=dict)


def magnon_numbers(charges: Sequence[float], hw, L: int, path: Sequence[int]) -> tuple[int, ...]:
    """Expected root count per level: m_I = sum_{a in I} N_a - L sum_{k > n - |I|} lam_k."""
    hw = as_weight(hw)
    path = check_path(path, hw.n)
    n = hw.n
    out = []
    for i in range(1, n):
        m = sum(charges[a - 1] for a in path[:i]) - L * sum(hw.lam[n - i :])
        out.append(int(round(float(np.real(m)))))
    return tuple(out)


def joint_eigenbasis(hw, L: int, twist, family: QFamily | None = None, z_probe: complex = _PROBE_Z) -> list[EigenState]:
    """Eigenvectors of a random combination of H, Cartan charges and Q-probes, checked against each."""
    hw = as_weight(hw)
    fam = family or QFamily(hw, L, tuple(twist))
    n = hw.n
    H = hamiltonian_total_matrix(hw, L, fam.twist)
    charges = [cartan_charge(a, hw, L) for a in range(1, n + 1)]
    probes = [fam((a,), z_probe) for a in range(1, n + 1)]
    rng = np.random.default_rng(_RNG_SEED)
    K = H.astype(complex)
    for op in charges + probes:
        K = K + rng.uniform(0.3, 1.0) * np.exp(2j * np.pi * rng.uniform()) * op / max(1.0, np.abs(op).max())
    _, vecs = np.linalg.eig(K)
    states = []
    for v in vecs.T:
        v = v / np.linalg.norm(v)
        e = v.conj() @ H @ v
        res = np.linalg.norm(H @ v - e * v)
        qs = tuple(float(np.real(v.conj() @ c @ v)) for c in charges)
        for c, q in zip(charges, qs):
            res = max(res, np.linalg.norm(c @ v - q * v))
        for p in probes:
            mu = v.conj() @ p @ v
            res = max(res, np.linalg.norm(p @ v - mu * v) / max(1.0, abs(mu)))
        states.append(EigenState(v, qs, complex(e), float(res)))
    return states


def prefactor_polynomial(z: complex, q: int, hw, L: int) -> complex:
    """F_q(z)^L, the known finite product carried by every Q_I eigenvalue with |I| = n - q."""
    hw = as_weight(hw)
    lam = hw.lam
    out = 1.0 + 0j
    for i in range(q + 1, hw.n + 1):
        for j in range(lam[i - 1] - lam[-1]):
            out *= z - q / 2 + i - lam[i - 1] + j
    return out**L


def _fft_coefficients(values: np.ndarray, radius: float) -> np.ndarray:
    N = len(values)
    c = np.fft.fft(values) / N
    return c / radius ** np.arange(N)


def polynomial_parts(I: Sequence[int], family: QFamily, vectors: np.ndarray, samples: int = 48, radius: float = 2.7) -> list[np.ndarray]:
    """Coefficients (ascending) of the polynomial part of <v|Q_I(z)|v> for each column v.

    The twist exponential and the finite prefactor are divided out on a circle and
    the remainder is recovered by a discrete Fourier transform.
    """
    hw = family.hw
    I = tuple(sorted(I))
    q = hw.n - len(I)
    phi = sum(family.twist[a - 1] for a in I)
    zs = radius * np.exp(2j * np.pi * np.arange(samples) / samples)
    norms = np.einsum("ij,ij->j", vectors.conj(), vectors)
    vals = np.empty((samples, vectors.shape[1]), dtype=complex)
    for k, z in enumerate(zs):
        Q = family(I, z)
        mu = np.einsum("ij,ij->j", vectors.conj(), Q @ vectors) / norms
        vals[k] = mu / (np.exp(1j * z * phi) * prefactor_polynomial(z, q, hw, family.L))
    out = []
    for col in vals.T:
        c = _fft_coefficients(col, radius)
        scale = np.abs(c * radius ** np.arange(samples)).max()
        keep = np.nonzero(np.abs(c * radius ** np.arange(samples)) > 1e-9 * scale)[0]
        deg = int(keep.max()) if len(keep) else 0
        if deg > samples // 2:
            raise BetheError(f"polynomial part of Q_{I} not resolved with {samples} samples")
        out.append(c[: deg + 1])
    return out


def roots_of(coeffs: np.ndarray) -> np.ndarray:
    """Roots via companion-matrix eigenvalues."""
    coeffs = np.trim_zeros(np.asarray(coeffs), "b")
    if len(coeffs) <= 1:
        return np.zeros(0, dtype=complex)
    return np.roots(coeffs[::-1]).astype(complex)


def q_eigenvalue_roots(I: Sequence[int], hw, L: int, twist, state: EigenState | np.ndarray, family: QFamily | None = None, tol: float = 1e-8) -> np.ndarray:
    hw = as_weight(hw)
    fam = family or QFamily(hw, L, tuple(twist))
    v = state.vector if isinstance(state, EigenState) else np.asarray(state)
    Q0 = fam(tuple(sorted(I)), _PROBE_Z)
    mu = v.conj() @ Q0 @ v / (v.conj() @ v)
    if np.linalg.norm(Q0 @ v - mu * v) > tol * max(1.0, abs(mu)) * np.linalg.norm(v):
        raise BetheError("state is not an eigenvector of Q_I")
    return roots_of(polynomial_parts(I, fam, v[:, None])[0])


def rootset_for_state(state: EigenState, path: Sequence[int], family: QFamily) -> BetheRootSet:
    path = check_path(path, family.hw.n)
    roots = []
    for i in range(1, family.hw.n):
        I = tuple(sorted(path[:i]))
        roots.append(roots_of(polynomial_parts(I, family, state.vector[:, None])[0]))
    return BetheRootSet(path, roots)


def all_rootsets(states: Sequence[EigenState], path: Sequence[int], family: QFamily) -> list[BetheRootSet]:
    path = check_path(path, family.hw.n)
    V = np.column_stack([s.vector for s in states])
    levels = []
    for i in range(1, family.hw.n):
        I = tuple(sorted(path[:i]))
        levels.append([roots_of(c) for c in polynomial_parts(I, family, V)])
    return [BetheRootSet(path, [levels[i][k] for i in range(len(levels))]) for k in range(len(states))]


def _shifted(hw: HighestWeight) -> list[int]:
    return [x - i for i, x in enumerate(hw.lam)]


def bethe_ratios(rootset: BetheRootSet, hw, L: int, twist) -> list[np.ndarray]:
    """LHS/RHS of the Bethe equations per root and level; every entry equals 1 on a solution.

    Level i, root z (q = n - i):
      e^{i(phi_{a_{i+1}} - phi_{a_i})} ((z - q/2 - l_{q+1}) / (z - q/2 - l_q + 1))^L
        = prod_k (z - w^{i-1}_k - 1/2)/(z - w^{i-1}_k + 1/2)
          prod_{k != l} (z - z_k + 1)/(z - z_k - 1)
          prod_k (z - w^{i+1}_k - 1/2)/(z - w^{i+1}_k + 1/2)
    """
    hw = as_weight(hw)
    n = hw.n
    ell = _shifted(hw)
    path = rootset.path
    levels = [np.zeros(0, dtype=complex)] + [np.asarray(r, dtype=complex) for r in rootset.roots] + [np.zeros(0, dtype=complex)]
    out = []
    for i in range(1, n):
        q = n - i
        zs = levels[i]
        ratios = np.empty(len(zs), dtype=complex)
        for l, z in enumerate(zs):
            others = np.delete(zs, l)
            if np.any(np.abs(others - z) < 1e-10):
                raise BetheError(f"coinciding roots at level {i}: {z}")
            lhs = np.exp(1j * (twist[path[i] - 1] - twist[path[i - 1] - 1]))
            lhs *= ((z - q / 2 - ell[q]) / (z - q / 2 - ell[q - 1] + 1)) ** L
            rhs = np.prod((z - levels[i - 1] - 0.5) / (z - levels[i - 1] + 0.5))
            rhs *= np.prod((z - others + 1) / (z - others - 1))
            rhs *= np.prod((z - levels[i + 1] - 0.5) / (z - levels[i + 1] + 0.5))
            ratios[l] = lhs / rhs
        out.append(ratios)
    return out


def bethe_residual(rootset: BetheRootSet, hw, L: int, twist) -> float:
    """Max |LHS/RHS - 1| over all roots; 0 for the empty set."""
    vals = [np.abs(r - 1) for r in bethe_ratios(rootset, hw, L, twist) if len(r)]
    return float(max((v.max() for v in vals), default=0.0))


def energy_from_roots(rootset: BetheRootSet, hw) -> complex:
    """sum_i sum_l [1/(z - q/2 - l_{q+1}) - 1/(z - q/2 - l_q + 1)], q = n - i."""
    hw = as_weight(hw)
    n = hw.n
    ell = _shifted(hw)
    E = 0j
    for i, zs in enumerate(rootset.roots, start=1):
        q = n - i
        for z in zs:
            d1 = z - q / 2 - ell[q]
            d2 = z - q / 2 - ell[q - 1] + 1
            if abs(d1) < 1e-12 or abs(d2) < 1e-12:
                raise PoleError(f"root {z} sits on a pole of the dispersion law")
            E += 1 / d1 - 1 / d2
    return complex(E)


def _log_system(flat: np.ndarray, sizes: Sequence[int], path, hw, L, twist) -> np.ndarray:
    roots, k = [], 0
    for m in sizes:
        roots.append(flat[k : k + m])
        k += m
    ratios = bethe_ratios(BetheRootSet(tuple(path), roots), hw, L, twist)
    return np.log(np.concatenate(ratios)) if ratios else np.zeros(0)


def _split(x: np.ndarray, sizes: Sequence[int]) -> list[np.ndarray]:
    out, k = [], 0
    for m in sizes:
        out.append(x[k : k + m])
        k += m
    return out


def _newton(F, x: np.ndarray, maxiter: int, tol: float) -> tuple[np.ndarray, np.ndarray]:
    total = len(x)
    f = F(x)
    for _ in range(maxiter):
        norm = np.linalg.norm(f)
        if not np.isfinite(norm) or norm < tol:
            break
        h = 1e-7
        J = np.empty((total, total), dtype=complex)
        for j in range(total):
            dx = np.zeros(total, dtype=complex)
            dx[j] = h
            J[:, j] = (F(x + dx) - F(x - dx)) / (2 * h)
        if not np.all(np.isfinite(J)):
            break
        step = np.linalg.lstsq(J, -f, rcond=None)[0]
        t = 1.0
        while t > 1e-4:
            trial = F(x + t * step)
            if np.all(np.isfinite(trial)) and np.linalg.norm(trial) < norm:
                break
            t /= 2
        else:
            break
        x = x + t * step
        f = trial
    return x, f


def _acceptable(roots: list[np.ndarray], f: np.ndarray, bound: float) -> bool:
    if not np.all(np.isfinite(f)) or np.linalg.norm(f) > 1e-8:
        return False
    for r in roots:
        if np.any(np.abs(r) > bound):
            return False
        for u, v in itertools.combinations(r, 2):
            if abs(u - v) < 1e-4 * max(1.0, abs(u)):
                return False
    return True


def solve_bethe_newton(hw, L: int, twist, magnons: Sequence[int], seed: int = 0, path: Sequence[int] | None = None,
                       start: Sequence[np.ndarray] | None = None, restarts: int = 50, maxiter: int = 100,
                       tol: float = 1e-12) -> tuple[BetheRootSet, float]:
    """Damped Newton on log(LHS/RHS) = 0 with backtracking and seeded random restarts.

    Converged points with coinciding roots or roots escaping to infinity are
    discarded and the next start is tried.
    """
    hw = as_weight(hw)
    path = check_path(path or range(1, hw.n + 1), hw.n)
    sizes = [int(m) for m in magnons]
    if len(sizes) != hw.n - 1:
        raise ValueError(f"need {hw.n - 1} magnon numbers, got {len(sizes)}")
    if any(m < 0 for m in sizes):
        raise ValueError(f"magnon numbers must be nonnegative: {sizes}")
    total = sum(sizes)
    if total == 0:
        return BetheRootSet(path, [np.zeros(0, dtype=complex) for _ in sizes]), 0.0
    rng = np.random.default_rng(seed)
    bound = 1e3 * max(1, L)

    def F(v):
        try:
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                return _log_system(v, sizes, path, hw, L, twist)
        except (BetheError, ZeroDivisionError, FloatingPointError):
            return np.full(total, np.inf, dtype=complex)

    best = np.inf
    for attempt in range(restarts):
        if attempt == 0 and start is not None:
            x0 = np.concatenate([np.asarray(s, dtype=complex) for s in start])
        else:
            x0 = rng.uniform(-L, L, size=total) + 1j * rng.uniform(-1, L, size=total)
        x, f = _newton(F, x0, maxiter, tol)
        roots = _split(x, sizes)
        if _acceptable(roots, f, bound):
            rs = BetheRootSet(path, roots)
            return rs, bethe_residual(rs, hw, L, twist)
        if np.all(np.isfinite(f)):
            best = min(best, float(np.linalg.norm(f)))
    raise BetheError(f"Newton found no admissible solution in {restarts} starts (best |F| = {best:.3g})")


def multiset_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Smallest max-distance over pairings of two equal-size root sets."""
    if len(a) != len(b):
        return float("inf")
    if not len(a):
        return 0.0
    if len(a) > 7:
        return float(np.abs(np.sort_complex(a) - np.sort_complex(b)).max())
    return float(min(np.abs(a - np.asarray(p)).max() for p in itertools.permutations(b)))


@dataclass
class ClosureReport:
    path: tuple[int, ...]
    rows: list[dict]

    @property
    def max_bethe_residual(self) -> float:
        return max((r["bethe_residual"] for r in self.rows), default=0.0)

    @property
    def max_energy_error(self) -> float:
        return max((r["energy_error"] for r in self.rows), default=0.0)


def closure(hw, L: int, twist, path: Sequence[int] | None = None, family: QFamily | None = None,
            states: Sequence[EigenState] | None = None) -> ClosureReport:
    """Full pipeline per joint eigenstate: roots from Q, Bethe residual and energy against H."""
    hw = as_weight(hw)
    fam = family or QFamily(hw, L, tuple(twist))
    path = check_path(path or range(1, hw.n + 1), hw.n)
    states = list(states) if states is not None else joint_eigenbasis(hw, L, fam.twist, fam)
    rootsets = all_rootsets(states, path, fam)
    vac_vec = np.zeros(fam.dim, dtype=complex)
    vac_vec[0] = 1
    H = hamiltonian_total_matrix(hw, L, fam.twist)
    e0 = complex(vac_vec @ H @ vac_vec)
    rows = []
    for st, rs in zip(states, rootsets):
        expected = magnon_numbers(st.charges, hw, L, path)
        e_roots = energy_from_roots(rs, hw)
        rows.append({
            "charges": st.charges,
            "magnons": rs.magnons,
            "expected_magnons": expected,
            "roots": [list(r) for r in rs.roots],
            "bethe_residual": bethe_residual(rs, hw, L, fam.twist),
            "E_from_roots": e_roots,
            "E_from_H": st.energy - e0,
            "energy_error": abs(e_roots - (st.energy - e0)),
            "state_residual": st.residual,
        })
    return ClosureReport(path, rows)
