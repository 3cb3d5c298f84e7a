"""The eight end-to-end acceptance criteria, each at its stated tolerance."""
import itertools
import time

import numpy as np
import pytest

from spinchain.bethe import closure, joint_eigenbasis
from spinchain.gtbasis import casimir_matrix, dimension, gen
from spinchain.hambuilder import (
    density_blocks,
    invariance_residual,
    log_derivative_residual,
    permutation_residual,
    tpg_crosscheck,
    unitarity_residual,
    ybe_residual,
)
from spinchain.laxfactory import verify_block_equations
from spinchain.qfactory import (
    QFamily,
    commutation_report,
    det_formula_report,
    q_operator_matrix,
    qq_report,
)
from spinchain.weights import complement, verify_cayley_hamilton, x_basis
from scipy.special import digamma

from conftest import nonempty_subsets, weights_up_to
from fock_oracle import fock_q
from test_qfactory import closed_form_oracle

GT_SWEEP = [lam for n in (2, 3, 4) for lam in weights_up_to(n, 3)]
TW = {2: (0.3, 1.1), 3: (0.3, 1.1, 2.0)}


def random_z(rng, k):
    return [complex(x, y) for x, y in rng.normal(scale=0.8, size=(k, 2))]


def test_criterion_1_gt_algebra(acceptance):
    t0 = time.perf_counter()
    comm = cas = 0.0
    for lam in GT_SWEEP:
        n = len(lam)
        J = {(a, b): gen(a, b, lam) for a in range(1, n + 1) for b in range(1, n + 1)}
        for (a, b), (c, d) in itertools.product(J, J):
            lhs = J[a, b] @ J[c, d] - J[c, d] @ J[a, b]
            rhs = (b == c) * J[a, d] - (a == d) * J[c, b]
            comm = max(comm, np.abs(lhs - rhs).max())
        for I in nonempty_subsets(n):
            for k in range(1, len(I) + 1):
                C = casimir_matrix(k, I, lam)
                for a, b in itertools.product(I, I):
                    cas = max(cas, np.abs(C @ J[a, b] - J[a, b] @ C).max())
    elapsed = time.perf_counter() - t0
    ok = acceptance(1, f"GT algebra, {len(GT_SWEEP)} weights",
                    [("commutators", comm, 1e-10), ("Casimir centrality", cas, 1e-10), ("runtime s", elapsed, 60)])
    assert ok


def test_criterion_2_cayley_hamilton_x_basis(acceptance):
    t0 = time.perf_counter()
    ch = xb = 0.0
    for lam in GT_SWEEP:
        n = len(lam)
        for I in nonempty_subsets(n):
            if not complement(I, n):
                continue
            ch = max(ch, verify_cayley_hamilton(I, lam))
            xb = max(xb, x_basis(I, lam).residual)
    elapsed = time.perf_counter() - t0
    ok = acceptance(2, "Cayley-Hamilton and X-basis",
                    [("Cayley-Hamilton", ch, 1e-9), ("X-basis", xb, 1e-9), ("runtime s", elapsed, 60)])
    assert ok


def test_criterion_3_block_equations(acceptance):
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    worst = 0.0
    for n in (2, 3):
        for lam in weights_up_to(n, 2):
            for I in nonempty_subsets(n):
                for z in random_z(rng, 3):
                    worst = max(worst, *verify_block_equations(z, I, lam))
    elapsed = time.perf_counter() - t0
    ok = acceptance(3, "R0 block equations", [("residual", worst, 1e-9), ("runtime s", elapsed, 60)])
    assert ok


def test_criterion_4_trace_engine(acceptance):
    t0 = time.perf_counter()
    # damped twist: Im(phi_1 - phi_2) = -1 makes the N = 40 Fock tail negligible
    tw = (0.3, 1.1 + 1.0j)
    fock = 0.0
    for lam in [(1, 0), (2, 0)]:
        for L in (1, 2):
            for z in (0.37 + 0.21j, -0.8 + 0.05j, 1.4 - 0.6j):
                A = q_operator_matrix(z, (1,), lam, L, tw)
                B = fock_q(z, lam, L, tw, N=40)
                fock = max(fock, np.abs(A - B).max() / np.abs(A).max())
    hyp = 0.0
    for lam in [(1, 0), (2, 0), (3, 0)]:
        for z in (0.31 + 0.2j, 1.7 - 0.4j, -0.6 + 0.9j):
            ratio = np.diag(q_operator_matrix(z, (1,), lam, 1, TW[2])) / closed_form_oracle(z, lam, TW[2])
            hyp = max(hyp, np.abs(ratio - ratio[0]).max() / abs(ratio[0]))
    elapsed = time.perf_counter() - t0
    ok = acceptance(4, "trace engine",
                    [("Fock cutoff", fock, 1e-8), ("hypergeometric ratio", hyp, 1e-7), ("runtime s", elapsed, 120)])
    assert ok


def test_criterion_5_functional_relations(acceptance):
    rng = np.random.default_rng(5)
    t0 = time.perf_counter()
    comm = qq = det = 0.0
    for lam in [(1, 0), (2, 0), (1, 0, 0), (1, 1, 0)]:
        n = len(lam)
        sets = [()] + nonempty_subsets(n)
        for L in (1, 2):
            fam = QFamily(lam, L, TW[n])
            for z in random_z(rng, 5):
                z2 = z + complex(*rng.normal(size=2))
                for I, J in itertools.combinations_with_replacement(sets, 2):
                    comm = max(comm, commutation_report(I, J, z, z2, lam, L, TW[n], fam).relative)
                for I in sets:
                    rest = complement(I, n)
                    for a, b in itertools.combinations(rest, 2):
                        qq = max(qq, qq_report(I, a, b, z, lam, L, TW[n], fam).relative)
                    if len(I) >= 2:
                        det = max(det, det_formula_report(I, z, lam, L, TW[n], fam).relative)
    worked = qq_report((1,), 2, 3, 0.7, (1, 1, 0), 2, TW[3]).relative
    elapsed = time.perf_counter() - t0
    ok = acceptance(5, "functional relations",
                    [("commutativity", comm, 1e-8), ("QQ", qq, 1e-8), ("determinant", det, 1e-8),
                     ("QQ[2,{1},2,3,{1,1,0}]", worked, 1e-8), ("runtime s", elapsed, 300)])
    assert ok


def test_criterion_6_r_matrix(acceptance):
    rng = np.random.default_rng(6)
    t0 = time.perf_counter()
    perm = uni = inv = ybe = tpg = 0.0
    for lam in [(1, 0), (2, 0), (3, 0), (1, 1, 0)]:
        perm = max(perm, permutation_residual(lam))
        for z in random_z(rng, 3):
            uni = max(uni, unitarity_residual(z, lam))
            inv = max(inv, invariance_residual(z, lam))
            tpg = max(tpg, tpg_crosscheck(z, lam))
            ybe = max(ybe, ybe_residual(z, complex(*rng.normal(size=2)), lam))
    elapsed = time.perf_counter() - t0
    ok = acceptance(6, "R-matrix suite",
                    [("R(0)=P", perm, 1e-10), ("unitarity", uni, 1e-9), ("invariance", inv, 1e-10),
                     ("YBE", ybe, 1e-8), ("TPG", tpg, 1e-9), ("runtime s", elapsed, 120)])
    assert ok


def test_criterion_7_hamiltonian(acceptance):
    t0 = time.perf_counter()
    rects = [(1, 0), (2, 0), (3, 0), (4, 0), (1, 1, 0), (2, 2, 0), (1, 0, 0), (2, 0, 0)]
    logd = max(log_derivative_residual(lam, h=1e-5) for lam in rects)
    fund = sorted(b["density"] for b in density_blocks((1, 0)))
    fund_err = max(abs(fund[0]), abs(fund[1] - 2))
    spin = 0.0
    for s in (1, 2, 3, 4):
        for b in density_blocks((s, 0)):
            A1, A2 = b["A"]
            spin = max(spin, abs(b["density"] - (2 * digamma(s + 1) - 2 * digamma((A1 - A2 + 1) / 2))))
    rank = 0.0
    for small, big in [((1, 0), (1, 0, 0)), ((2, 0), (2, 0, 0)), ((3, 0), (3, 0, 0)), ((1, 1, 0), (1, 1, 0, 0))]:
        a = {b["highest"]: b["density"] for b in density_blocks(small)}
        k = len(small)
        bb = {b["highest"][:k]: b["density"] for b in density_blocks(big) if not any(b["highest"][k:])}
        rank = max(rank, 0.0 if set(a) == set(bb) else np.inf, *(abs(a[h] - bb[h]) for h in a))
    elapsed = time.perf_counter() - t0
    ok = acceptance(7, "Hamiltonian suite",
                    [("-d/dz log R", logd, 1e-6), ("fundamental {0,2}", fund_err, 1e-12),
                     ("spin-s harmonic", spin, 1e-10), ("rank independence", rank, 1e-12), ("runtime s", elapsed, 60)])
    assert ok


@pytest.mark.slow
def test_criterion_8_bethe_closure(acceptance):
    t0 = time.perf_counter()
    bethe = energy = paths = 0.0
    counts = []
    for lam, L in [((1, 0), 4), ((1, 0, 0), 3)]:
        n = len(lam)
        fam = QFamily(lam, L, TW[n])
        states = joint_eigenbasis(lam, L, fam.twist, fam)
        counts.append(len(states) == dimension(lam) ** L)
        reports = [closure(lam, L, fam.twist, path, fam, states)
                   for path in (tuple(range(n, 0, -1)), tuple(range(1, n + 1)))]
        for rep in reports:
            bethe = max(bethe, rep.max_bethe_residual)
            energy = max(energy, rep.max_energy_error)
            if any(r["magnons"] != r["expected_magnons"] for r in rep.rows):
                bethe = np.inf
        e1 = np.array([r["E_from_roots"] for r in reports[0].rows])
        e2 = np.array([r["E_from_roots"] for r in reports[1].rows])
        paths = max(paths, np.abs(e1 - e2).max())
    elapsed = time.perf_counter() - t0
    ok = acceptance(8, "Bethe closure, 16 + 27 states",
                    [("Bethe equations", bethe, 1e-6), ("energies", energy, 1e-6), ("Hasse paths", paths, 1e-6),
                     ("runtime s", elapsed, 600)])
    assert all(counts)
    assert ok
