import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spinchain.gtbasis import casimir_matrix, dimension, gen
from spinchain.weights import (
    capelli_coefficients,
    complement,
    harish_chandra,
    shifted_weights,
    verify_cayley_hamilton,
    x_basis,
)

from conftest import nonempty_subsets, weights_up_to


def block_values(S, lam):
    return sorted(b.values for b in shifted_weights(S, lam).blocks)


def test_full_set_single_block():
    lam = (2, 1, 0)
    t = shifted_weights((1, 2, 3), lam)
    assert [b.values for b in t.blocks] == [(2, 0, -2)]
    assert np.allclose(t.blocks[0].projector, np.eye(8))


def test_single_index_blocks_fundamental():
    # J^2_2 eigenvalues on C^2 are 0 and 1
    assert block_values((2,), (1, 0)) == [(0,), (1,)]


def test_gl2_branching_of_antifundamental():
    # (1,1) -> l = (1, 0); (1,0) -> l = (1, -1)
    assert block_values((2, 3), (1, 1, 0)) == [(1, -1), (1, 0)]


@pytest.mark.parametrize("lam", [(2, 1, 0), (3, 1, 0), (2, 1, 1, 0)])
def test_projectors_resolve_identity(lam):
    n = len(lam)
    for S in nonempty_subsets(n):
        t = shifted_weights(S, lam)
        total = sum(b.projector for b in t.blocks)
        assert np.abs(total - np.eye(t.dim)).max() < 1e-9
        for b in t.blocks:
            assert np.abs(b.projector @ b.projector - b.projector).max() < 1e-8
            assert abs(np.trace(b.projector) - b.multiplicity) < 1e-8


@pytest.mark.parametrize("lam", [(2, 1, 0), (2, 2, 0, 0)])
def test_casimirs_act_by_harish_chandra(lam):
    for S in nonempty_subsets(len(lam)):
        t = shifted_weights(S, lam)
        for k in (1, 2):
            C = casimir_matrix(k, S, lam)
            expect = t.operator(lambda v: harish_chandra(v, k))
            assert np.abs(C - expect).max() < 1e-9


def test_capelli_single():
    assert capelli_coefficients([2.5]) == [2.5]


def test_capelli_pair():
    a1, a2 = capelli_coefficients([3.0, -2.0])
    assert a1 == pytest.approx(6.0)
    assert a2 == pytest.approx(1.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_capelli_pair_matches_scalar_cayley_hamilton(p, q, r, s):
    # M^2 = a2 M + a1 for a 2x2 matrix with eigenvalues (x, y)
    M = np.array([[p, q], [r, s]])
    x, y = np.linalg.eigvals(M)
    a1, a2 = capelli_coefficients([x, y])
    assert np.abs(M @ M - a2 * M - a1 * np.eye(2)).max() < 1e-8 * (1 + np.abs(M).max() ** 2)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(-4, 4), min_size=1, max_size=4), st.randoms())
def test_capelli_symmetric(vals, rnd):
    perm = list(vals)
    rnd.shuffle(perm)
    assert np.allclose(capelli_coefficients(vals), capelli_coefficients(perm))


@pytest.mark.parametrize("lam,I", [((1, 0), (1,)), ((1, 0, 0), (1,))])
def test_cayley_hamilton_examples(lam, I):
    assert verify_cayley_hamilton(I, lam) < 1e-10


def test_cayley_hamilton_trivial_rep():
    assert verify_cayley_hamilton((1,), (0, 0, 0)) == 0


def test_x_basis_spin_one():
    xb = x_basis((1,), (2, 0))
    assert xb.jofx_residual < 1e-9
    assert xb.exchange_residual < 1e-9


def test_x_basis_q_one_is_generator():
    # q = 1: Delta_1 = 1, X^1 = J^s_a
    lam = (2, 0)
    xb = x_basis((1,), lam)
    assert np.allclose(xb.X[(1, 1)][2], gen(2, 1, lam))


@pytest.mark.parametrize("lam", [(2, 1, 0), (1, 1, 0, 0)])
def test_x_basis_all_sets(lam):
    n = len(lam)
    for I in nonempty_subsets(n):
        if not complement(I, n):
            continue
        assert x_basis(I, lam).residual < 1e-9


def test_sweep_small_gl3():
    for lam in weights_up_to(3, 2):
        if dimension(lam) == 1:
            continue
        for I in itertools.combinations((1, 2, 3), 1):
            assert verify_cayley_hamilton(I, lam) < 1e-9


def test_nearly_degenerate_casimir_mix():
    # the first seeded Casimir combination nearly merges two gl(1,2,4) blocks of (3,3,2,0)
    assert verify_cayley_hamilton((3,), (3, 3, 2, 0)) < 1e-10
    assert x_basis((3,), (3, 3, 2, 0)).residual < 1e-10
