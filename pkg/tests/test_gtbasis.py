import itertools
from math import prod

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spinchain.gtbasis import (
    HighestWeight,
    casimir_matrix,
    dimension,
    enumerate_patterns,
    gen,
    is_interlacing,
)
from spinchain.weights import harish_chandra


def weyl_oracle(lam):
    # independent of the package: product over positive roots
    n = len(lam)
    return prod((lam[i] - lam[j] + j - i) / (j - i) for i in range(n) for j in range(i + 1, n))


weights = st.integers(2, 4).flatmap(
    lambda n: st.lists(st.integers(0, 3), min_size=n, max_size=n).map(lambda v: tuple(sorted(v, reverse=True)))
)


@pytest.mark.parametrize("lam,count", [((1, 0), 2), ((1, 1, 0), 3), ((2, 1, 0), 8)])
def test_pattern_counts(lam, count):
    assert len(enumerate_patterns(lam)) == count


@settings(max_examples=40, deadline=None)
@given(weights)
def test_pattern_count_matches_weyl(lam):
    pats = enumerate_patterns(lam)
    assert len(pats) == round(weyl_oracle(lam))
    assert len(set(pats)) == len(pats)
    assert all(is_interlacing(p) for p in pats)


def test_highest_weight_first():
    pats = enumerate_patterns((2, 1, 0))
    assert all(row == (2, 1, 0)[: len(row)] for row in pats[0])


def test_rejects_increasing_weight():
    with pytest.raises(ValueError):
        HighestWeight((0, 1))


def test_fundamental_cartan():
    assert sorted(np.diag(gen(1, 1, (1, 0))).real) == [0, 1]


def test_total_box_count():
    lam = (2, 1, 0)
    total = sum(gen(a, a, lam) for a in range(1, 4))
    assert np.allclose(total, 3 * np.eye(8))


@pytest.mark.parametrize("lam", [(1, 0), (3, 1), (2, 1, 0), (3, 3, 0), (2, 1, 1, 0)])
def test_commutation_relations(lam):
    n = len(lam)
    J = {(a, b): gen(a, b, lam) for a in range(1, n + 1) for b in range(1, n + 1)}
    for (a, b), (c, d) in itertools.product(J, J):
        lhs = J[a, b] @ J[c, d] - J[c, d] @ J[a, b]
        rhs = (b == c) * J[a, d] - (a == d) * J[c, b]
        assert np.abs(lhs - rhs).max() < 1e-10


def test_weight_of_each_pattern():
    # J^k_k acts by (row k sum) - (row k-1 sum)
    lam = (3, 1, 0)
    pats = enumerate_patterns(lam)
    for k in range(1, 4):
        diag = np.diag(gen(k, k, lam)).real
        expect = [sum(p[k - 1]) - (sum(p[k - 2]) if k > 1 else 0) for p in pats]
        assert np.allclose(diag, expect)


def test_full_casimir_first_order():
    lam = (2, 1, 0)
    assert np.allclose(casimir_matrix(1, (1, 2, 3), lam), 3 * np.eye(8))


def test_cartan_casimir_single_index():
    assert sorted(np.diag(casimir_matrix(1, (2,), (1, 0))).real) == [0, 1]


@pytest.mark.parametrize("lam", [(2, 0), (2, 1, 0), (3, 1, 0), (1, 1, 0, 0)])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_full_casimir_scalar(lam, k):
    # Harish-Chandra value computed from shifted weights, independent of the matrices
    n = len(lam)
    ell = [l - i for i, l in enumerate(lam)]
    C = casimir_matrix(k, tuple(range(1, n + 1)), lam)
    assert np.abs(C - harish_chandra(ell, k) * np.eye(dimension(lam))).max() < 1e-10


def test_quadratic_casimir_by_hand():
    # on C^2: E11 E11 + E22 E22 + E12 E21 + E21 E12 = 2 Id
    lam = (1, 0)
    C2 = sum(gen(a, b, lam) @ gen(b, a, lam) for a in (1, 2) for b in (1, 2))
    assert np.allclose(casimir_matrix(2, (1, 2), lam), C2)
    assert np.allclose(C2, 2 * np.eye(2))


@pytest.mark.parametrize("lam", [(2, 1, 0), (2, 2, 1, 0)])
def test_subset_casimir_central(lam):
    n = len(lam)
    for r in range(1, n + 1):
        for I in itertools.combinations(range(1, n + 1), r):
            C = casimir_matrix(2, I, lam)
            for a in I:
                for b in I:
                    J = gen(a, b, lam)
                    assert np.abs(C @ J - J @ C).max() < 1e-10
