import numpy as np
import pytest

from spinchain.bethe import (
    BetheError,
    BetheRootSet,
    bethe_residual,
    check_path,
    closure,
    energy_from_roots,
    joint_eigenbasis,
    magnon_numbers,
    multiset_distance,
    q_eigenvalue_roots,
    solve_bethe_newton,
)
from spinchain.gtbasis import dimension
from spinchain.hambuilder import hamiltonian_total_matrix
from spinchain.qfactory import QFamily

TW2 = (0.3, 1.1)
TW3 = (0.3, 1.1, 2.0)


def one_magnon_oracle(L, twist):
    # e^{i(phi1 - phi2)} ((z + 1/2)/(z - 1/2))^L = 1  =>  z = (u + 1) / (2 (u - 1)), u^L = e^{-i(phi1 - phi2)}
    theta = -(twist[0] - twist[1])
    us = np.exp(1j * (theta + 2 * np.pi * np.arange(L)) / L)
    return (us + 1) / (2 * (us - 1))


def vacuum():
    v = np.zeros(8, dtype=complex)
    v[0] = 1
    return v


def test_check_path():
    assert check_path([2, 1], 2) == (2, 1)
    with pytest.raises(ValueError):
        check_path([1, 1], 2)


def test_vacuum_has_no_roots():
    fam = QFamily((1, 0), 3, TW2)
    assert len(q_eigenvalue_roots((2,), (1, 0), 3, TW2, vacuum(), fam)) == 0
    # on the other path the vacuum carries L roots
    assert len(q_eigenvalue_roots((1,), (1, 0), 3, TW2, vacuum(), fam)) == 3


def test_non_eigenvector_rejected():
    v = np.ones(8, dtype=complex)
    with pytest.raises(BetheError):
        q_eigenvalue_roots((1,), (1, 0), 3, TW2, v)


def test_empty_rootset():
    rs = BetheRootSet((2, 1), [np.zeros(0, dtype=complex)])
    assert bethe_residual(rs, (1, 0), 3, TW2) == 0
    assert energy_from_roots(rs, (1, 0)) == 0


def test_vacuum_energy_is_zero():
    H = hamiltonian_total_matrix((1, 0, 0), 3, TW3)
    assert abs(H[0, 0]) < 1e-14
    assert np.abs(H[:, 0]).max() < 1e-14


def test_one_magnon_roots_match_oracle():
    states = joint_eigenbasis((1, 0), 2, TW2)
    fam = QFamily((1, 0), 2, TW2)
    found = [q_eigenvalue_roots((2,), (1, 0), 2, TW2, s, fam) for s in states]
    singles = np.array([r[0] for r in found if len(r) == 1])
    assert multiset_distance(singles, one_magnon_oracle(2, TW2)) < 1e-10


@pytest.mark.parametrize("hw,L,tw", [((1, 0), 3, TW2), ((1, 0, 0), 2, TW3), ((2, 0), 2, TW2)])
def test_closure_small(hw, L, tw):
    n = len(hw)
    for path in (tuple(range(n, 0, -1)), tuple(range(1, n + 1))):
        rep = closure(hw, L, tw, path)
        assert len(rep.rows) == dimension(hw) ** L
        assert rep.max_bethe_residual < 1e-6
        assert rep.max_energy_error < 1e-6
        assert all(r["magnons"] == r["expected_magnons"] for r in rep.rows)


def test_magnon_numbers_vacuum():
    assert magnon_numbers((3, 0), (1, 0), 3, (2, 1)) == (0,)
    assert magnon_numbers((3, 0), (1, 0), 3, (1, 2)) == (3,)


def test_newton_zero_magnons():
    rs, res = solve_bethe_newton((1, 0), 4, TW2, [0], path=(2, 1))
    assert rs.magnons == (0,) and res == 0


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_newton_one_magnon_matches_q(seed):
    rs, res = solve_bethe_newton((1, 0), 2, TW2, [1], seed=seed, path=(2, 1))
    assert res < 1e-10
    target = one_magnon_oracle(2, TW2)
    assert np.min(np.abs(target - rs.roots[0][0])) < 1e-8


def test_newton_seeds_agree_in_unique_sector():
    # gl(2), L = 2, two magnons on path (2, 1): a single eigenstate, so a single root multiset
    rep = closure((1, 0), 2, TW2, (2, 1))
    (target,) = [np.array(r["roots"][0]) for r in rep.rows if r["magnons"] == (2,)]
    for seed in range(4):
        rs, _ = solve_bethe_newton((1, 0), 2, TW2, [2], seed=seed, path=(2, 1))
        assert multiset_distance(rs.roots[0], target) < 1e-8


def test_newton_gl3_sector():
    rs, res = solve_bethe_newton((1, 0, 0), 2, TW3, [1, 1], seed=0, path=(3, 2, 1))
    assert res < 1e-8
    E = energy_from_roots(rs, (1, 0, 0))
    spectrum = np.linalg.eigvals(hamiltonian_total_matrix((1, 0, 0), 2, TW3))
    assert np.min(np.abs(spectrum - E)) < 1e-8


def test_newton_rejects_bad_input():
    with pytest.raises(ValueError):
        solve_bethe_newton((1, 0, 0), 2, TW3, [1])
    with pytest.raises(ValueError):
        solve_bethe_newton((1, 0), 2, TW2, [-1])
