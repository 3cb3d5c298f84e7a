import itertools

import numpy as np
import pytest


def weights_up_to(n, top):
    """All weakly decreasing nonnegative weights of length n with lam_1 <= top."""
    out = []
    for lam in itertools.product(range(top + 1), repeat=n):
        if all(lam[i] >= lam[i + 1] for i in range(n - 1)):
            out.append(lam)
    return out


def nonempty_subsets(n):
    idx = range(1, n + 1)
    return [c for r in range(1, n + 1) for c in itertools.combinations(idx, r)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE: list[str] = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(number, title, checks):
        # checks: list of (label, value, tolerance)
        ok = all(v < tol for _, v, tol in checks)
        detail = "; ".join(f"{label} {v:.2e} < {tol:.0e}" for label, v, tol in checks)
        line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
