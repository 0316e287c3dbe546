import itertools

import numpy as np
import pytest


def rand_herm(n, rng, scale=1.0):
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (G + G.conj().T)


def rand_mat(n, rng, m=None):
    m = n if m is None else m
    return rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))


def brute_partial_trace(M, dims, keep):
    # explicit index summation
    k = len(dims)
    kept = [i for i in range(k) if i in keep]
    dk = int(np.prod([dims[i] for i in kept]))
    out = np.zeros((dk, dk), dtype=complex)
    for r in itertools.product(*[range(d) for d in dims]):
        for c in itertools.product(*[range(d) for d in dims]):
            if any(r[i] != c[i] for i in range(k) if i not in keep):
                continue
            ri = int(np.ravel_multi_index([r[i] for i in kept], [dims[i] for i in kept]))
            ci = int(np.ravel_multi_index([c[i] for i in kept], [dims[i] for i in kept]))
            out[ri, ci] += M[np.ravel_multi_index(r, dims), np.ravel_multi_index(c, dims)]
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = {}


@pytest.fixture
def verdict():
    """Record one acceptance line: verdict(number, passed, detail)."""

    def record(number, passed, detail):
        ACCEPTANCE_LINES[number] = f"criterion {number:>4}: {'PASS' if passed else 'FAIL'}  {detail}"
        print(ACCEPTANCE_LINES[number])
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: (int(str(k).rstrip("i")), str(k))):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
