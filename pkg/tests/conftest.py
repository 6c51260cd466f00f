import sys

import numpy as np
import pytest
from hypothesis import strategies as st

from schmidt_moments.core import BipartiteDensity, PureState, SchmidtVector
from schmidt_moments.ensembles import haar_unitary, induced_mixed


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_pure(d_A, d_B, rng):
    v = rng.normal(size=d_A * d_B) + 1j * rng.normal(size=d_A * d_B)
    return PureState(v / np.linalg.norm(v), d_A, d_B)


def random_mixed(d_A, d_B, rng, K=None):
    return induced_mixed(d_A, d_B, K or d_A * d_B, rng)


def rank_limited_pure(d_A, d_B, r, rng):
    """Random pure state with Schmidt rank at most ``r``, in random local bases."""
    UA = haar_unitary(d_A, rng)[:, :r]
    UB = haar_unitary(d_B, rng)[:, :r]
    c = rng.normal(size=r) + 1j * rng.normal(size=r)
    psi = sum(c[i] * np.kron(UA[:, i], UB[:, i]) for i in range(r))
    return psi / np.linalg.norm(psi)


def low_schmidt_number_state(d_A, d_B, k, rng, terms=None):
    """Convex mixture of pure states of Schmidt rank <= k, so SN <= k."""
    terms = terms or rng.integers(1, 2 * d_A * d_B)
    w = rng.dirichlet(np.ones(terms))
    rho = np.zeros((d_A * d_B, d_A * d_B), dtype=complex)
    for wi in w:
        psi = rank_limited_pure(d_A, d_B, k, rng)
        rho += wi * np.outer(psi, psi.conj())
    rho = (rho + rho.conj().T) / 2
    return BipartiteDensity(rho / np.trace(rho).real, d_A, d_B)


@st.composite
def schmidt_vectors(draw, min_d=2, max_d=6, min_rank=1):
    """Schmidt vectors with coefficient gaps well above clustering tolerances."""
    d = draw(st.integers(min_d, max_d))
    r = draw(st.integers(max(1, min_rank), d))
    weights = draw(st.lists(st.integers(1, 40), min_size=r, max_size=r))
    lam = np.zeros(d)
    lam[:r] = np.array(weights, dtype=float) / sum(weights)
    return SchmidtVector(lam / lam.sum())


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
