import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schmidt_moments.core import maximally_entangled, maximally_mixed, schmidt_diagonal_state
from schmidt_moments.correlation import (
    cm_bound,
    cm_criterion,
    cm_holder_criterion,
    cm_holder_for_state,
    correlation_matrix,
    gellmann_basis,
    holder_ratio,
    isotropic_cm_values,
    schatten_norm,
)
from schmidt_moments.ensembles import isotropic_state
from schmidt_moments.reduction import reduction_criterion

from conftest import low_schmidt_number_state, random_mixed, schmidt_vectors

EXAMPLE = [4 / 5, 1 / 15, 1 / 15, 1 / 15]


def test_qubit_basis_is_pauli():
    X = np.array([[0, 1], [1, 0]])
    Y = np.array([[0, -1j], [1j, 0]])
    Z = np.diag([1, -1])
    np.testing.assert_allclose(gellmann_basis(2), [X, Y, Z], atol=1e-15)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_basis_orthogonality_and_tracelessness(d):
    P = gellmann_basis(d)
    assert P.shape == (d * d - 1, d, d)
    gram = np.einsum("iab,jba->ij", P, P)
    np.testing.assert_allclose(gram, d * np.eye(d * d - 1), atol=1e-12)
    np.testing.assert_allclose(np.einsum("iaa->i", P), 0, atol=1e-12)
    for m in P:
        np.testing.assert_allclose(m, m.conj().T)


def test_basis_rejects_trivial_dimension():
    with pytest.raises(ValueError):
        gellmann_basis(1)


def test_bell_singular_values():
    T = correlation_matrix(maximally_entangled(2, 2, 2).density())
    np.testing.assert_allclose(T.singular_values, [0.5, 0.5, 0.5], atol=1e-14)
    assert abs(T.schatten(1) - 1.5) < 1e-14


def test_product_state_trace_norm(rng):
    psi = schmidt_diagonal_state([1, 0, 0], 3, 3)
    # product of pure states: only one nonzero singular value (d - 1)/d
    sv = correlation_matrix(psi.density()).singular_values
    assert abs(sv[0] - 2 / 3) < 1e-12
    np.testing.assert_allclose(sv[1:], 0, atol=1e-12)


def test_rejects_unequal_dimensions(rng):
    with pytest.raises(ValueError):
        correlation_matrix(random_mixed(2, 3, rng))


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6, 7, 8])
def test_isotropic_closed_forms(d):
    for F in np.linspace(0, 1, 21):
        T = correlation_matrix(isotropic_state(d, F))
        n1, n2, n4 = isotropic_cm_values(d, F)
        assert abs(T.schatten(1) - n1) < 1e-10
        assert abs(T.schatten(2) ** 2 - n2) < 1e-10
        assert abs(T.schatten(4) ** 4 - n4) < 1e-10


@settings(max_examples=30, deadline=None)
@given(schmidt_vectors(min_d=2, max_d=5))
def test_schmidt_diagonal_trace_norm(lam):
    d = len(lam)
    T = correlation_matrix(schmidt_diagonal_state(lam, d, d).density())
    expected = np.sum(np.sqrt(lam.lam)) ** 2 - 1.0 / d
    assert abs(T.schatten(1) - expected) < 1e-10


def test_basis_independence(rng):
    d = 3
    P = gellmann_basis(d)
    n = d * d - 1
    O, _ = np.linalg.qr(rng.normal(size=(n, n)))
    Q = np.einsum("ij,jab->iab", O, P)
    rho = random_mixed(d, d, rng)
    a = correlation_matrix(rho).singular_values
    b = correlation_matrix(rho, basis=Q).singular_values
    np.testing.assert_allclose(np.sort(a), np.sort(b), atol=1e-12)


def test_schatten_norm_inf_and_ordering(rng):
    T = correlation_matrix(random_mixed(3, 3, rng))
    assert schatten_norm(T, np.inf) == pytest.approx(T.singular_values.max())
    assert T.schatten(1) >= T.schatten(2) >= T.schatten(4) >= T.schatten(np.inf)


def test_holder_ratio_zero_over_zero():
    assert holder_ratio(0.0, 0.0) == 0.0
    v = cm_holder_criterion(0.0, 0.0, 1, 3)
    assert not v.detected
    with pytest.raises(ValueError):
        cm_holder_criterion(-1.0, 1.0, 1, 3)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_holder_ratio_bounded_by_trace_norm(d, seed):
    rng = np.random.default_rng(seed)
    T = correlation_matrix(random_mixed(d, d, rng, K=int(rng.integers(1, d * d + 1))))
    ratio = holder_ratio(T.schatten(2) ** 2, T.schatten(4) ** 4)
    assert ratio <= T.schatten(1) + 1e-10
    rho = random_mixed(d, d, rng, K=int(rng.integers(1, 3)))
    for k in range(1, d):
        if cm_holder_for_state(rho, k).detected:
            assert cm_criterion(rho, k).detected


def test_cm_soundness(rng):
    for trial in range(200):
        d = (2, 3, 4)[trial % 3]
        k = 1 + trial % (d - 1) if d > 2 else 1
        rho = low_schmidt_number_state(d, d, k, rng)
        assert not cm_criterion(rho, k).detected
        assert not cm_holder_for_state(rho, k).detected


def test_cm_bound_values():
    assert cm_bound(1, 2) == 0.5
    assert cm_bound(3, 4) == 2.75


def test_example_state_verdicts():
    rho = schmidt_diagonal_state(EXAMPLE, 4, 4).density()
    assert not cm_criterion(rho, 3).detected
    assert cm_criterion(rho, 2).detected
    assert reduction_criterion(rho, 3).detected


@pytest.mark.parametrize("d", [2, 3, 4])
def test_isotropic_verdicts_match_schmidt_number(d):
    for F in np.linspace(0, 1, 21):
        sn = max(1, int(np.ceil(d * F - 1e-12)))
        rho = isotropic_state(d, F)
        for k in range(1, d):
            assert cm_criterion(rho, k).detected == (k < sn)
            assert cm_holder_for_state(rho, k).detected == (k < sn)


def test_maximally_mixed_has_zero_correlations():
    T = correlation_matrix(maximally_mixed(3, 3))
    np.testing.assert_allclose(T.T, 0, atol=1e-15)
