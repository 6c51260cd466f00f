import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schmidt_moments.core import (
    BipartiteDensity,
    PureState,
    SchmidtVector,
    hermitian_spectrum,
    is_psd,
    maximally_entangled,
    partial_trace,
    product_density,
    schmidt_coefficients_svd,
    schmidt_decompose,
    schmidt_diagonal_state,
    schmidt_number_pure,
)
from schmidt_moments.reduction import k_reduced_operator, omega_matrix

from conftest import random_mixed, random_pure


def test_schmidt_decompose_product_state():
    psi = PureState([1, 0, 0, 0], 2, 2)
    lam, _, _ = schmidt_decompose(psi)
    np.testing.assert_allclose(lam.lam, [1, 0], atol=1e-14)
    assert schmidt_number_pure(psi) == 1


def test_schmidt_decompose_bell():
    lam, _, _ = schmidt_decompose(maximally_entangled(2, 2, 2))
    np.testing.assert_allclose(lam.lam, [0.5, 0.5], atol=1e-14)


def test_schmidt_decompose_example_state():
    amps = np.zeros(16)
    amps[0] = np.sqrt(4 / 5)
    for i in (1, 2, 3):
        amps[i * 4 + i] = np.sqrt(1 / 15)
    psi = PureState(amps, 4, 4)
    lam, _, _ = schmidt_decompose(psi)
    np.testing.assert_allclose(lam.lam, [4 / 5, 1 / 15, 1 / 15, 1 / 15], atol=1e-12)
    assert schmidt_number_pure(psi) == 4


def test_schmidt_decompose_rejects_dimension_mismatch():
    with pytest.raises(ValueError):
        PureState(np.ones(5) / np.sqrt(5), 2, 2)


@pytest.mark.parametrize("d_A,d_B", [(2, 2), (2, 3), (3, 5), (4, 4)])
def test_schmidt_reconstruction_and_svd_agree(d_A, d_B, rng):
    for _ in range(10):
        psi = random_pure(d_A, d_B, rng)
        lam, UA, UB = schmidt_decompose(psi)
        np.testing.assert_allclose(lam.lam, schmidt_coefficients_svd(psi)[: len(lam)], atol=1e-12)
        rebuilt = sum(np.sqrt(lam.lam[i]) * np.kron(UA[:, i], UB[:, i]) for i in range(len(lam)))
        np.testing.assert_allclose(rebuilt, psi.amplitudes, atol=1e-10)
        np.testing.assert_allclose(UA.conj().T @ UA, np.eye(d_A), atol=1e-12)
        np.testing.assert_allclose(UB.conj().T @ UB, np.eye(d_B), atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 4), st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_schmidt_sum_and_marginal_symmetry(d_A, d_B, seed):
    psi = random_pure(d_A, d_B, np.random.default_rng(seed))
    lam, _, _ = schmidt_decompose(psi)
    assert abs(lam.lam.sum() - 1) < 1e-12
    rho = psi.density()
    sa = np.sort(np.linalg.eigvalsh(partial_trace(rho, "B")))[::-1]
    sb = np.sort(np.linalg.eigvalsh(partial_trace(rho, "A")))[::-1]
    d = min(d_A, d_B)
    np.testing.assert_allclose(sa[:d], sb[:d], atol=1e-10)


def test_partial_trace_bell_is_maximally_mixed():
    rho = maximally_entangled(2, 2, 2).density()
    np.testing.assert_allclose(partial_trace(rho, "B"), np.eye(2) / 2, atol=1e-15)
    np.testing.assert_allclose(partial_trace(rho, "A"), np.eye(2) / 2, atol=1e-15)


def test_partial_trace_product(rng):
    sigma = random_mixed(1, 3, rng).rho
    tau = random_mixed(1, 2, rng).rho
    rho = product_density(sigma, tau)
    np.testing.assert_allclose(partial_trace(rho, "B"), sigma, atol=1e-14)
    np.testing.assert_allclose(partial_trace(rho, "A"), tau, atol=1e-14)


def test_partial_trace_purity_matches_two_copy_swap(rng):
    d_A, d_B = 3, 2
    rho = random_mixed(d_A, d_B, rng)
    rA = partial_trace(rho, "B")
    # swap of the two A factors on rho (x) rho, identity on both B factors
    D = d_A * d_B
    swap = np.zeros((D * D, D * D))
    for a1 in range(d_A):
        for b1 in range(d_B):
            for a2 in range(d_A):
                for b2 in range(d_B):
                    src = (a1 * d_B + b1) * D + (a2 * d_B + b2)
                    dst = (a2 * d_B + b1) * D + (a1 * d_B + b2)
                    swap[dst, src] = 1
    two_copy = np.trace(np.kron(rho.rho, rho.rho) @ swap).real
    assert abs(np.trace(rA @ rA).real - two_copy) < 1e-12


def test_hermitian_spectrum_examples():
    np.testing.assert_allclose(hermitian_spectrum(np.eye(3)), [1, 1, 1])
    np.testing.assert_allclose(hermitian_spectrum(np.diag([2.0, -1.0])), [-1, 2])
    np.testing.assert_allclose(hermitian_spectrum(omega_matrix([0.5, 0.5], 1)), [-0.5, 0.5], atol=1e-15)


def test_hermitian_spectrum_rejects_non_hermitian():
    with pytest.raises(ValueError):
        hermitian_spectrum(np.array([[0, 1], [0, 0]]))


def test_spectrum_sums_to_trace(rng):
    for d in (2, 3, 5):
        rho = random_mixed(d, d, rng)
        assert abs(hermitian_spectrum(rho.rho).sum() - 1) < 1e-10 * d * d


def test_is_psd_examples():
    assert is_psd(np.eye(2))
    assert not is_psd(np.diag([1.0, -0.5]))
    R = k_reduced_operator(maximally_entangled(2, 2, 2).density(), 1)
    assert not is_psd(R.matrix)


def test_is_psd_tolerance_is_relative():
    assert is_psd(np.diag([1e3, -1e-7]))
    assert not is_psd(np.diag([1.0, -1e-6]))


def test_maximally_entangled_examples():
    bell = maximally_entangled(2, 2, 2)
    np.testing.assert_allclose(bell.amplitudes, [1 / np.sqrt(2), 0, 0, 1 / np.sqrt(2)])
    np.testing.assert_allclose(maximally_entangled(1, 2, 3).amplitudes, np.eye(6)[0])
    assert schmidt_number_pure(maximally_entangled(4, 4, 4)) == 4
    with pytest.raises(ValueError):
        maximally_entangled(3, 2, 4)


def test_density_validation():
    with pytest.raises(ValueError):
        BipartiteDensity(np.diag([0.5, 0.6, 0, 0]), 2, 2)
    with pytest.raises(ValueError):
        BipartiteDensity(np.diag([1.2, -0.2, 0, 0]), 2, 2)
    with pytest.raises(ValueError):
        BipartiteDensity(np.eye(3) / 3, 2, 2)
    rho = BipartiteDensity(np.eye(4) / 4, 2, 2)
    with pytest.raises(ValueError):
        rho.rho[0, 0] = 1


def test_schmidt_vector_validation_and_distinct():
    with pytest.raises(ValueError):
        SchmidtVector([0.5, 0.6])
    lam = SchmidtVector([0.1, 0.6, 0.1, 0.2, 0.0])
    np.testing.assert_allclose(lam.lam, [0.6, 0.2, 0.1, 0.1, 0.0])
    levels, mult = lam.distinct()
    np.testing.assert_allclose(levels, [0.6, 0.2, 0.1])
    np.testing.assert_array_equal(mult, [1, 1, 2])
    assert lam.rank == 4


def test_schmidt_diagonal_state_indexing():
    psi = schmidt_diagonal_state([0.7, 0.3], 2, 3)
    assert abs(psi.amplitudes[0] - np.sqrt(0.7)) < 1e-15
    assert abs(psi.amplitudes[1 * 3 + 1] - np.sqrt(0.3)) < 1e-15
