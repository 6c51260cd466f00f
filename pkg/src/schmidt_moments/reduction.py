"""The k-reduction map, its pure-state spectral theory and noise thresholds."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    PSD_TOL,
    BipartiteDensity,
    CriterionVerdict,
    SchmidtVector,
    _readonly,
    as_schmidt_vector,
    hermitian_spectrum,
    partial_trace,
    psd_threshold,
)


@dataclass(frozen=True)
class ReducedOperator:
    k: int
    matrix: np.ndarray
    d_A: int
    d_B: int

    def spectrum(self) -> np.ndarray:
        return hermitian_spectrum(self.matrix)


@dataclass(frozen=True)
class NegativityReport:
    negativity: float
    min_eig: float
    spectrum: np.ndarray


def k_reduced_operator(rho: BipartiteDensity, k: int) -> ReducedOperator:
    """``k * (rho_A (x) I_B) - rho``."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    rho_A = partial_trace(rho, "B")
    M = k * np.kron(rho_A, np.eye(rho.d_B)) - rho.rho
    M = (M + M.conj().T) / 2
    return ReducedOperator(k, _readonly(M), rho.d_A, rho.d_B)


def omega_matrix(lam, k: float) -> np.ndarray:
    """``k diag(lam) - sqrt(lam) sqrt(lam)^T``."""
    lam = as_schmidt_vector(lam).lam
    s = np.sqrt(lam)
    return k * np.diag(lam) - np.outer(s, s)


def theta_k(lam, k: float) -> float:
    """Pure-state reduction negativity from the smallest eigenvalue of Omega."""
    lam = as_schmidt_vector(lam)
    if k >= lam.rank:
        return 0.0
    return max(0.0, -float(np.linalg.eigvalsh(omega_matrix(lam, k))[0]))


def fixed_point_function(y: float, k: float, lam) -> float:
    """``G(y) = sum_i lam_i / (k lam_i + y)``; strictly decreasing in ``y > 0``."""
    lam = as_schmidt_vector(lam).nonzero()
    return float(np.sum(lam / (k * lam + y)))


def theta_k_bisect(lam, k: float, max_iter: int = 200, width: float = 1e-14) -> float:
    """Same quantity as :func:`theta_k`, found as the root of ``G(y) = 1``.

    The root lies in ``(0, 1 - k/r]``; at the upper end ``G <= 1`` by the
    Cauchy-Schwarz inequality, and ``G -> 1/k > 1`` as ``y -> 0``.
    """
    lam = as_schmidt_vector(lam)
    r = lam.rank
    if k >= r:
        return 0.0
    vals = lam.nonzero()
    lo, hi = 0.0, 1.0 - k / r
    for _ in range(max_iter):
        if hi - lo <= width:
            break
        mid = 0.5 * (lo + hi)
        if np.sum(vals / (k * vals + mid)) > 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def negativity_from_spectrum(spec: np.ndarray) -> float:
    spec = np.asarray(spec, dtype=float)
    return float(-np.sum(spec[spec < 0]))


def reduction_negativity(rho: BipartiteDensity, k: int) -> NegativityReport:
    """Absolute sum of the negative eigenvalues of the k-reduced operator."""
    spec = k_reduced_operator(rho, k).spectrum()
    # equivalently (||R||_1 - k d_B + 1) / 2
    neg = 0.5 * (np.sum(np.abs(spec)) - k * rho.d_B + 1)
    return NegativityReport(max(0.0, float(neg)), float(spec[0]), _readonly(spec))


def pure_reduced_spectrum(lam, k: float, d_B: int) -> np.ndarray:
    """Spectrum of ``R_k(|psi><psi|)`` from the Schmidt vector alone, sorted.

    ``lam`` is padded to length ``d = min(d_A, d_B)``; with ``d_A <= d_B`` the
    result has ``d * d_B`` entries.
    """
    lam = as_schmidt_vector(lam).lam
    if lam.size > d_B:
        raise ValueError("Schmidt vector longer than d_B")
    om = np.linalg.eigvalsh(omega_matrix(lam, k))
    rest = np.repeat(k * lam, d_B - 1)
    return np.sort(np.concatenate([om, rest]))


def tilde_omega(distinct_coeffs, k: float) -> np.ndarray:
    """Compressed Omega built from distinct nonzero coefficients.

    ``distinct_coeffs`` is a sequence of ``(level, multiplicity)`` pairs.
    Zero levels are dropped.
    """
    pairs = [(float(l), int(m)) for l, m in distinct_coeffs if l > 0]
    if not pairs:
        raise ValueError("no nonzero coefficients")
    ell = np.array([p[0] for p in pairs])
    mult = np.array([p[1] for p in pairs], dtype=float)
    total = float(np.sum(ell * mult))
    if abs(total - 1.0) > 1e-12:
        raise ValueError(f"coefficients weighted by multiplicity sum to {total!r}, not 1")
    w = np.sqrt(mult * ell)
    return k * np.diag(ell) - np.outer(w, w)


def compressed_omega_spectrum(lam, k: float) -> np.ndarray:
    """Full Omega spectrum assembled from the compressed matrix, sorted."""
    sv = as_schmidt_vector(lam)
    levels, mult = sv.distinct()
    parts = [np.linalg.eigvalsh(tilde_omega(zip(levels, mult), k))]
    parts.append(np.repeat(k * levels, mult - 1))
    parts.append(np.zeros(len(sv) - sv.rank))
    return np.sort(np.concatenate(parts))


def depolarized_negativity(psi_lambda, eps: float, k: int, d_A: int, d_B: int) -> float:
    """Reduction negativity of ``(1 - eps) |psi><psi| + eps I / (d_A d_B)``."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    n_pure = theta_k(psi_lambda, k)
    if eps >= depolarizing_threshold(n_pure, k, d_A, d_B):
        return 0.0
    return (1 - eps) * n_pure - eps * (d_B * k - 1) / (d_A * d_B)


def depolarizing_threshold(pure_negativity: float, k: int, d_A: int, d_B: int) -> float:
    """Noise level at which the depolarized negativity reaches zero."""
    D = d_A * d_B
    if pure_negativity <= 0:
        return 0.0
    return D * pure_negativity / (k * d_B - 1 + D * pure_negativity)


def noise_threshold_rm(r: int, d_A: int, d_B: int) -> float:
    """Largest noise at which the reduction criterion still sees SN >= r
    for a depolarized maximally entangled state of rank ``r``."""
    if not 1 <= r <= d_A <= d_B:
        raise ValueError("need 1 <= r <= d_A <= d_B")
    return 1.0 / (1.0 + (r * r - r) / d_A - r / (d_A * d_B))


def schmidt_number_bounds_medp(r: int, eps: float, d_A: int, d_B: int) -> tuple[int, int]:
    """Lower and upper bounds on the Schmidt number of a depolarized
    maximally entangled state of rank ``r``."""
    if not 0.0 <= eps < 1.0:
        raise ValueError("eps must lie in [0, 1)")
    u = eps / ((1 - eps) * d_A * d_B)
    lower = _ceil((1 + u) * r / (1 + d_B * r * u))
    upper = _ceil((1 + u) * r / (1 + r * r * u))
    return lower, upper


def _ceil(x: float, tol: float = 1e-12) -> int:
    # guard against 2.0000000000000004 rounding up
    return int(math.ceil(x - tol))


def reduction_criterion(rho: BipartiteDensity, k: int, tol: float = PSD_TOL) -> CriterionVerdict:
    R = k_reduced_operator(rho, k)
    spec = R.spectrum()
    detected = bool(spec[0] < psd_threshold(R.matrix, tol))
    return CriterionVerdict(detected, k, float(spec[0]), "reduction")


def reduction_schmidt_bound(rho: BipartiteDensity, k_max: int | None = None) -> int:
    """Largest certified lower bound ``k + 1`` over ``k = 1..k_max``."""
    k_max = k_max or min(rho.d_A, rho.d_B) - 1
    best = 1
    for k in range(1, k_max + 1):
        if reduction_criterion(rho, k).detected:
            best = k + 1
        else:
            break
    return best
