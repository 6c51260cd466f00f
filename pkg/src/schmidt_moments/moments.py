"""Moment sequences of the k-reduced operator and Hankel-matrix tests."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import mpmath
import numpy as np

from .core import (
    PSD_TOL,
    RANK_TOL,
    BipartiteDensity,
    CriterionVerdict,
    _readonly,
    as_schmidt_vector,
    hermitian_spectrum,
    psd_threshold,
)
from .reduction import k_reduced_operator, omega_matrix, theta_k

Source = Literal["exact", "analytic-pure", "estimated"]


@dataclass(frozen=True)
class MomentSequence:
    """``q[n-1] = Tr R_k^n`` for ``n = 1..N``."""

    k: int
    q: np.ndarray
    source: Source = "exact"

    def __post_init__(self):
        object.__setattr__(self, "q", _readonly(np.asarray(self.q, dtype=float)))

    def __len__(self) -> int:
        return self.q.size

    def __getitem__(self, n: int) -> float:
        """1-indexed access: ``Q[1]`` is the first moment."""
        if not 1 <= n <= self.q.size:
            raise IndexError(f"moment index {n} outside 1..{self.q.size}")
        return float(self.q[n - 1])


def power_sums(values: np.ndarray, N: int, weights: Optional[np.ndarray] = None) -> np.ndarray:
    """``sum_i w_i x_i^n`` for ``n = 1..N``."""
    x = np.asarray(values, dtype=float)
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float)
    pw = np.cumprod(np.tile(x, (N, 1)), axis=0)
    return pw @ w


def reduction_moments(rho: BipartiteDensity, k: int, N: int) -> MomentSequence:
    if N < 1:
        raise ValueError("N must be at least 1")
    spec = k_reduced_operator(rho, k).spectrum()
    return MomentSequence(k, power_sums(spec, N), "exact")


def moments_from_spectrum(spec: np.ndarray, k: int, N: int) -> MomentSequence:
    return MomentSequence(k, power_sums(spec, N), "exact")


def pure_reduction_moments(lam, k: int, d_B: int, N: int) -> MomentSequence:
    """Moments of ``R_k(|psi><psi|)`` from the Schmidt vector alone."""
    lam = as_schmidt_vector(lam).lam
    om = np.linalg.eigvalsh(omega_matrix(lam, k))
    q = power_sums(om, N) + (d_B - 1) * power_sums(k * lam, N)
    return MomentSequence(k, q, "analytic-pure")


# ---------------------------------------------------------------------------
# Hankel matrices


def hankel(seq: Sequence[float], size: int, offset: int = 0) -> np.ndarray:
    """``H[i, j] = seq[i + j + offset]`` for ``i, j < size``."""
    seq = np.asarray(seq, dtype=float)
    idx = np.add.outer(np.arange(size), np.arange(size)) + offset
    return seq[idx]


def hankel_size(N: int) -> int:
    return (N + 1) // 2 if N % 2 else N // 2


def hankel_BN(Q: MomentSequence, N: int) -> np.ndarray:
    """Odd ``N``: entries ``q_{i+j+1}``. Even ``N``: ``k q_{i+j+1} - q_{i+j+2}``."""
    if N < 1:
        raise ValueError("N must be positive")
    if len(Q) < N:
        raise ValueError(f"need {N} moments, have {len(Q)}")
    q = Q.q[:N]
    if N % 2:
        return hankel(q, (N + 1) // 2)
    shifted = Q.k * q[:-1] - q[1:]
    return hankel(shifted, N // 2)


def min_eig_psd(M: np.ndarray, tol: float = PSD_TOL, slack: float = 0.0) -> tuple[float, bool]:
    """Smallest eigenvalue and whether it clears the PSD threshold.

    ``slack`` is an extra absolute allowance for noisy (estimated) inputs.
    """
    ev = float(hermitian_spectrum(M)[0])
    return ev, ev >= psd_threshold(M, tol) - slack


def truncated_moment_check(S: Sequence[float], a: float, b: float, tol: float = PSD_TOL) -> bool:
    """Whether ``S = (s_0, ..., s_N)`` is a truncated moment sequence on ``[a, b]``.

    Even ``N``: ``H(S_N) >= 0`` and the localized Hankel with entries
    ``(a+b) s_{n+1} - s_{n+2} - ab s_n`` is PSD. Odd ``N``: Hankels with
    entries ``s_{n+1} - a s_n`` and ``b s_n - s_{n+1}`` are PSD.
    """
    s = np.asarray(S, dtype=float)
    N = s.size - 1
    if N < 1:
        raise ValueError("need at least s_0 and s_1")
    mats = []
    if N % 2 == 0:
        mats.append(hankel(s, N // 2 + 1))
        if N >= 2:
            bar = (a + b) * s[1:-1] - s[2:] - a * b * s[:-2]
            mats.append(hankel(bar, (N - 2) // 2 + 1))
    else:
        n = (N - 1) // 2 + 1
        mats.append(hankel(s[1:] - a * s[:-1], n))
        mats.append(hankel(b * s[:-1] - s[1:], n))
    return all(min_eig_psd(M, tol)[1] for M in mats)


def moment_criterion(Q: MomentSequence, N: int, tol: float = PSD_TOL, slack: float = 0.0) -> CriterionVerdict:
    """Detects ``SN > k`` when ``B_N`` is not PSD."""
    if N < 3:
        raise ValueError("orders below 3 carry no information")
    ev, ok = min_eig_psd(hankel_BN(Q, N), tol, slack)
    return CriterionVerdict(not ok, Q.k, ev, f"moment:{N}", N)


def distinct_nonzero_eigs(M: np.ndarray, tol: float = 1e-8) -> int:
    return count_distinct_nonzero(hermitian_spectrum(M), tol)


def count_distinct_nonzero(values: np.ndarray, tol: float = 1e-8) -> int:
    v = np.sort(np.asarray(values, dtype=float))
    v = v[np.abs(v) > tol]
    if v.size == 0:
        return 0
    return int(1 + np.count_nonzero(np.diff(v) > tol))


# ---------------------------------------------------------------------------
# extended precision
#
# At orders near 2 * (number of distinct eigenvalues) the Hankel matrices are
# Vandermonde-like and their smallest eigenvalue can fall far below double
# precision. When the spectrum is available, the moments and the Hankel
# eigenvalues are recomputed with mpmath at ``dps`` digits.

HP_DPS = 100


def hp_tolerance(dps: int) -> float:
    """Relative PSD tolerance used with ``dps`` working digits."""
    return 10.0 ** (-(dps // 2))


def moments_from_spectrum_hp(spec: np.ndarray, N: int, dps: int = HP_DPS, zero_tol: float = RANK_TOL) -> list:
    """Power sums ``q_1..q_N`` in extended precision.

    Eigenvalues within ``zero_tol`` (relative to the largest magnitude) are
    treated as exact zeros, so solver noise around the kernel does not show
    up as spurious negative mass.
    """
    spec = np.asarray(spec, dtype=float)
    cut = zero_tol * max(1.0, float(np.max(np.abs(spec), initial=0.0)))
    vals = spec[np.abs(spec) > cut]
    with mpmath.workdps(dps):
        x = [mpmath.mpf(float(v)) for v in vals]
        q = []
        pw = [mpmath.mpf(1)] * len(x)
        for _ in range(N):
            pw = [a * b for a, b in zip(pw, x)]
            q.append(mpmath.fsum(pw))
    return q


def hankel_BN_hp(q: list, k: int, N: int, dps: int = HP_DPS):
    if len(q) < N:
        raise ValueError(f"need {N} moments, have {len(q)}")
    with mpmath.workdps(dps):
        if N % 2:
            seq, n = q[:N], (N + 1) // 2
        else:
            seq = [k * q[i] - q[i + 1] for i in range(N - 1)]
            n = N // 2
        H = mpmath.matrix(n, n)
        for i in range(n):
            for j in range(n):
                H[i, j] = seq[i + j]
    return H


def moment_criterion_hp(q: list, k: int, N: int, dps: int = HP_DPS) -> CriterionVerdict:
    """:func:`moment_criterion` evaluated in extended precision."""
    if N < 3:
        raise ValueError("orders below 3 carry no information")
    with mpmath.workdps(dps):
        H = hankel_BN_hp(q, k, N, dps)
        ev = min(mpmath.eigsy(H, eigvals_only=True))
        n = H.rows
        norm = max(mpmath.fsum(abs(H[i, j]) for j in range(n)) for i in range(n))
        detected = ev < -hp_tolerance(dps) * max(1, norm)
        return CriterionVerdict(bool(detected), k, float(ev), f"moment:{N}", N)


# ---------------------------------------------------------------------------
# certification loops


def certify_from_moments(Q: MomentSequence, N_max: int, tol: float = PSD_TOL, slack: float = 0.0) -> CriterionVerdict:
    """Try ``N = 3..N_max`` in order and stop at the first detection."""
    if N_max < 3:
        raise ValueError("N_max must be at least 3")
    v = None
    for N in range(3, N_max + 1):
        v = moment_criterion(Q, N, tol, slack)
        if v.detected:
            break
    return CriterionVerdict(v.detected, v.k, v.min_eig, f"moment-upto:{N_max}", v.order_used)


def certify_sn_ge(rho: BipartiteDensity, k: int, N_max: int = 16, tol: float = PSD_TOL) -> CriterionVerdict:
    """Certify ``SN(rho) >= k`` using moments of the ``(k-1)``-reduced operator.

    The returned verdict carries the map index ``k - 1``.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    return certify_from_moments(reduction_moments(rho, k - 1, N_max), N_max, tol)


def best_lower_bound(rho: BipartiteDensity, N_max: int = 16, r_max: Optional[int] = None) -> int:
    """Largest ``s`` with ``SN >= k`` certified for every ``k = 2..s``."""
    r_max = r_max or min(rho.d_A, rho.d_B)
    if r_max > min(rho.d_A, rho.d_B):
        raise ValueError("r_max exceeds the local dimension")
    best = 1
    for k in range(2, r_max + 1):
        if not certify_sn_ge(rho, k, N_max).detected:
            break
        best = k
    return best


# ---------------------------------------------------------------------------
# third order


def det_b3_coeffs(p2: float, p3: float, a2: float, a3: float, t2: float, d_B: int) -> np.ndarray:
    """Coefficients ``(beta_0, ..., beta_4)`` of ``det B_3`` as a polynomial in ``k``.

    Inputs are ``Tr rho^2``, ``Tr rho^3``, ``Tr rho_A^2``, ``Tr rho_A^3`` and
    ``Tr[rho_A Tr_B(rho^2)]``.
    """
    b4 = d_B**2 * (a3 - a2**2)
    b3 = -4 * d_B * (a3 - a2**2)
    b2 = d_B * (3 * t2 - 2 * a2 * p2) - 4 * a2**2 + 3 * a3
    b1 = 4 * a2 * p2 - d_B * p3 - 3 * t2
    b0 = p3 - p2**2
    return np.array([b0, b1, b2, b3, b4])


def det_b3(p2, p3, a2, a3, t2, d_B, k) -> float:
    c = det_b3_coeffs(p2, p3, a2, a3, t2, d_B)
    return float(np.polynomial.polynomial.polyval(k, c))


def third_order_moments(p2, p3, a2, a3, t2, d_B, k) -> np.ndarray:
    """``(q_1, q_2, q_3)`` of the k-reduced operator from purity-type invariants."""
    q1 = k * d_B - 1
    q2 = k * k * d_B * a2 - 2 * k * a2 + p2
    q3 = k**3 * d_B * a3 - 3 * k * k * a3 + 3 * k * t2 - p3
    return np.array([q1, q2, q3])


def third_order_criterion(p2, p3, a2, a3, t2, d_B: int, k: int, tol: float = PSD_TOL, slack: float = 0.0) -> CriterionVerdict:
    """``B_3`` test from the five invariants.

    Since ``q_1 = k d_B - 1 > 0``, ``B_3`` is PSD iff its determinant is
    nonnegative. The threshold is the usual relative tolerance applied to
    ``q_1 q_3`` (the scale of the determinant), plus ``slack``.
    """
    q = third_order_moments(p2, p3, a2, a3, t2, d_B, k)
    det = det_b3(p2, p3, a2, a3, t2, d_B, k)
    scale = max(1.0, abs(q[0] * q[2]), q[1] ** 2)
    detected = det < -tol * scale - slack
    return CriterionVerdict(bool(detected), k, det, "third-order", 3)


# ---------------------------------------------------------------------------
# pure-state guarantees


class Guarantee(enum.Enum):
    DETECT = "detect-guaranteed"
    NONDETECT = "nondetect-guaranteed"
    INDETERMINATE = "indeterminate"


def a0_matrix(lam, N: int) -> np.ndarray:
    """Hankel matrix of distinct-coefficient power sums at nodes ``(r-1) l_j``.

    ``sum_j p(x_j) b(x_j) b(x_j)^T`` with ``x_j = (r-1) l_j``, ``b`` the
    monomial vector and ``p(x) = x`` (odd ``N``) or ``x ((r-1) - x)`` (even).
    """
    sv = as_schmidt_vector(lam)
    levels, _ = sv.distinct()
    k = sv.rank - 1
    x = k * levels
    n = hankel_size(N)
    V = np.vander(x, n, increasing=True)
    w = x if N % 2 else x * (k - x)
    return V.T @ (w[:, None] * V)


def pure_detect_bounds(lam, d_B: int, N: int) -> Guarantee:
    sv = as_schmidt_vector(lam)
    r = sv.rank
    levels, _ = sv.distinct()
    rt = levels.size
    if r < 2:
        return Guarantee.INDETERMINATE
    if N >= 4 * rt - 1:
        return Guarantee.DETECT
    if N <= 2 * rt:
        smin = float(np.linalg.eigvalsh(a0_matrix(sv, N))[0])
        if smin > 0 and d_B > 1 + r * rt * theta_k(sv, r - 1) / smin:
            return Guarantee.NONDETECT
    return Guarantee.INDETERMINATE
