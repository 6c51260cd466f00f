"""Classical-shadow estimation of purity-type moments and the permutation test.

Shadows are handled as stacks ``X`` of shape ``(M, D, D)``. All U-statistics
are evaluated through sums over the stack (``S = sum_i X_i``) so the full
pair and triple statistics cost ``O(M D^3)`` instead of ``O(M^2)`` or
``O(M^3)`` trace evaluations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np

from .core import BipartiteDensity, partial_trace
from .ensembles import haar_unitaries

Aggregation = Literal["mean", "median-of-means"]


@dataclass(frozen=True)
class ShadowSample:
    unitary: np.ndarray
    outcome: int

    def expand(self) -> np.ndarray:
        return expand_shadow(self, self.unitary.shape[0])


@dataclass(frozen=True)
class ShadowEstimate:
    value: float
    std_error: float
    M: int
    L: Optional[int] = None


@dataclass(frozen=True)
class MomentTuple:
    p2: float
    p3: float
    a2: float
    a3: float
    t2: float

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.p2, self.p3, self.a2, self.a3, self.t2)


def exact_moment_tuple(rho: BipartiteDensity) -> MomentTuple:
    r = rho.rho
    r2 = r @ r
    rA = partial_trace(rho, "B")
    rA2 = rA @ rA
    tr_b_r2 = np.einsum("abcb->ac", r2.reshape(rho.d_A, rho.d_B, rho.d_A, rho.d_B))
    return MomentTuple(
        p2=float(np.trace(r2).real),
        p3=float(np.trace(r2 @ r).real),
        a2=float(np.trace(rA2).real),
        a3=float(np.trace(rA2 @ rA).real),
        t2=float(np.trace(rA @ tr_b_r2).real),
    )


# ---------------------------------------------------------------------------
# sampling


def sample_shadow(rho: np.ndarray, rng: np.random.Generator, unitary: Optional[np.ndarray] = None) -> ShadowSample:
    """Rotate by a Haar unitary (or the one given) and draw a Born outcome."""
    rho = _as_matrix(rho)
    D = rho.shape[0]
    U = haar_unitaries(D, 1, rng)[0] if unitary is None else unitary
    probs = np.clip(np.einsum("bi,ij,bj->b", U, rho, U.conj()).real, 0.0, None)
    b = int(rng.choice(D, p=probs / probs.sum()))
    return ShadowSample(U, b)


def expand_shadow(s: ShadowSample, D: int) -> np.ndarray:
    """``(D + 1) U^dag |b><b| U - I``."""
    u = s.unitary[s.outcome].conj()
    return (D + 1) * np.outer(u, u.conj()) - np.eye(D)


def sample_shadows(rho: np.ndarray, M: int, rng: np.random.Generator) -> np.ndarray:
    """Stack of ``M`` reconstructed shadows, shape ``(M, D, D)``."""
    rho = _as_matrix(rho)
    D = rho.shape[0]
    U = haar_unitaries(D, M, rng)
    probs = np.einsum("mbi,ij,mbj->mb", U, rho, U.conj(), optimize=True).real
    probs = np.clip(probs, 0.0, None)
    cdf = np.cumsum(probs, axis=1)
    cdf /= cdf[:, -1:]
    b = (rng.random((M, 1)) > cdf).sum(axis=1)
    b = np.minimum(b, D - 1)
    u = U[np.arange(M), b].conj()
    X = (D + 1) * np.einsum("mi,mj->mij", u, u.conj())
    X[:, np.arange(D), np.arange(D)] -= 1.0
    return X


def _as_matrix(rho) -> np.ndarray:
    return rho.rho if isinstance(rho, BipartiteDensity) else np.asarray(rho)


# ---------------------------------------------------------------------------
# estimators


def _tr(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """``Tr(A B)``; either argument may be a stack."""
    return np.einsum("...ij,...ji->...", A, B).real


def _jackknife_se(loo: np.ndarray) -> float:
    n = loo.size
    return float(np.sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2)))


def _p2_parts(X: np.ndarray):
    M = X.shape[0]
    S = X.sum(axis=0)
    diag = _tr(X, X)
    total = _tr(S, S) - diag.sum()
    value = total / (M * (M - 1))
    # leave-one-out: remove every pair that touches i
    loo = (total - 2 * (_tr(X, S) - diag)) / ((M - 1) * (M - 2)) if M > 2 else None
    return value, loo


def estimate_p2(shadows: np.ndarray, aggregation: Aggregation = "mean", groups: int = 10) -> ShadowEstimate:
    """Pair U-statistic for ``Tr rho^2``."""
    X = np.asarray(shadows)
    M = X.shape[0]
    if M < 2:
        raise ValueError("need at least 2 shadows")
    if aggregation == "median-of-means":
        return _median_of_means(X, lambda Y: _p2_parts(Y)[0], groups)
    value, loo = _p2_parts(X)
    se = _jackknife_se(loo) if loo is not None else float("nan")
    return ShadowEstimate(float(value), se, M)


def _triple_sum_all(X: np.ndarray):
    """Sum of ``Re Tr(X_i X_j X_k)`` over ordered distinct triples, and its leave-one-out values."""
    S = X.sum(axis=0)
    X2 = X @ X
    W = X2.sum(axis=0)
    S2 = S @ S
    trS3 = _tr(S2, S)
    A = _tr(W, S)
    C = _tr(X2, X).sum()
    total = trS3 - 3 * A + 2 * C
    # leave-one-out pieces, each a vector over i
    tX3 = _tr(X2, X)
    trS3_i = trS3 - 3 * _tr(S2, X) + 3 * _tr(S, X2) - tX3
    A_i = A - _tr(X2, S) - _tr(W, X) + tX3
    C_i = C - tX3
    loo = trS3_i - 3 * A_i + 2 * C_i
    return total, loo


def _p3_subsampled(X: np.ndarray, budget: int, rng: np.random.Generator) -> tuple[float, float]:
    M = X.shape[0]
    n_all = M * (M - 1) * (M - 2)
    n = min(budget, n_all)
    picks = set()
    while len(picks) < n:
        ijk = rng.integers(0, M, size=(2 * (n - len(picks)) + 8, 3))
        for i, j, k in ijk:
            if i != j and j != k and i != k:
                picks.add((int(i), int(j), int(k)))
                if len(picks) == n:
                    break
    idx = np.array(sorted(picks))
    vals = _tr(X[idx[:, 0]] @ X[idx[:, 1]], X[idx[:, 2]])
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n))


def estimate_p3(
    shadows: np.ndarray,
    triple_budget: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    aggregation: Aggregation = "mean",
    groups: int = 10,
) -> ShadowEstimate:
    """Symmetrized triple U-statistic for ``Tr rho^3``.

    With ``triple_budget=None`` every ordered distinct triple is used (exact
    U-statistic, evaluated in closed form). With an integer budget smaller
    than ``M (M-1) (M-2)``, that many distinct ordered triples are drawn
    uniformly without replacement.
    """
    X = np.asarray(shadows)
    M = X.shape[0]
    if M < 3:
        raise ValueError("need at least 3 shadows")
    if triple_budget is not None and M * (M - 1) * (M - 2) > triple_budget:
        value, se = _p3_subsampled(X, triple_budget, rng or np.random.default_rng())
        return ShadowEstimate(value, se, M)
    if aggregation == "median-of-means":
        return _median_of_means(X, lambda Y: _triple_sum_all(Y)[0] / (Y.shape[0] * (Y.shape[0] - 1) * (Y.shape[0] - 2)), groups)
    total, loo = _triple_sum_all(X)
    value = total / (M * (M - 1) * (M - 2))
    se = _jackknife_se(loo / ((M - 1) * (M - 2) * (M - 3))) if M > 3 else float("nan")
    return ShadowEstimate(float(value), se, M)


def estimate_t2(shadows_AB: np.ndarray, shadows_A: np.ndarray, d_A: int, d_B: int) -> ShadowEstimate:
    """Estimator of ``Tr_A[rho_A Tr_B(rho^2)]`` from global and local shadows."""
    X = np.asarray(shadows_AB)
    Y = np.asarray(shadows_A)
    M, L = X.shape[0], Y.shape[0]
    if M < 2 or L < 1:
        raise ValueError("need at least 2 global and 1 local shadow")
    S = X.sum(axis=0)
    W = (X @ X).sum(axis=0)
    pair = S @ S - W  # sum over i != j of X_i X_j
    SA = Y.sum(axis=0)
    pair_B = _trace_B(pair, d_A, d_B)
    value = _tr(SA, pair_B) / (L * M * (M - 1))

    se2 = 0.0
    if L > 1:
        loo_A = (_tr(SA, pair_B) - _tr(Y, pair_B)) / ((L - 1) * M * (M - 1))
        se2 += _jackknife_se(loo_A) ** 2
    if M > 2:
        # remove shadow i: pair loses X_i (S - X_i) + (S - X_i) X_i
        SAI = np.kron(SA, np.eye(d_B))
        XS = _tr(SAI @ X, S) + _tr(SAI @ S, X) - 2 * _tr(SAI @ X, X)
        loo_M = (_tr(SAI, pair) - XS) / (L * (M - 1) * (M - 2))
        se2 += _jackknife_se(loo_M) ** 2
    return ShadowEstimate(float(value), math.sqrt(se2), M, L)


def _trace_B(X: np.ndarray, d_A: int, d_B: int) -> np.ndarray:
    return np.einsum("abcb->ac", X.reshape(d_A, d_B, d_A, d_B))


def _median_of_means(X: np.ndarray, stat, groups: int) -> ShadowEstimate:
    chunks = np.array_split(X, groups)
    vals = np.array([stat(c) for c in chunks])
    return ShadowEstimate(float(np.median(vals)), float(vals.std(ddof=1) / math.sqrt(groups)), X.shape[0])


def p2_variance_bound(p2: float, p3: float, D: int, M: int) -> float:
    if M < 2:
        raise ValueError("M must be at least 2")
    mm = M * (M - 1)
    return 4 * (M - 2) / mm * (p2 + 2 * p3) + 2 / mm * ((D + 1) ** 2 + 2 * D * p2)


@dataclass(frozen=True)
class MomentTupleEstimate:
    value: MomentTuple
    std_error: MomentTuple


def estimate_moment_tuple(
    rho: BipartiteDensity,
    M: int,
    L: int,
    rng: np.random.Generator,
    triple_budget: Optional[int] = None,
) -> MomentTupleEstimate:
    """Shadows of ``rho`` give ``p2, p3, t2``; shadows of ``rho_A`` give ``a2, a3``."""
    X = sample_shadows(rho.rho, M, rng)
    Y = sample_shadows(partial_trace(rho, "B"), L, rng)
    return moment_tuple_from_shadows(X, Y, rho.d_A, rho.d_B, triple_budget, rng)


def moment_tuple_from_shadows(X, Y, d_A: int, d_B: int, triple_budget=None, rng=None) -> MomentTupleEstimate:
    ests = [
        estimate_p2(X),
        estimate_p3(X, triple_budget, rng),
        estimate_p2(Y),
        estimate_p3(Y, triple_budget, rng),
        estimate_t2(X, Y, d_A, d_B),
    ]
    return MomentTupleEstimate(
        MomentTuple(*(e.value for e in ests)),
        MomentTuple(*(e.std_error for e in ests)),
    )


# ---------------------------------------------------------------------------
# permutation test


def ordered_trace(states: Sequence) -> complex:
    """``Tr(rho_1 rho_2 ... rho_N)``."""
    mats = [_as_matrix(s) for s in states]
    D = mats[0].shape[0]
    if any(m.shape != (D, D) for m in mats):
        raise ValueError("all states must have the same dimension")
    prod = mats[0]
    for m in mats[1:]:
        prod = prod @ m
    return complex(np.trace(prod))


def permutation_test_estimate(states: Sequence, shots: int, rng: np.random.Generator) -> ShadowEstimate:
    """Simulated cyclic-permutation test; returns the estimate of ``P+ - P-``.

    The outcome "+" occurs with probability ``(1 + Re Tr(rho_1...rho_N)) / 2``.
    """
    if shots < 1:
        raise ValueError("shots must be positive")
    if len(states) < 2:
        raise ValueError("need at least two states")
    tr = ordered_trace(states).real
    p_plus = min(1.0, max(0.0, 0.5 + 0.5 * tr))
    hits = rng.binomial(shots, p_plus)
    ph = hits / shots
    return ShadowEstimate(2 * ph - 1, 2 * math.sqrt(ph * (1 - ph) / shots), shots)


def shots_for_accuracy(trace_value: float, target: float, z: float = 1.0) -> int:
    """Shots so that ``z`` binomial standard errors stay below ``target``.

    Depends only on the trace value; at most ``ceil(z^2 / target^2)``.
    """
    p = min(1.0, max(0.0, 0.5 + 0.5 * trace_value))
    return max(1, int(math.ceil(4 * z * z * p * (1 - p) / target**2)))
