"""Correlation-matrix criterion and its Hölder-moment variant."""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .core import BipartiteDensity, CriterionVerdict, _readonly

CM_TOL = 1e-9


@functools.lru_cache(maxsize=None)
def _gellmann(d: int) -> np.ndarray:
    ops = []
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = m[k, j] = 1.0
            ops.append(m)
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = -1j
            m[k, j] = 1j
            ops.append(m)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        ops.append(np.diag(diag * np.sqrt(2.0 / (l * (l + 1)))).astype(complex))
    out = np.array(ops) * np.sqrt(d / 2.0)
    out.flags.writeable = False
    return out


def gellmann_basis(d: int) -> np.ndarray:
    """``d^2 - 1`` traceless Hermitian matrices with ``Tr(P_i P_j) = d delta_ij``.

    Generalized Gell-Mann matrices rescaled by ``sqrt(d/2)``; for ``d = 2``
    these are X, Y, Z in the order (X, Y, Z).
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    return _gellmann(d)


@dataclass
class CorrelationMatrix:
    T: np.ndarray
    _sv: np.ndarray | None = field(default=None, repr=False)

    @property
    def singular_values(self) -> np.ndarray:
        if self._sv is None:
            self._sv = _readonly(np.linalg.svd(self.T, compute_uv=False))
        return self._sv

    def schatten(self, p: float) -> float:
        return schatten_norm(self, p)


def correlation_matrix(rho: BipartiteDensity, basis: np.ndarray | None = None) -> CorrelationMatrix:
    """``T_ij = Tr[rho (P_i (x) P_j)] / d``."""
    if rho.d_A != rho.d_B:
        raise ValueError("correlation matrix needs equal local dimensions")
    d = rho.d_A
    P = gellmann_basis(d) if basis is None else basis
    t = rho.tensor()
    T = np.einsum("xca,ydb,abcd->xy", P, P, t, optimize=True).real / d
    return CorrelationMatrix(T)


def schatten_norm(T: CorrelationMatrix, p: float) -> float:
    sv = T.singular_values
    if p == np.inf:
        return float(sv.max(initial=0.0))
    return float(np.sum(sv**p) ** (1.0 / p))


def cm_bound(k: int, d: int) -> float:
    return k - 1.0 / d


def cm_criterion(rho: BipartiteDensity, k: int, tol: float = CM_TOL) -> CriterionVerdict:
    """Detects ``SN > k`` when ``||T||_1 > k - 1/d``."""
    n1 = schatten_norm(correlation_matrix(rho), 1)
    margin = cm_bound(k, rho.d_A) - n1
    return CriterionVerdict(bool(margin < -tol), k, margin, "cm")


def holder_ratio(norm2sq: float, norm4quad: float) -> float:
    """``||T||_2^3 / ||T||_4^2``, a lower bound on ``||T||_1``; 0/0 is 0."""
    if norm4quad <= 0:
        return 0.0
    return float(norm2sq**1.5 / np.sqrt(norm4quad))


def cm_holder_criterion(norm2sq: float, norm4quad: float, k: int, d: int, tol: float = CM_TOL) -> CriterionVerdict:
    if norm2sq < 0 or norm4quad < 0:
        raise ValueError("norms must be nonnegative")
    margin = cm_bound(k, d) - holder_ratio(norm2sq, norm4quad)
    return CriterionVerdict(bool(margin < -tol), k, margin, "cm-holder")


def cm_holder_for_state(rho: BipartiteDensity, k: int, tol: float = CM_TOL) -> CriterionVerdict:
    T = correlation_matrix(rho)
    return cm_holder_criterion(T.schatten(2) ** 2, T.schatten(4) ** 4, k, rho.d_A, tol)


def isotropic_cm_values(d: int, F: float) -> tuple[float, float, float]:
    """``(||T||_1, ||T||_2^2, ||T||_4^4)`` of the isotropic state with fidelity ``F``.

    Valid for ``F >= 1/d^2`` where all singular values equal
    ``(d^2 F - 1) / (d (d^2 - 1))``; below that the singular values are the
    absolute value of this expression.
    """
    if not 0.0 <= F <= 1.0:
        raise ValueError("F must lie in [0, 1]")
    x = d * d * F - 1
    n1 = abs(d * F - 1.0 / d)
    n2 = x**2 / (d**2 * (d**2 - 1))
    n4 = x**4 / (d**4 * (d**2 - 1) ** 3)
    return n1, n2, n4
