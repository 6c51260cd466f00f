"""Dense linear algebra and bipartite state containers.

Index convention: the composite basis index of ``|i>_A (x) |j>_B`` is
``i * d_B + j``. Every module in the package relies on this ordering.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

RANK_TOL = 1e-10
PSD_TOL = 1e-9
HERMITIAN_TOL = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


def is_hermitian(M: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return False
    scale = max(1.0, float(np.max(np.abs(M))) if M.size else 1.0)
    return bool(np.max(np.abs(M - M.conj().T), initial=0.0) <= tol * scale)


def hermitian_spectrum(M: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix, sorted nondecreasing.

    Raises ``ValueError`` if ``M`` is not Hermitian within ``tol`` (relative
    to its largest entry).
    """
    M = np.asarray(M)
    if not is_hermitian(M, tol):
        raise ValueError("matrix is not Hermitian")
    return np.linalg.eigvalsh(M)


def psd_threshold(M: np.ndarray, tol: float = PSD_TOL) -> float:
    """Smallest eigenvalue still counted as nonnegative by :func:`is_psd`."""
    norm_inf = float(np.max(np.sum(np.abs(M), axis=1))) if np.size(M) else 0.0
    return -tol * max(1.0, norm_inf)


def is_psd(M: np.ndarray, tol: float = PSD_TOL) -> bool:
    M = np.asarray(M)
    return bool(hermitian_spectrum(M)[0] >= psd_threshold(M, tol))


@dataclass(frozen=True)
class CriterionVerdict:
    """Outcome of a Schmidt-number test.

    ``detected`` means the test certified ``SN(rho) > k`` (for the map index
    ``k``). ``min_eig`` is the smallest eigenvalue of whatever operator the
    test inspected (the k-reduced operator, a Hankel matrix, or a scalar
    margin for the correlation-matrix tests).
    """

    detected: bool
    k: int
    min_eig: float
    criterion: str
    order_used: Optional[int] = None


@dataclass(frozen=True)
class SchmidtVector:
    """Nonincreasing probability vector (Schmidt coefficients)."""

    lam: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float).ravel()
        if lam.size == 0:
            raise ValueError("empty Schmidt vector")
        if np.any(lam < -1e-14):
            raise ValueError("Schmidt coefficients must be nonnegative")
        if abs(lam.sum() - 1.0) > 1e-12:
            raise ValueError(f"Schmidt coefficients sum to {lam.sum()!r}, not 1")
        lam = np.sort(np.clip(lam, 0.0, None))[::-1]
        object.__setattr__(self, "lam", _readonly(lam))

    def __len__(self) -> int:
        return self.lam.size

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(self.lam > RANK_TOL))

    def nonzero(self) -> np.ndarray:
        return self.lam[self.lam > RANK_TOL]

    def distinct(self, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
        """Distinct nonzero coefficients (decreasing) and their multiplicities."""
        vals = self.nonzero()
        levels: list[float] = []
        mult: list[int] = []
        for v in vals:
            if levels and abs(levels[-1] - v) <= tol:
                mult[-1] += 1
            else:
                levels.append(float(v))
                mult.append(1)
        return np.array(levels), np.array(mult, dtype=int)

    def padded(self, d: int) -> "SchmidtVector":
        if d < self.lam.size and np.any(self.lam[d:] > 0):
            raise ValueError("cannot truncate nonzero coefficients")
        out = np.zeros(d)
        n = min(d, self.lam.size)
        out[:n] = self.lam[:n]
        return SchmidtVector(out)


def as_schmidt_vector(lam) -> SchmidtVector:
    return lam if isinstance(lam, SchmidtVector) else SchmidtVector(np.asarray(lam, dtype=float))


@dataclass(frozen=True)
class PureState:
    amplitudes: np.ndarray
    d_A: int
    d_B: int

    def __post_init__(self):
        psi = np.asarray(self.amplitudes, dtype=complex).ravel()
        if psi.size != self.d_A * self.d_B:
            raise ValueError(
                f"amplitude length {psi.size} does not match d_A*d_B = {self.d_A * self.d_B}"
            )
        if abs(np.linalg.norm(psi) - 1.0) > 1e-12:
            raise ValueError("state is not normalized")
        object.__setattr__(self, "amplitudes", _readonly(psi))

    @property
    def D(self) -> int:
        return self.d_A * self.d_B

    def matrix(self) -> np.ndarray:
        """Amplitudes reshaped to the ``d_A x d_B`` coefficient matrix."""
        return self.amplitudes.reshape(self.d_A, self.d_B)

    def density(self) -> "BipartiteDensity":
        psi = self.amplitudes
        return BipartiteDensity(np.outer(psi, psi.conj()), self.d_A, self.d_B)


@dataclass(frozen=True)
class BipartiteDensity:
    rho: np.ndarray
    d_A: int
    d_B: int
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        D = self.d_A * self.d_B
        if rho.shape != (D, D):
            raise ValueError(f"density matrix has shape {rho.shape}, expected {(D, D)}")
        if self.validate:
            if not is_hermitian(rho):
                raise ValueError("density matrix is not Hermitian")
            tr = np.trace(rho).real
            if abs(tr - 1.0) > 1e-12 * max(1, D):
                raise ValueError(f"density matrix has trace {tr!r}")
            if np.linalg.eigvalsh(rho)[0] < -1e-10:
                raise ValueError("density matrix is not positive semidefinite")
        object.__setattr__(self, "rho", _readonly(rho))

    @property
    def D(self) -> int:
        return self.d_A * self.d_B

    def tensor(self) -> np.ndarray:
        """View with axes ``(a, b, a', b')``."""
        return self.rho.reshape(self.d_A, self.d_B, self.d_A, self.d_B)


def partial_trace(rho: BipartiteDensity, side: Literal["A", "B"] = "B") -> np.ndarray:
    """Trace out one party.

    ``side="B"`` traces out B and returns ``rho_A``; ``side="A"`` returns ``rho_B``.
    """
    t = rho.tensor()
    if side == "B":
        return np.einsum("abcb->ac", t)
    if side == "A":
        return np.einsum("abad->bd", t)
    raise ValueError(f"side must be 'A' or 'B', got {side!r}")


def schmidt_decompose(psi: PureState) -> tuple[SchmidtVector, np.ndarray, np.ndarray]:
    """Schmidt coefficients and local bases of a pure state.

    Returns ``(lam, UA, UB)`` with ``psi = sum_i sqrt(lam_i) UA[:, i] (x) UB[:, i]``.
    The coefficients come from the eigendecomposition of ``rho_A``; the B-side
    vectors are recovered by projecting the state onto each A-side vector.
    """
    C = psi.matrix()
    rho_A = C @ C.conj().T
    evals, evecs = np.linalg.eigh(rho_A)
    order = np.argsort(evals)[::-1]
    evals = np.clip(evals[order], 0.0, None)
    UA = evecs[:, order]
    d = min(psi.d_A, psi.d_B)

    # <a_i| (x) I applied to psi gives sqrt(lam_i) |b_i>
    proj = UA.conj().T @ C
    UB_cols = []
    for i in range(d):
        norm = np.linalg.norm(proj[i])
        if evals[i] > RANK_TOL and norm > 0:
            UB_cols.append(proj[i] / norm)
    UB = _complete_basis(np.array(UB_cols).T if UB_cols else np.zeros((psi.d_B, 0)), psi.d_B)

    lam = evals[:d]
    lam = lam / lam.sum()
    return SchmidtVector(lam), UA, UB


def _complete_basis(cols: np.ndarray, dim: int) -> np.ndarray:
    """Extend orthonormal columns to a unitary ``dim x dim`` matrix."""
    n = cols.shape[1]
    if n == dim:
        return cols
    rand = np.eye(dim, dtype=complex)
    full = np.concatenate([cols, rand], axis=1)
    q, _ = np.linalg.qr(full)
    q = q[:, :dim]
    # qr may flip phases of the leading columns; restore the originals
    q[:, :n] = cols
    return q


def schmidt_number_pure(psi: PureState, tol: float = RANK_TOL) -> int:
    lam, _, _ = schmidt_decompose(psi)
    return int(np.count_nonzero(lam.lam > tol))


def schmidt_coefficients_svd(psi: PureState) -> np.ndarray:
    """Squared singular values of the coefficient matrix (independent path)."""
    s = np.linalg.svd(psi.matrix(), compute_uv=False)
    return np.sort(s**2)[::-1]


def maximally_entangled(r: int, d_A: int, d_B: int) -> PureState:
    if not 1 <= r <= min(d_A, d_B):
        raise ValueError(f"r={r} out of range for d_A={d_A}, d_B={d_B}")
    psi = np.zeros(d_A * d_B, dtype=complex)
    for i in range(r):
        psi[i * d_B + i] = 1.0 / np.sqrt(r)
    return PureState(psi, d_A, d_B)


def schmidt_diagonal_state(lam, d_A: int, d_B: int) -> PureState:
    """``sum_i sqrt(lam_i) |i>|i>`` for a given coefficient vector."""
    lam = as_schmidt_vector(lam).padded(min(d_A, d_B)).lam
    psi = np.zeros(d_A * d_B, dtype=complex)
    for i, l in enumerate(lam):
        psi[i * d_B + i] = np.sqrt(l)
    psi /= np.linalg.norm(psi)
    return PureState(psi, d_A, d_B)


def maximally_mixed(d_A: int, d_B: int) -> BipartiteDensity:
    D = d_A * d_B
    return BipartiteDensity(np.eye(D) / D, d_A, d_B)


def product_density(sigma: np.ndarray, tau: np.ndarray) -> BipartiteDensity:
    return BipartiteDensity(np.kron(sigma, tau), sigma.shape[0], tau.shape[0])


def local_unitary(rho: BipartiteDensity, UA: np.ndarray, UB: np.ndarray) -> BipartiteDensity:
    U = np.kron(UA, UB)
    out = U @ rho.rho @ U.conj().T
    return BipartiteDensity((out + out.conj().T) / 2, rho.d_A, rho.d_B)
