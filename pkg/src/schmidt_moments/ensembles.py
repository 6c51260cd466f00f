"""Seeded generators for the benchmark state ensembles."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Literal, Optional

import numpy as np

from .core import (
    BipartiteDensity,
    PureState,
    SchmidtVector,
    maximally_entangled,
    schmidt_diagonal_state,
)

Kind = Literal["fixed-sn-pure", "haar-depolarized", "induced", "isotropic", "me-depolarized"]
KINDS = ("fixed-sn-pure", "haar-depolarized", "induced", "isotropic", "me-depolarized")


def stream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for sample ``index``; same inputs give the same stream."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary from the QR decomposition of a complex Ginibre matrix."""
    if dim < 1:
        raise ValueError("dim must be positive")
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph


def haar_unitaries(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Stack of ``count`` independent Haar unitaries, shape ``(count, dim, dim)``."""
    z = (rng.standard_normal((count, dim, dim)) + 1j * rng.standard_normal((count, dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=1, axis2=2)
    return q * (diag / np.abs(diag))[:, None, :]


def haar_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def dirichlet_simplex(r: int, rng: np.random.Generator, d: Optional[int] = None) -> SchmidtVector:
    """Flat Dirichlet sample of length ``r``, sorted and zero-padded to ``d``."""
    if r < 1:
        raise ValueError("r must be positive")
    e = rng.exponential(size=r)
    lam = np.zeros(d or r)
    lam[:r] = np.sort(e / e.sum())[::-1]
    return SchmidtVector(lam / lam.sum())


def fixed_sn_pure(r: int, d_A: int, d_B: int, rng: np.random.Generator) -> PureState:
    if not 1 <= r <= d_A <= d_B:
        raise ValueError("need 1 <= r <= d_A <= d_B")
    return schmidt_diagonal_state(dirichlet_simplex(r, rng, d_A), d_A, d_B)


def _mix_with_identity(pure: np.ndarray, eps: float, d_A: int, d_B: int) -> BipartiteDensity:
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    D = d_A * d_B
    rho = (1 - eps) * np.outer(pure, pure.conj()) + eps * np.eye(D) / D
    return BipartiteDensity((rho + rho.conj().T) / 2, d_A, d_B)


def haar_depolarized(d: int, eps: float, rng: np.random.Generator) -> BipartiteDensity:
    """``(1 - eps) U|0><0|U^dag + eps I / d^2`` with ``U`` Haar on ``d^2``."""
    psi = haar_unitary(d * d, rng)[:, 0]
    return _mix_with_identity(psi, eps, d, d)


def induced_mixed(d_A: int, d_B: int, K: int, rng: np.random.Generator) -> BipartiteDensity:
    """Reduced state of a Haar pure state on ``(d_A d_B) x K``."""
    if K < 1:
        raise ValueError("K must be positive")
    D = d_A * d_B
    G = haar_state(D * K, rng).reshape(D, K)
    rho = G @ G.conj().T
    rho = (rho + rho.conj().T) / 2
    return BipartiteDensity(rho / np.trace(rho).real, d_A, d_B)


def isotropic_state(d: int, F: float) -> BipartiteDensity:
    if not 0.0 <= F <= 1.0:
        raise ValueError("F must lie in [0, 1]")
    D = d * d
    phi = maximally_entangled(d, d, d).amplitudes
    rho = (1 - F) / (D - 1) * np.eye(D) + (D * F - 1) / (D - 1) * np.outer(phi, phi.conj())
    return BipartiteDensity((rho + rho.conj().T) / 2, d, d)


def isotropic_schmidt_number(d: int, F: float) -> int:
    """``ceil(d F)``, clipped below at 1."""
    return max(1, int(math.ceil(d * F - 1e-12)))


def me_depolarized(r: int, d_A: int, d_B: int, eps: float) -> BipartiteDensity:
    if not 1 <= r <= d_A <= d_B:
        raise ValueError("need 1 <= r <= d_A <= d_B")
    return _mix_with_identity(maximally_entangled(r, d_A, d_B).amplitudes, eps, d_A, d_B)


@dataclass(frozen=True)
class EnsembleSpec:
    kind: Kind
    d_A: int
    d_B: int
    r: Optional[int] = None
    eps: Optional[float] = None
    K: Optional[int] = None
    F: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        need = {
            "fixed-sn-pure": ("r",),
            "haar-depolarized": ("eps",),
            "induced": ("K",),
            "isotropic": ("F",),
            "me-depolarized": ("r", "eps"),
        }[self.kind]
        for name in need:
            if getattr(self, name) is None:
                raise ValueError(f"{self.kind} needs parameter {name!r}")
        if self.kind in ("haar-depolarized", "isotropic") and self.d_A != self.d_B:
            raise ValueError(f"{self.kind} needs d_A == d_B")

    @classmethod
    def from_dict(cls, data: dict) -> "EnsembleSpec":
        return cls(**data)

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

    @property
    def is_pure(self) -> bool:
        return self.kind == "fixed-sn-pure" or (self.kind == "induced" and self.K == 1)

    def sample(self, seed: int, index: int) -> BipartiteDensity:
        rng = stream(seed, index)
        if self.kind == "fixed-sn-pure":
            return fixed_sn_pure(self.r, self.d_A, self.d_B, rng).density()
        if self.kind == "haar-depolarized":
            return haar_depolarized(self.d_A, self.eps, rng)
        if self.kind == "induced":
            return induced_mixed(self.d_A, self.d_B, self.K, rng)
        if self.kind == "isotropic":
            return isotropic_state(self.d_A, self.F)
        return me_depolarized(self.r, self.d_A, self.d_B, self.eps)

    def sample_schmidt(self, seed: int, index: int) -> SchmidtVector:
        """Schmidt vector of a fixed-SN pure sample without building the state."""
        if self.kind != "fixed-sn-pure":
            raise ValueError("only fixed-sn-pure samples have a Schmidt vector")
        return dirichlet_simplex(self.r, stream(seed, index), self.d_A)
