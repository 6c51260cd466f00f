"""Experiment drivers shared by the CLI and the acceptance suite."""

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .core import PSD_TOL, BipartiteDensity, SchmidtVector, schmidt_diagonal_state
from .correlation import cm_holder_criterion, correlation_matrix, isotropic_cm_values
from .ensembles import EnsembleSpec, isotropic_schmidt_number, isotropic_state, me_depolarized, stream
from .moments import (
    MomentSequence,
    best_lower_bound,
    certify_from_moments,
    certify_sn_ge,
    moment_criterion,
    moment_criterion_hp,
    moments_from_spectrum,
    moments_from_spectrum_hp,
    pure_reduction_moments,
    third_order_criterion,
)
from .reduction import (
    depolarized_negativity,
    k_reduced_operator,
    noise_threshold_rm,
    pure_reduced_spectrum,
    reduction_negativity,
)
from .shadows import estimate_moment_tuple, exact_moment_tuple, p2_variance_bound

CRITERION_RE = re.compile(r"^(reduction|cm|cm-holder|third-order|moment:(\d+)|moment-upto:(\d+))$")
MOMENT_KINDS = ("moment", "moment-upto", "third-order")


def parse_criterion(name: str) -> tuple[str, Optional[int]]:
    """Split a criterion id into its kind and order (``None`` when orderless)."""
    m = CRITERION_RE.match(name)
    if not m:
        raise ValueError(
            f"unknown criterion {name!r}; expected reduction, cm, cm-holder, "
            "third-order, moment:N or moment-upto:N"
        )
    if m.group(2) or m.group(3):
        N = int(m.group(2) or m.group(3))
        if N < 3:
            raise ValueError(f"criterion {name!r}: order must be at least 3")
        return ("moment" if m.group(2) else "moment-upto"), N
    return name, None


# ---------------------------------------------------------------------------
# detection ratios


@dataclass(frozen=True)
class DetectionRatioRow:
    ensemble: str
    d_A: int
    d_B: int
    params: str
    k: int
    criterion: str
    detected: int
    samples: int
    ratio: float
    seed: int
    false_positives: int


@dataclass(frozen=True)
class SampleVerdicts:
    detected: dict  # (criterion, k) -> bool
    false_positive: dict  # (criterion, k) -> bool


def evaluate_sample(
    spec: EnsembleSpec,
    seed: int,
    index: int,
    criteria: Sequence[str],
    ks: Sequence[int],
    slack: float = 0.0,
) -> SampleVerdicts:
    """Every requested (criterion, k) verdict for one ensemble sample.

    The exact reduction spectrum is always computed, so each moment-type
    detection is audited against it; a detection the reduction criterion
    does not share is flagged as a false positive.
    """
    parsed = [(c, *parse_criterion(c)) for c in criteria]
    pure_path = spec.kind == "fixed-sn-pure"
    need_dense = not pure_path or any(kind in ("cm", "cm-holder", "third-order") for _, kind, _ in parsed)
    lam = spec.sample_schmidt(seed, index) if pure_path else None
    rho = spec.sample(seed, index) if need_dense else None
    N_top = max([N for _, _, N in parsed if N] + [3])

    detected: dict = {}
    false_pos: dict = {}
    T = None
    mt = None
    for k in ks:
        if lam is not None:
            rspec = pure_reduced_spectrum(lam, k, spec.d_B)
        else:
            rspec = k_reduced_operator(rho, k).spectrum()
        red_hit = bool(rspec[0] < -PSD_TOL * max(1.0, float(np.max(np.abs(rspec)))))
        Q: Optional[MomentSequence] = None
        for name, kind, N in parsed:
            if kind == "reduction":
                hit = red_hit
            elif kind in ("moment", "moment-upto"):
                if Q is None:
                    Q = pure_reduction_moments(lam, k, spec.d_B, N_top) if lam is not None else moments_from_spectrum(rspec, k, N_top)
                v = moment_criterion(Q, N, slack=slack) if kind == "moment" else certify_from_moments(Q, N, slack=slack)
                hit = v.detected
            elif kind == "third-order":
                mt = mt or exact_moment_tuple(rho)
                hit = third_order_criterion(*mt.as_tuple(), spec.d_B, k, slack=slack).detected
            else:
                T = T or correlation_matrix(rho)
                if kind == "cm":
                    hit = bool(T.schatten(1) > k - 1.0 / spec.d_A + 1e-9)
                else:
                    hit = cm_holder_criterion(T.schatten(2) ** 2, T.schatten(4) ** 4, k, spec.d_A).detected
            detected[(name, k)] = hit
            false_pos[(name, k)] = kind in MOMENT_KINDS and hit and not red_hit
    return SampleVerdicts(detected, false_pos)


def _params_label(spec: EnsembleSpec) -> str:
    d = spec.to_dict()
    return ";".join(f"{key}={d[key]}" for key in ("r", "eps", "K", "F") if key in d)


def map_samples(fn, samples: int, threads: int = 1) -> list:
    """``[fn(0), ..., fn(samples - 1)]``, optionally on a thread pool; order is kept."""
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, range(samples)))
    return [fn(i) for i in range(samples)]


def detection_ratio(
    spec: EnsembleSpec,
    criteria: Sequence[str],
    ks: Sequence[int],
    samples: int,
    seed: int,
    threads: int = 1,
    slack: float = 0.0,
) -> list[DetectionRatioRow]:
    """Fraction of ``samples`` ensemble members each criterion detects at each ``k``.

    ``k`` is the map index, so a detection certifies ``SN > k``.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    for c in criteria:
        parse_criterion(c)
    results = map_samples(lambda i: evaluate_sample(spec, seed, i, criteria, ks, slack), samples, threads)
    label = _params_label(spec)
    rows = []
    for k in ks:
        for c in criteria:
            hits = sum(r.detected[(c, k)] for r in results)
            fps = sum(r.false_positive[(c, k)] for r in results)
            rows.append(DetectionRatioRow(spec.kind, spec.d_A, spec.d_B, label, k, c, hits, samples, hits / samples, seed, fps))
    return rows


# ---------------------------------------------------------------------------
# two-qutrit triangle


@dataclass(frozen=True)
class TriangleCell:
    x1: float
    x2: float
    x3: float
    N: int
    detected: bool
    min_eig: float
    distinct: int
    reduction_detected: bool


def triangle_grid(grid_n: int) -> list[tuple[float, float, float]]:
    """Cell centres ``((i + 1/2)/n, (j + 1/2)/n)`` strictly inside the simplex."""
    pts = []
    for i in range(grid_n):
        for j in range(grid_n):
            x1, x2 = (i + 0.5) / grid_n, (j + 0.5) / grid_n
            x3 = 1.0 - x1 - x2
            if x3 > 1e-12:
                pts.append((x1, x2, x3))
    return pts


def _distinct_count(vals: Sequence[float], tol: float = 1e-12) -> int:
    v = np.sort(np.asarray(vals))
    return int(1 + np.count_nonzero(np.diff(v) > tol))


def triangle_scan(grid_n: int, N_list: Sequence[int], k: int = 2, high_precision: bool = False) -> list[TriangleCell]:
    """Verdict of ``B_N[psi, k]`` for each two-qutrit cell and each order."""
    cells = []
    N_top = max(N_list)
    for x1, x2, x3 in triangle_grid(grid_n):
        lam = SchmidtVector(np.array([x1, x2, x3]) / (x1 + x2 + x3))
        rspec = pure_reduced_spectrum(lam, k, 3)
        red = bool(rspec[0] < -PSD_TOL * max(1.0, float(np.max(np.abs(rspec)))))
        Q = pure_reduction_moments(lam, k, 3, N_top)
        q_hp = moments_from_spectrum_hp(rspec, N_top) if high_precision else None
        for N in N_list:
            v = moment_criterion_hp(q_hp, k, N) if high_precision else moment_criterion(Q, N)
            cells.append(TriangleCell(x1, x2, x3, N, v.detected, v.min_eig, _distinct_count(lam.lam), red))
    return cells


def triangle_fractions(cells: Sequence[TriangleCell]) -> dict[int, float]:
    out: dict[int, list] = {}
    for c in cells:
        out.setdefault(c.N, []).append(c.detected)
    return {N: float(np.mean(v)) for N, v in sorted(out.items())}


# ---------------------------------------------------------------------------
# noise curves and thresholds


@dataclass(frozen=True)
class NegativityPoint:
    eps: float
    k: int
    dense: float
    closed_form: float


def negativity_curve(r: int, d_A: int, d_B: int, ks: Sequence[int], eps_values: Sequence[float]) -> list[NegativityPoint]:
    lam = np.zeros(d_A)
    lam[:r] = 1.0 / r
    pts = []
    for eps in eps_values:
        rho = me_depolarized(r, d_A, d_B, float(eps))
        for k in ks:
            dense = reduction_negativity(rho, k).negativity
            pts.append(NegativityPoint(float(eps), k, dense, depolarized_negativity(lam, float(eps), k, d_A, d_B)))
    return pts


def threshold_root(r: int, d_A: int, d_B: int, xtol: float = 1e-15) -> float:
    """Noise level where the smallest eigenvalue of ``R_{r-1}`` of the
    depolarized rank-``r`` maximally entangled state crosses zero."""
    k = r - 1

    def f(eps):
        return float(k_reduced_operator(me_depolarized(r, d_A, d_B, eps), k).spectrum()[0])

    return float(brentq(f, 0.0, 1.0, xtol=xtol, rtol=4 * np.finfo(float).eps))


@dataclass(frozen=True)
class ThresholdRow:
    r: int
    d_A: int
    d_B: int
    root: float
    closed_form: float


def threshold_compare(cases: Sequence[tuple[int, int, int]]) -> list[ThresholdRow]:
    return [ThresholdRow(r, a, b, threshold_root(r, a, b), noise_threshold_rm(r, a, b)) for r, a, b in cases]


# ---------------------------------------------------------------------------
# isotropic states


@dataclass(frozen=True)
class IsotropicRow:
    d: int
    F: float
    k: int
    norm1: float
    norm1_closed: float
    norm2sq: float
    norm2sq_closed: float
    norm4quad: float
    norm4quad_closed: float
    schmidt_number: int
    third_order_detected: bool


def isotropic_check(ds: Sequence[int], F_values: Sequence[float]) -> list[IsotropicRow]:
    rows = []
    for d in ds:
        for F in F_values:
            rho = isotropic_state(d, float(F))
            T = correlation_matrix(rho)
            n1, n2, n4 = T.schatten(1), T.schatten(2) ** 2, T.schatten(4) ** 4
            c1, c2, c4 = isotropic_cm_values(d, float(F))
            mt = exact_moment_tuple(rho)
            sn = isotropic_schmidt_number(d, float(F))
            for k in range(1, d):
                det = third_order_criterion(*mt.as_tuple(), d, k).detected
                rows.append(IsotropicRow(d, float(F), k, n1, c1, n2, c2, n4, c4, sn, det))
    return rows


# ---------------------------------------------------------------------------
# shadow benchmark


@dataclass(frozen=True)
class ShadowRep:
    rep: int
    values: tuple
    std_errors: tuple
    third_order_detected: bool


@dataclass(frozen=True)
class ShadowSummary:
    name: str
    exact: float
    mean: float
    pooled_se: float
    z: float
    empirical_var: float
    mean_reported_se: float


SHADOW_FIELDS = ("p2", "p3", "a2", "a3", "t2")


def shadow_benchmark(
    rho: BipartiteDensity,
    M: int,
    L: int,
    reps: int,
    seed: int,
    k: int = 1,
    slack: float = 0.0,
    threads: int = 1,
    triple_budget: Optional[int] = None,
) -> tuple[list[ShadowRep], list[ShadowSummary], dict]:
    """Repeat the shadow pipeline ``reps`` times with independent streams."""

    def one(i):
        est = estimate_moment_tuple(rho, M, L, stream(seed, i), triple_budget)
        det = third_order_criterion(*est.value.as_tuple(), rho.d_B, k, slack=slack).detected
        return ShadowRep(i, est.value.as_tuple(), est.std_error.as_tuple(), det)

    reps_out = map_samples(one, reps, threads)
    exact = exact_moment_tuple(rho).as_tuple()
    vals = np.array([r.values for r in reps_out])
    ses = np.array([r.std_errors for r in reps_out])
    summ = []
    for j, name in enumerate(SHADOW_FIELDS):
        mean = float(vals[:, j].mean())
        pooled = float(vals[:, j].std(ddof=1) / np.sqrt(reps))
        summ.append(
            ShadowSummary(name, exact[j], mean, pooled, (mean - exact[j]) / pooled, float(vals[:, j].var(ddof=1)), float(ses[:, j].mean()))
        )
    extra = {
        "p2_variance_bound": p2_variance_bound(exact[0], exact[1], rho.D, M),
        "third_order_exact": third_order_criterion(*exact, rho.d_B, k).detected,
    }
    return reps_out, summ, extra


# ---------------------------------------------------------------------------
# certification of a single state


@dataclass(frozen=True)
class CertifyRow:
    target_sn: int
    detected: bool
    order_used: Optional[int]
    min_eig: float


def certify_state(rho: BipartiteDensity, N_max: int = 16, r_max: Optional[int] = None) -> tuple[int, list[CertifyRow]]:
    r_max = r_max or min(rho.d_A, rho.d_B)
    rows = []
    for k in range(2, r_max + 1):
        v = certify_sn_ge(rho, k, N_max)
        rows.append(CertifyRow(k, v.detected, v.order_used, v.min_eig))
    return best_lower_bound(rho, N_max, r_max), rows


def schmidt_state(coeffs: Sequence[float], d_A: int, d_B: int) -> BipartiteDensity:
    c = np.asarray(coeffs, dtype=float)
    return schmidt_diagonal_state(c / c.sum(), d_A, d_B).density()
