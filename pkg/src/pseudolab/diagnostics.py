"""
diagnostics.py

The diagnostics module computes eigenvalues and spectral-projection norms of
Hermite truncations, tests whether the projection norms admit a polynomial
("tame") bound, and traces the norm of the group exp(-itA).
"""

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import scipy.linalg
from scipy.stats import linregress

from .errors import DefectivePairWarning, InsufficientDataError, ValidationError
from .operator_core import BandedComplexMatrix, PotentialSpec, build_hamiltonian
from .pool import run_parallel
from .pseudospec import evaluate_points

logger = logging.getLogger(__name__)

# -----------------------------------------------------------------------

# Default Sizes and Values

_CONVERGENCE_RTOL = 1e-6
_DEFECTIVE_OVERLAP = 1e-12
_MIN_TAMENESS_POINTS = 6
_EIGENBASIS_CONDITION_LIMIT = 1e8
_OVERFLOW_NORM = 1e300
_REFINE_FACTOR = 1.5

# -----------------------------------------------------------------------


@dataclass
class EigenReport:
    """
    The k_max eigenvalues of smallest real part, with left/right overlaps
    |v_k^dagger u_k| of unit eigenvectors and ||P_k|| = 1/|v_k^dagger u_k|.
    """

    eigenvalues: np.ndarray
    overlaps: np.ndarray
    projection_norms: np.ndarray
    converged: np.ndarray
    matrix_dim: int
    all_eigenvalues: np.ndarray = field(repr=False, default=None)
    right_vectors: np.ndarray = field(repr=False, default=None)
    refined_dim: Optional[int] = None
    refined_eigenvalues: Optional[np.ndarray] = None
    refined_projection_norms: Optional[np.ndarray] = None

    @property
    def converged_count(self) -> int:
        return int(np.count_nonzero(self.converged))

    @property
    def k_max(self) -> int:
        return int(self.eigenvalues.size)

    def converged_norms(self):
        """Return (k, ||P_k||) over converged eigenvalues, k counted from 1."""
        k = np.arange(1, self.k_max + 1)
        return k[self.converged], self.projection_norms[self.converged]

    def projection_agreement(self) -> Optional[np.ndarray]:
        """Relative change of ||P_k|| between N and the refined size."""
        if self.refined_projection_norms is None:
            return None
        return np.abs(self.refined_projection_norms - self.projection_norms) / self.projection_norms

    def to_dict(self) -> dict:
        result = {
            "matrix_dim": self.matrix_dim,
            "refined_dim": self.refined_dim,
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "overlaps": self.overlaps.tolist(),
            "projection_norms": [float(p) if math.isfinite(p) else None for p in self.projection_norms],
            "converged": [bool(c) for c in self.converged],
            "converged_count": self.converged_count,
            "pairing_error": conjugate_pairing_error(self),
        }
        if self.refined_projection_norms is not None:
            result["refined_projection_norms"] = [
                float(p) if math.isfinite(p) else None for p in self.refined_projection_norms
            ]
        return result


def _eigen_triplets(dense: np.ndarray):
    values, left, right = scipy.linalg.eig(dense, left=True, right=True)
    left = left / np.linalg.norm(left, axis=0)
    right = right / np.linalg.norm(right, axis=0)
    overlaps = np.abs(np.sum(np.conj(left) * right, axis=0))
    order = np.lexsort((values.imag, values.real))
    return values[order], overlaps[order], right[:, order]


def _projection_norms(overlaps: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.where(overlaps < _DEFECTIVE_OVERLAP, np.inf, 1.0 / overlaps)


def _nearest(values: np.ndarray, targets: np.ndarray) -> np.ndarray:
    return np.argmin(np.abs(values[:, None] - targets[None, :]), axis=1)


def compute_spectrum(A: BandedComplexMatrix, k_max: int, refine: bool = True) -> EigenReport:
    """Dense eigendecomposition with spectral-projection norms.

    Eigenvalues are ordered by real part.  With refine set and a matrix built
    by build_hamiltonian, each eigenvalue is compared with the nearest one at
    1.5N; agreement to 1e-6 relative marks it converged.  k_max above N/4 is
    clipped with a warning.

    @param A: the band matrix
    @param k_max: number of eigenvalues reported
    @param refine: compare against the 1.5N truncation
    """
    if k_max < 1:
        raise ValidationError("k_max must be positive")
    limit = max(1, A.dim // 4)
    if k_max > limit:
        logger.warning("k_max=%d exceeds N/4=%d; clipped", k_max, limit)
        k_max = limit

    values, overlaps, right = _eigen_triplets(A.to_dense())
    selected = slice(0, k_max)
    eigenvalues = values[selected]
    norms = _projection_norms(overlaps[selected])
    defective = np.flatnonzero(overlaps[selected] < _DEFECTIVE_OVERLAP)
    for k in defective:
        warnings.warn("eigenvalue %s has left/right overlap below %.0e" % (eigenvalues[k], _DEFECTIVE_OVERLAP),
                      DefectivePairWarning)

    report = EigenReport(
        eigenvalues=eigenvalues,
        overlaps=overlaps[selected],
        projection_norms=norms,
        converged=np.ones(k_max, dtype=bool),
        matrix_dim=A.dim,
        all_eigenvalues=values,
        right_vectors=right[:, selected],
    )

    if refine and A.potential is not None:
        larger = build_hamiltonian(A.potential, int(math.ceil(_REFINE_FACTOR * A.dim)))
        big_values, big_overlaps, _ = _eigen_triplets(larger.to_dense())
        match = _nearest(eigenvalues, big_values)
        matched = big_values[match]
        scale = np.maximum(1.0, np.abs(eigenvalues))
        report.converged = np.abs(matched - eigenvalues) <= _CONVERGENCE_RTOL * scale
        report.refined_dim = larger.dim
        report.refined_eigenvalues = matched
        report.refined_projection_norms = _projection_norms(big_overlaps[match])
    elif refine:
        logger.warning("matrix carries no PotentialSpec; convergence not checked")

    logger.info("spectrum at N=%d: %d of %d eigenvalue(s) converged", A.dim, report.converged_count, k_max)
    return report


def conjugate_pairing_error(report: EigenReport, converged_only: bool = False) -> float:
    """max over reported lambda of the distance from conj(lambda) to the full spectrum."""
    pool = report.all_eigenvalues if report.all_eigenvalues is not None else report.eigenvalues
    reported = report.eigenvalues[report.converged] if converged_only else report.eigenvalues
    conjugates = np.conj(reported)
    if conjugates.size == 0:
        return 0.0
    return float(np.max(np.min(np.abs(conjugates[:, None] - pool[None, :]), axis=1)))


def span_residual(report: EigenReport, count: Optional[int] = None) -> np.ndarray:
    """Distance of the first count basis vectors from the span of the reported right eigenvectors."""
    vectors = report.right_vectors
    if vectors is None:
        raise ValidationError("report carries no eigenvectors")
    q, _ = np.linalg.qr(vectors)
    count = count or max(1, vectors.shape[1] // 2)
    unit = np.eye(vectors.shape[0], count)
    return np.linalg.norm(unit - q @ (q.conj().T @ unit), axis=0)


# -----------------------------------------------------------------------


@dataclass(frozen=True)
class TamenessVerdict:
    verdict: str
    alpha: float
    prefactor: float
    polynomial_r_squared: float
    exponential_rate: float
    exponential_r_squared: float
    bound_violated: bool
    points: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _fit(x, y):
    if np.ptp(y) == 0:
        return 0.0, float(y[0]), 1.0
    fit = linregress(x, y)
    return float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2)


def tameness_test(report: EigenReport, alpha_max: float = 1.0, a_max: float = 10.0) -> TamenessVerdict:
    """Compare polynomial and exponential models of ||P_k|| over converged k.

    The verdict is "tame" when the bound ||P_k|| <= a_max k^alpha_max holds
    and the polynomial model fits at least as well, "not tame at this scale"
    when the bound fails and the exponential model fits better, and
    "inconclusive" otherwise.

    @raises InsufficientDataError: with fewer than 6 converged finite norms
    """
    k, norms = report.converged_norms()
    finite = np.isfinite(norms)
    k, norms = k[finite], norms[finite]
    if k.size < _MIN_TAMENESS_POINTS:
        raise InsufficientDataError(
            "tameness needs %d converged projection norms, got %d" % (_MIN_TAMENESS_POINTS, k.size)
        )
    log_norms = np.log(norms)
    alpha, log_a, r2_poly = _fit(np.log(k), log_norms)
    rate, _, r2_exp = _fit(k.astype(float), log_norms)
    violated = bool(np.any(norms > a_max * k ** alpha_max * (1.0 + 1e-10)))

    if not violated and r2_poly >= r2_exp:
        verdict = "tame"
    elif violated and r2_exp > r2_poly:
        verdict = "not tame at this scale"
    else:
        verdict = "inconclusive"
    logger.info("tameness: %s (alpha=%.3g, R2 poly=%.4f, R2 exp=%.4f)", verdict, alpha, r2_poly, r2_exp)
    return TamenessVerdict(verdict, alpha, math.exp(log_a), r2_poly, rate, r2_exp, violated, int(k.size))


# -----------------------------------------------------------------------


@dataclass
class SemigroupCurve:
    times: np.ndarray
    norms: np.ndarray
    matrix_dim: int
    method: str
    overflow: bool = False

    @property
    def supremum(self) -> float:
        return float(np.max(self.norms))


def semigroup_curve(A: BandedComplexMatrix, t_max: float, steps: int = 51,
                    threads: Optional[int] = None) -> SemigroupCurve:
    """Return ||exp(-i t A)|| (spectral norm) at steps equispaced times in [0, t_max].

    The eigendecomposition is reused when its eigenvector matrix has condition
    number below 1e8; otherwise each time point uses scaling and squaring.
    """
    if t_max <= 0:
        raise ValidationError("t_max must be positive")
    if steps < 2:
        raise ValidationError("need at least 2 time steps")
    dense = A.to_dense()
    times = np.linspace(0.0, t_max, int(steps))

    values, vectors = scipy.linalg.eig(dense)
    condition = np.linalg.cond(vectors)
    if condition < _EIGENBASIS_CONDITION_LIMIT:
        method = "eigendecomposition"
        inverse = np.linalg.inv(vectors)

        def norm_at(t):
            with np.errstate(over="ignore", invalid="ignore"):
                return scipy.linalg.svdvals((vectors * np.exp(-1j * t * values)) @ inverse)[0]
    else:
        method = "expm"

        def norm_at(t):
            with np.errstate(over="ignore", invalid="ignore"):
                group = scipy.linalg.expm(-1j * t * dense)
            if not np.all(np.isfinite(group)):
                return math.inf
            return scipy.linalg.svdvals(group)[0]

    norms = np.array(run_parallel(norm_at, list(times[1:]), threads), dtype=float)
    norms = np.concatenate([[1.0], norms])
    norms = np.where(np.isfinite(norms), norms, math.inf)
    overflow = bool(np.any(norms > _OVERFLOW_NORM))
    if overflow:
        logger.warning("group norm exceeds %.0e at N=%d", _OVERFLOW_NORM, A.dim)
    logger.debug("semigroup curve at N=%d via %s (eigenbasis condition %.3g)", A.dim, method, condition)
    return SemigroupCurve(times, norms, A.dim, method, overflow)


@dataclass
class SemigroupGrowth:
    curves: List[SemigroupCurve]

    @property
    def dims(self) -> List[int]:
        return [c.matrix_dim for c in self.curves]

    @property
    def suprema(self) -> List[float]:
        return [c.supremum for c in self.curves]

    def strictly_increasing(self) -> bool:
        s = self.suprema
        return all(b > a for a, b in zip(s, s[1:]))

    def to_dict(self) -> dict:
        return {
            "dims": self.dims,
            "suprema": [v if math.isfinite(v) else None for v in self.suprema],
            "overflow": [c.overflow for c in self.curves],
            "strictly_increasing": self.strictly_increasing(),
        }


def semigroup_growth(spec: PotentialSpec, dims: Sequence[int], t_max: float, steps: int = 51,
                     threads: Optional[int] = None) -> SemigroupGrowth:
    """Trace sup_t ||exp(-itA_N)|| over a ladder of truncation sizes."""
    curves = [semigroup_curve(build_hamiltonian(spec, N), t_max, steps, threads) for N in sorted(dims)]
    return SemigroupGrowth(curves)


# -----------------------------------------------------------------------


@dataclass(frozen=True)
class ResolventSpot:
    k: int
    eigenvalue: complex
    offset: float
    smallest_singular_value: float
    predicted: float

    @property
    def ratio(self) -> float:
        return self.smallest_singular_value / self.predicted

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "eigenvalue": [self.eigenvalue.real, self.eigenvalue.imag],
            "offset": self.offset,
            "s_min": self.smallest_singular_value,
            "predicted": self.predicted,
            "ratio": self.ratio,
        }


def resolvent_consistency(A: BandedComplexMatrix, report: EigenReport, count: int = 3,
                          offset: float = 1e-4, threads: Optional[int] = None) -> List[ResolventSpot]:
    """Compare s_min(A - lambda) with |lambda - lambda_k| / ||P_k|| near converged eigenvalues."""
    indices = np.flatnonzero(report.converged)[:count]
    eigenvalues = report.eigenvalues[indices].astype(complex)
    norms = evaluate_points(A, eigenvalues + offset * np.exp(0.25j * np.pi), threads=threads)
    spots = []
    for k, eigenvalue, norm in zip(indices, eigenvalues, norms):
        sigma = 0.0 if math.isinf(norm) else 1.0 / norm
        spots.append(ResolventSpot(int(k) + 1, complex(eigenvalue), offset, sigma,
                                   offset / report.projection_norms[k]))
    return spots
