"""
pseudospec.py

The pseudospec module computes resolvent norms ||(A - lambda)^-1|| = 1/s_min(A - lambda)
of banded matrices, sweeps them over rectangular grids of the complex plane,
and checks the inclusions

    {dist(lambda, sigma(A)) < eps}  in  sigma_eps(A)  in  {dist(lambda, W(A)) < eps}

where W(A) is the numerical range.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from scipy.linalg import eigvals_banded
from scipy.sparse.linalg import splu

from .errors import ValidationError
from .operator_core import BandedComplexMatrix, build_hamiltonian
from .pool import WorkerPool, run_parallel

logger = logging.getLogger(__name__)

# -----------------------------------------------------------------------

# Default Sizes and Values

_DEFAULT_RTOL = 1e-10
_DEFAULT_MAX_ITER = 200
_DEFAULT_BLOCK = 8
_DEFAULT_ANGLES = 64
_LIPSCHITZ_SLACK = 1e-8
_SEED = 0

# -----------------------------------------------------------------------


@dataclass(frozen=True)
class SingularValueResult:
    """Smallest singular value of A - lambda and how it was obtained."""

    sigma: float
    iterations: int
    method: str
    at_eigenvalue: bool = False

    @property
    def resolvent_norm(self) -> float:
        return math.inf if self.at_eigenvalue or self.sigma == 0 else 1.0 / self.sigma


def smallest_singular_value(
    A: BandedComplexMatrix,
    lam: complex,
    rtol: float = _DEFAULT_RTOL,
    max_iter: int = _DEFAULT_MAX_ITER,
    block: int = _DEFAULT_BLOCK,
) -> SingularValueResult:
    """Return s_min(A - lam) by block inverse iteration on (A - lam)^dagger (A - lam).

    One sparse LU factorization of the band matrix B = A - lam serves both
    B^-1 and B^-dagger solves.  Each step takes a Rayleigh-Ritz estimate
    1/||B^-dagger Q|| over the current block Q, which approaches s_min from
    above.  The iteration stops once the estimate changes by at most rtol
    relative; after max_iter steps it falls back to a dense SVD.

    @param A: the band matrix
    @param lam: the spectral parameter
    @param rtol: relative stabilization tolerance
    @param max_iter: iteration limit before the dense fallback
    @param block: number of vectors iterated together
    @return: a SingularValueResult; at_eigenvalue is set when B is singular to working precision
    """
    lam = complex(lam)
    if not (math.isfinite(lam.real) and math.isfinite(lam.imag)):
        raise ValidationError("spectral parameter must be finite")
    shifted = A.shifted(lam).to_sparse("csc")
    n = A.dim
    singular_floor = n * np.finfo(float).eps * A.norm_estimate()

    try:
        lu = splu(shifted, permc_spec="NATURAL")
    except RuntimeError:
        logger.debug("factorization singular at %s", lam)
        return SingularValueResult(0.0, 0, "singular-lu", at_eigenvalue=True)

    p = min(n, block)
    rng = np.random.default_rng(_SEED)
    start = rng.standard_normal((n, p)) + 1j * rng.standard_normal((n, p))
    q, _ = np.linalg.qr(start)

    previous = None
    with np.errstate(all="ignore"):
        for iteration in range(1, max_iter + 1):
            w = lu.solve(q, trans="H")
            if not np.all(np.isfinite(w)):
                return SingularValueResult(0.0, iteration, "singular-lu", at_eigenvalue=True)
            _, s, vh = np.linalg.svd(w, full_matrices=False)
            sigma = 1.0 / s[0]
            if sigma <= singular_floor:
                return SingularValueResult(sigma, iteration, "inverse-iteration", at_eigenvalue=True)
            q, _ = np.linalg.qr(lu.solve(w @ vh.conj().T))
            if previous is not None and abs(previous - sigma) <= rtol * sigma:
                return SingularValueResult(float(sigma), iteration, "inverse-iteration")
            previous = sigma

    logger.warning("inverse iteration stagnated at %s after %d steps; using dense SVD", lam, max_iter)
    sigma = float(scipy.linalg.svdvals(shifted.toarray())[-1])
    return SingularValueResult(sigma, max_iter, "dense-svd", at_eigenvalue=sigma <= singular_floor)


def resolvent_norm(A: BandedComplexMatrix, lam: complex, **options) -> float:
    """Return ||(A - lam)^-1||, or math.inf when lam is an eigenvalue to working precision."""
    return smallest_singular_value(A, lam, **options).resolvent_norm


# -----------------------------------------------------------------------


@dataclass
class ResolventGrid:
    """
    Resolvent norms on a rectangular grid.  values[iy, ix] belongs to
    lambda = re_axis[ix] + i*im_axis[iy]; points at an eigenvalue hold
    math.inf and are marked in at_eigenvalue.
    """

    re_axis: np.ndarray
    im_axis: np.ndarray
    values: np.ndarray
    matrix_dim: int
    sweep_seconds: float
    at_eigenvalue: np.ndarray = None
    lipschitz_violations: int = 0
    fallback_count: int = 0

    def __post_init__(self):
        if self.at_eigenvalue is None:
            self.at_eigenvalue = np.isinf(self.values)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    def points(self) -> np.ndarray:
        """Complex grid points, same layout as values."""
        return self.re_axis[None, :] + 1j * self.im_axis[:, None]

    def singular_values(self) -> np.ndarray:
        """1/values, with zeros at eigenvalue points."""
        with np.errstate(divide="ignore"):
            return np.where(np.isinf(self.values), 0.0, 1.0 / self.values)

    def bounds(self) -> Tuple[float, float, float, float]:
        return (
            float(self.re_axis[0]),
            float(self.re_axis[-1]),
            float(self.im_axis[0]),
            float(self.im_axis[-1]),
        )


def count_lipschitz_violations(grid: ResolventGrid) -> int:
    """Count adjacent grid pairs where |s(l1) - s(l2)| exceeds |l1 - l2|."""
    s = grid.singular_values()
    dx = np.diff(grid.re_axis)[None, :]
    dy = np.diff(grid.im_axis)[:, None]
    slack_x = _LIPSCHITZ_SLACK * np.maximum(1.0, np.maximum(s[:, 1:], s[:, :-1]))
    slack_y = _LIPSCHITZ_SLACK * np.maximum(1.0, np.maximum(s[1:, :], s[:-1, :]))
    horizontal = np.abs(np.diff(s, axis=1)) > dx + slack_x
    vertical = np.abs(np.diff(s, axis=0)) > dy + slack_y
    return int(np.count_nonzero(horizontal) + np.count_nonzero(vertical))


def _evaluate_points(A: BandedComplexMatrix, points: np.ndarray, options: dict):
    results = [smallest_singular_value(A, lam, **options) for lam in points]
    values = np.array([r.resolvent_norm for r in results])
    fallbacks = sum(1 for r in results if r.method == "dense-svd")
    return values, fallbacks


def evaluate_points(A: BandedComplexMatrix, points, threads: Optional[int] = None, **options) -> np.ndarray:
    """Return resolvent norms at arbitrary points, in input order."""
    points = np.asarray(points, dtype=complex).ravel()
    values = run_parallel(lambda lam: resolvent_norm(A, lam, **options), list(points), threads)
    return np.array(values, dtype=float)


def sweep_grid(
    A: BandedComplexMatrix,
    re_range: Sequence[float],
    im_range: Sequence[float],
    nx: int,
    ny: int,
    threads: Optional[int] = None,
    **options,
) -> ResolventGrid:
    """Fill an nx x ny grid over re_range x im_range with resolvent norms.

    Rows are computed independently on a WorkerPool; each point uses a fixed
    starting block, so the values do not depend on the thread count.

    Neighbouring values breaking |log g1 - log g2| <= |z1 - z2| g_max are only
    counted in grid.lipschitz_violations, never raised; callers must check it.

    @param A: the band matrix
    @param re_range: (re_min, re_max)
    @param im_range: (im_min, im_max)
    @param nx: number of grid lines along the real axis, at least 2
    @param ny: number of grid lines along the imaginary axis, at least 2
    @param threads: worker thread hint
    @return: the filled ResolventGrid
    @raises ValidationError: if the grid is degenerate
    """
    if int(nx) < 2 or int(ny) < 2:
        raise ValidationError("a grid needs nx, ny >= 2, got %r x %r" % (nx, ny))
    if not (re_range[0] < re_range[1] and im_range[0] < im_range[1]):
        raise ValidationError("grid ranges must be increasing")
    re_axis = np.linspace(re_range[0], re_range[1], int(nx))
    im_axis = np.linspace(im_range[0], im_range[1], int(ny))

    logger.info("sweeping %d x %d grid at N=%d", nx, ny, A.dim)
    started = time.perf_counter()
    with WorkerPool(threads) as pool:
        rows = pool.map(lambda y: _evaluate_points(A, re_axis + 1j * y, options), list(im_axis))
    elapsed = time.perf_counter() - started

    values = np.vstack([row for row, _ in rows])
    grid = ResolventGrid(
        re_axis=re_axis,
        im_axis=im_axis,
        values=values,
        matrix_dim=A.dim,
        sweep_seconds=elapsed,
        fallback_count=sum(f for _, f in rows),
    )
    grid.lipschitz_violations = count_lipschitz_violations(grid)
    if grid.lipschitz_violations:
        logger.warning("%d adjacent grid pairs break the 1-Lipschitz bound", grid.lipschitz_violations)
    logger.info("sweep finished in %.2f s, %d point(s) at eigenvalues",
                elapsed, int(np.count_nonzero(grid.at_eigenvalue)))
    return grid


def distance_resolvent(points, eigenvalues) -> np.ndarray:
    """Return 1/dist(lambda, eigenvalues), the resolvent norm of a normal matrix."""
    points = np.asarray(points, dtype=complex)
    eigenvalues = np.asarray(eigenvalues, dtype=complex).ravel()
    distance = np.min(np.abs(points[..., None] - eigenvalues), axis=-1)
    with np.errstate(divide="ignore"):
        return 1.0 / distance


# -----------------------------------------------------------------------

# Numerical range and the sandwich inclusions


def numerical_range_support(A: BandedComplexMatrix, angles: int = _DEFAULT_ANGLES):
    """Return (thetas, mu) with mu(theta) = largest eigenvalue of (e^{i theta}A + e^{-i theta}A^dagger)/2.

    W(A) lies in every half plane Re(e^{i theta} z) <= mu(theta).
    """
    thetas = 2.0 * np.pi * np.arange(angles) / angles
    sparse_a = A.to_sparse("csr")
    sparse_h = sparse_a.conj().T.tocsr()
    top = A.dim - 1
    mu = np.empty(angles)
    for k, theta in enumerate(thetas):
        rotation = np.exp(1j * theta)
        rotated = 0.5 * (rotation * sparse_a + np.conj(rotation) * sparse_h)
        herm = BandedComplexMatrix.from_sparse(rotated, A.bandwidth)
        upper = herm.bands[: herm.bandwidth + 1]
        mu[k] = eigvals_banded(upper, lower=False, select="i", select_range=(top, top))[0]
    return thetas, mu


def numerical_range_distance_bound(points, thetas, mu) -> np.ndarray:
    """Lower bound max(0, max_theta Re(e^{i theta} lambda) - mu(theta)) of dist(lambda, W(A))."""
    points = np.asarray(points, dtype=complex)
    rotated = np.real(np.exp(1j * np.asarray(thetas)) * points[..., None])
    return np.maximum(0.0, np.max(rotated - np.asarray(mu), axis=-1))


@dataclass
class SandwichReport:
    """Outcome of the inclusion checks at one epsilon."""

    epsilon: float
    points_checked: int
    spectral_violations: List[complex] = field(default_factory=list)
    numerical_range_violations: List[complex] = field(default_factory=list)
    angles: int = _DEFAULT_ANGLES

    @property
    def violation_count(self) -> int:
        return len(self.spectral_violations) + len(self.numerical_range_violations)

    @property
    def ok(self) -> bool:
        return self.violation_count == 0

    def to_dict(self) -> dict:
        def pairs(points):
            return [[p.real, p.imag] for p in points]

        return {
            "epsilon": self.epsilon,
            "points_checked": self.points_checked,
            "angles": self.angles,
            "spectral_violations": pairs(self.spectral_violations),
            "numerical_range_violations": pairs(self.numerical_range_violations),
            "ok": self.ok,
        }


def sandwich_check(
    A: BandedComplexMatrix,
    grid: ResolventGrid,
    epsilon: float,
    eigenvalues=None,
    angles: int = _DEFAULT_ANGLES,
) -> SandwichReport:
    """Check both pseudospectral inclusions on every grid point.

    (i)  dist(lambda, sigma(A)) < eps  implies  ||(A - lambda)^-1|| > 1/eps;
    (ii) ||(A - lambda)^-1|| > 1/eps  implies  dist(lambda, W(A)) < eps,
    with dist to W(A) bounded below through the support function.

    @param eigenvalues: eigenvalues of A; computed densely when omitted
    @return: a SandwichReport listing every violating point
    """
    if epsilon <= 0:
        raise ValidationError("epsilon must be positive")
    if eigenvalues is None:
        eigenvalues = scipy.linalg.eigvals(A.to_dense())
    points = grid.points()
    values = grid.values
    threshold = 1.0 / epsilon

    in_pseudospectrum = values > threshold * (1.0 - 1e-8)
    spectral_distance = np.min(np.abs(points[..., None] - np.asarray(eigenvalues)), axis=-1)
    violates_spectral = (spectral_distance < epsilon * (1.0 - 1e-9)) & ~in_pseudospectrum

    thetas, mu = numerical_range_support(A, angles)
    range_distance = numerical_range_distance_bound(points, thetas, mu)
    violates_range = (values > threshold * (1.0 + 1e-8)) & (range_distance >= epsilon * (1.0 + 1e-9))

    report = SandwichReport(
        epsilon=float(epsilon),
        points_checked=int(values.size),
        spectral_violations=[complex(p) for p in points[violates_spectral]],
        numerical_range_violations=[complex(p) for p in points[violates_range]],
        angles=angles,
    )
    if not report.ok:
        logger.warning("sandwich check at eps=%g: %d violation(s)", epsilon, report.violation_count)
    return report


# -----------------------------------------------------------------------


@dataclass
class TrustReport:
    """Where a sweep is stable under enlarging N by the given factor."""

    larger_dim: int
    stride: int
    trusted: np.ndarray
    relative_change: np.ndarray
    re_axis: np.ndarray
    im_axis: np.ndarray
    re_cutoff: Optional[float]

    @property
    def fraction(self) -> float:
        return float(np.mean(self.trusted))

    def to_dict(self) -> dict:
        window = None
        if self.re_cutoff is not None:
            window = {
                "re_range": [float(self.re_axis[0]), self.re_cutoff],
                "im_range": [float(self.im_axis[0]), float(self.im_axis[-1])],
            }
        return {
            "larger_dim": self.larger_dim,
            "stride": self.stride,
            "trusted_fraction": self.fraction,
            "trusted_window": window,
        }


def trusted_window(
    A: BandedComplexMatrix,
    grid: ResolventGrid,
    stride: int = 4,
    factor: float = 1.5,
    tolerance: float = 0.01,
    threads: Optional[int] = None,
) -> TrustReport:
    """Recompute a strided sub-grid at factor*N and mark points changing by < tolerance.

    The trusted sub-window spans every grid column, left to right, until the
    first column holding an untrusted point.

    @raises ValidationError: if A does not carry the PotentialSpec it was built from
    """
    if A.potential is None:
        raise ValidationError("trusted_window needs a matrix assembled by build_hamiltonian")
    larger = build_hamiltonian(A.potential, int(math.ceil(factor * A.dim)))
    re_axis = grid.re_axis[::stride]
    im_axis = grid.im_axis[::stride]
    base = grid.values[::stride, ::stride]

    rows = run_parallel(lambda y: _evaluate_points(larger, re_axis + 1j * y, {})[0], list(im_axis), threads)
    refined = np.vstack(rows)

    with np.errstate(invalid="ignore", divide="ignore"):
        change = np.abs(refined - base) / base
    both_infinite = np.isinf(base) & np.isinf(refined)
    change = np.where(both_infinite, 0.0, change)
    change = np.where(np.isnan(change), np.inf, change)
    trusted = change < tolerance

    cutoff = None
    for ix in range(re_axis.size):
        if not np.all(trusted[:, ix]):
            break
        cutoff = float(re_axis[ix])
    logger.info("trusted fraction %.3f at N=%d vs %d", float(np.mean(trusted)), A.dim, larger.dim)
    return TrustReport(larger.dim, stride, trusted, change, re_axis, im_axis, cutoff)
