"""
operator_core.py

The operator_core module builds Hermite-basis discretizations of

    H   = -d^2/dx^2 + x^2 + i*beta*x^(2n+1)
    H_h = -h^2 d^2/dx^2 + c_h x^2 + i*beta*x^(2n+1),   c_h = h^((4n-2)/(2n+3))

and applies both operators to sampled functions in real space.  Row k of
every matrix stands for the k-th harmonic-oscillator eigenfunction, in which
the position operator is the tridiagonal ladder matrix x = (a + a^dagger)/sqrt(2).
"""

import logging
import math
import warnings
from dataclasses import dataclass, replace
from typing import Dict, Optional, TextIO, Union

import numpy as np
from scipy import sparse
from scipy.linalg import eigvals_banded

from .errors import BoundaryValueWarning, ValidationError

logger = logging.getLogger(__name__)

# -----------------------------------------------------------------------

# Default Sizes and Values

_BASIS_TAG = "hermite"
_MIN_GRID_NODES = 16
_BOUNDARY_TOLERANCE = 1e-12
_UNIFORM_RTOL = 1e-9

# centred 8th order stencil for the second derivative, offsets -4..4
_FD8_SECOND_DERIVATIVE = np.array(
    [-1 / 560, 8 / 315, -1 / 5, 8 / 5, -205 / 72, 8 / 5, -1 / 5, 8 / 315, -1 / 560]
)

# -----------------------------------------------------------------------


@dataclass(frozen=True)
class PotentialSpec:
    """
    Parameters of V(x) = x^2 + i*beta*x^(2n+1), or of its semiclassical
    family V_h(x) = h^((4n-2)/(2n+3)) x^2 + i*beta*x^(2n+1) when
    semiclassical_h is set.
    """

    beta: float = 1.0
    n: int = 1
    semiclassical_h: Optional[float] = None

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise ValidationError("n must be a positive integer, got %r" % (self.n,))
        if isinstance(self.beta, complex) or not math.isfinite(self.beta):
            raise ValidationError("beta must be a finite real number, got %r" % (self.beta,))
        if self.semiclassical_h is not None:
            h = self.semiclassical_h
            if not math.isfinite(h) or h <= 0:
                raise ValidationError("semiclassical_h must be positive, got %r" % (h,))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def power(self) -> int:
        """The odd exponent 2n+1."""
        return 2 * self.n + 1

    @property
    def is_semiclassical(self) -> bool:
        return self.semiclassical_h is not None

    @property
    def quadratic_coefficient(self) -> float:
        """Coefficient of x^2: 1, or h^((4n-2)/(2n+3)) in the semiclassical family."""
        if self.semiclassical_h is None:
            return 1.0
        return self.semiclassical_h ** ((4 * self.n - 2) / (2 * self.n + 3))

    @property
    def kinetic_coefficient(self) -> float:
        """Coefficient of -d^2/dx^2: 1, or h^2."""
        if self.semiclassical_h is None:
            return 1.0
        return self.semiclassical_h ** 2

    def with_h(self, h: float) -> "PotentialSpec":
        """Return the semiclassical member of this family at parameter h."""
        return replace(self, semiclassical_h=float(h))

    def physical(self) -> "PotentialSpec":
        """Return the non-semiclassical operator of this family."""
        return replace(self, semiclassical_h=None)

    def potential(self, x) -> np.ndarray:
        """Evaluate V (or V_h) at real or complex points x."""
        x = np.asarray(x)
        return self.quadratic_coefficient * x ** 2 + 1j * (self.beta * x ** self.power)

    def potential_derivative(self, x) -> np.ndarray:
        """Evaluate dV/dx (or dV_h/dx) at real or complex points x."""
        x = np.asarray(x)
        m = self.power
        return 2.0 * self.quadratic_coefficient * x + 1j * (self.beta * m * x ** (m - 1))

    def to_dict(self) -> dict:
        return {"beta": self.beta, "n": self.n, "semiclassical_h": self.semiclassical_h}


# -----------------------------------------------------------------------


class BandedComplexMatrix:
    """
    A BandedComplexMatrix is a complex N x N band matrix kept in
    diagonal-ordered storage, bands[bandwidth + i - j, j] = A[i, j].
    Storage slots that fall outside the matrix are held at exactly zero.
    Instances are immutable once constructed.
    """

    def __init__(
        self,
        bands: np.ndarray,
        bandwidth: int,
        basis_tag: str = _BASIS_TAG,
        potential: Optional[PotentialSpec] = None,
    ):
        """
        @param bands: array of shape (2*bandwidth + 1, N)
        @param bandwidth: number of stored super-/sub-diagonals
        @param basis_tag: label of the basis rows refer to
        @param potential: the PotentialSpec this matrix was assembled from, if any
        @raises ValidationError: if the storage shape does not match the bandwidth
        """
        bandwidth = int(bandwidth)
        bands = np.array(bands, dtype=complex)
        if bandwidth < 0:
            raise ValidationError("bandwidth must be non-negative")
        if bands.ndim != 2 or bands.shape[0] != 2 * bandwidth + 1 or bands.shape[1] < 1:
            raise ValidationError(
                "band storage of shape %s does not match bandwidth %d" % (bands.shape, bandwidth)
            )
        dim = bands.shape[1]
        rows = np.arange(2 * bandwidth + 1)[:, None] - bandwidth + np.arange(dim)[None, :]
        bands[(rows < 0) | (rows >= dim)] = 0.0
        bands.setflags(write=False)

        self._bands = bands
        self._bandwidth = bandwidth
        self._dim = dim
        self._basis_tag = basis_tag
        self._potential = potential
        offsets = np.arange(bandwidth, -bandwidth - 1, -1)
        self._csr = sparse.dia_matrix((bands, offsets), shape=(dim, dim)).tocsr()
        self._csr_h = self._csr.conj().T.tocsr()

    # -------------------------------------------------------------------

    @classmethod
    def from_diagonals(
        cls,
        diagonals: Dict[int, np.ndarray],
        dim: int,
        bandwidth: int,
        basis_tag: str = _BASIS_TAG,
        potential: Optional[PotentialSpec] = None,
    ) -> "BandedComplexMatrix":
        """Build a band matrix from a map offset -> diagonal values.

        Offset d = j - i; diagonal d has dim - |d| entries.

        @param diagonals: the non-zero diagonals
        @param dim: matrix dimension N
        @param bandwidth: stored bandwidth, at least max |d|
        @return: the assembled matrix
        @raises ValidationError: if a diagonal lies outside the band or has the wrong length
        """
        bands = np.zeros((2 * bandwidth + 1, dim), dtype=complex)
        for d, values in diagonals.items():
            if abs(d) > bandwidth:
                raise ValidationError("diagonal %d lies outside bandwidth %d" % (d, bandwidth))
            values = np.asarray(values)
            if values.size != max(dim - abs(d), 0):
                raise ValidationError("diagonal %d must have %d entries" % (d, dim - abs(d)))
            if values.size == 0:
                continue
            if d >= 0:
                bands[bandwidth - d, d:] = values
            else:
                bands[bandwidth - d, : dim + d] = values
        return cls(bands, bandwidth, basis_tag, potential)

    @classmethod
    def from_sparse(cls, matrix, bandwidth: int, basis_tag: str = _BASIS_TAG, potential=None):
        """Build a band matrix from a scipy sparse matrix.

        @raises ValidationError: if a non-zero entry lies outside the band
        """
        coo = sparse.coo_matrix(matrix)
        outside = (np.abs(coo.row - coo.col) > bandwidth) & (coo.data != 0)
        if np.any(outside):
            raise ValidationError("matrix has non-zero entries outside bandwidth %d" % bandwidth)
        dim = coo.shape[0]
        csr = coo.tocsr()
        diagonals = {d: csr.diagonal(d) for d in range(-bandwidth, bandwidth + 1) if abs(d) < dim}
        return cls.from_diagonals(diagonals, dim, bandwidth, basis_tag, potential)

    @classmethod
    def from_dense(cls, dense, bandwidth: int, basis_tag: str = _BASIS_TAG, potential=None):
        """Build a band matrix from a dense square array."""
        return cls.from_sparse(sparse.csr_matrix(np.asarray(dense)), bandwidth, basis_tag, potential)

    # -------------------------------------------------------------------

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def bandwidth(self) -> int:
        return self._bandwidth

    @property
    def basis_tag(self) -> str:
        return self._basis_tag

    @property
    def potential(self) -> Optional[PotentialSpec]:
        return self._potential

    @property
    def bands(self) -> np.ndarray:
        return self._bands

    def entry(self, i: int, j: int) -> complex:
        """Return A[i, j] (zero outside the band)."""
        if not (0 <= i < self._dim and 0 <= j < self._dim):
            raise IndexError("entry (%d, %d) outside a %d x %d matrix" % (i, j, self._dim, self._dim))
        if abs(i - j) > self._bandwidth:
            return 0j
        return complex(self._bands[self._bandwidth + i - j, j])

    def diagonal(self, offset: int = 0) -> np.ndarray:
        """Return the diagonal with offset d = j - i."""
        b, n = self._bandwidth, self._dim
        if abs(offset) > b:
            return np.zeros(max(n - abs(offset), 0), dtype=complex)
        if offset >= 0:
            return self._bands[b - offset, offset:].copy()
        return self._bands[b - offset, : n + offset].copy()

    def to_sparse(self, fmt: str = "csr"):
        return self._csr.asformat(fmt, copy=True)

    def to_dense(self) -> np.ndarray:
        return self._csr.toarray()

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """Return A v (v may hold several columns)."""
        return self._csr @ v

    def rmatvec(self, v: np.ndarray) -> np.ndarray:
        """Return A^dagger v."""
        return self._csr_h @ v

    def shifted(self, shift: complex) -> "BandedComplexMatrix":
        """Return A - shift*I."""
        bands = np.array(self._bands)
        bands[self._bandwidth, :] -= shift
        return BandedComplexMatrix(bands, self._bandwidth, self._basis_tag, self._potential)

    def conjugate(self) -> "BandedComplexMatrix":
        """Return the entrywise complex conjugate."""
        return BandedComplexMatrix(np.conj(self._bands), self._bandwidth, self._basis_tag, self._potential)

    def hermitian_part(self) -> "BandedComplexMatrix":
        """Return (A + A^dagger)/2 as a band matrix."""
        herm = 0.5 * (self._csr + self._csr_h)
        return BandedComplexMatrix.from_sparse(herm, self._bandwidth, self._basis_tag)

    def occupied_bandwidth(self) -> int:
        """Return the largest |i - j| over exactly non-zero entries."""
        coo = self._csr.tocoo()
        nonzero = coo.data != 0
        if not np.any(nonzero):
            return 0
        return int(np.max(np.abs(coo.row[nonzero] - coo.col[nonzero])))

    def norm_estimate(self) -> float:
        """Return the Frobenius norm, an upper bound of the spectral norm."""
        return float(np.sqrt(np.sum(np.abs(self._bands) ** 2)))

    def __repr__(self):
        return "BandedComplexMatrix(dim=%d, bandwidth=%d, basis_tag=%r)" % (
            self._dim,
            self._bandwidth,
            self._basis_tag,
        )


# -----------------------------------------------------------------------


@dataclass(frozen=True)
class GridFunction:
    """
    Complex samples of a function on ordered real nodes, together with
    positive quadrature weights matched to the nodes.
    """

    nodes: np.ndarray
    values: np.ndarray
    quadrature_weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        weights = np.asarray(self.quadrature_weights, dtype=float)
        if nodes.ndim != 1 or values.shape != nodes.shape or weights.shape != nodes.shape:
            raise ValidationError("nodes, values and weights must be 1-D arrays of equal length")
        if nodes.size > 1 and not np.all(np.diff(nodes) > 0):
            raise ValidationError("nodes must be strictly increasing")
        if not np.all(weights > 0):
            raise ValidationError("quadrature weights must be positive")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "quadrature_weights", weights)

    @classmethod
    def from_samples(cls, nodes, values) -> "GridFunction":
        """Attach trapezoid weights to samples on arbitrary increasing nodes."""
        nodes = np.asarray(nodes, dtype=float)
        return cls(nodes, values, trapezoid_weights(nodes))

    @classmethod
    def uniform(cls, lo: float, hi: float, count: int, values=None) -> "GridFunction":
        """Sample on count equispaced nodes spanning [lo, hi].

        @param values: samples, or a callable evaluated at the nodes, defaults to zeros
        """
        nodes = np.linspace(lo, hi, int(count))
        if values is None:
            values = np.zeros(nodes.size, dtype=complex)
        elif callable(values):
            values = values(nodes)
        return cls.from_samples(nodes, values)

    def __len__(self):
        return self.nodes.size

    @property
    def spacing(self) -> float:
        """The common node spacing.

        @raises ValidationError: if the nodes are not equispaced
        """
        steps = np.diff(self.nodes)
        if steps.size == 0 or np.max(np.abs(steps - steps[0])) > _UNIFORM_RTOL * abs(steps[0]):
            raise ValidationError("grid is not uniform")
        return float((self.nodes[-1] - self.nodes[0]) / (self.nodes.size - 1))

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.nodes, values, self.quadrature_weights)

    def norm(self) -> float:
        """The L^2 norm by the attached quadrature."""
        return float(np.sqrt(np.sum(self.quadrature_weights * np.abs(self.values) ** 2)))

    def inner(self, other: "GridFunction") -> complex:
        """The L^2 inner product (self, other), antilinear in self."""
        return complex(np.sum(self.quadrature_weights * np.conj(self.values) * other.values))

    def boundary_magnitude(self) -> float:
        return float(max(abs(self.values[0]), abs(self.values[-1])))


def trapezoid_weights(nodes: np.ndarray) -> np.ndarray:
    """Return composite trapezoid weights for increasing nodes."""
    nodes = np.asarray(nodes, dtype=float)
    if nodes.size < 2:
        raise ValidationError("a quadrature needs at least two nodes")
    steps = np.diff(nodes)
    weights = np.zeros(nodes.size)
    weights[:-1] += 0.5 * steps
    weights[1:] += 0.5 * steps
    return weights


# -----------------------------------------------------------------------

# Ladder-operator matrices


def _ladder_values(dim: int) -> np.ndarray:
    return np.sqrt(np.arange(1, dim) / 2.0)


def _position_sparse(dim: int):
    """Real tridiagonal x = (a + a^dagger)/sqrt(2) at dimension dim."""
    s = _ladder_values(dim)
    return sparse.diags([s, s], [-1, 1], shape=(dim, dim), format="csr")


def _momentum_imaginary_sparse(dim: int):
    """Real antisymmetric Q with P = iQ, Q[k, k+1] = -Q[k+1, k] = sqrt((k+1)/2)."""
    s = _ladder_values(dim)
    return sparse.diags([-s, s], [-1, 1], shape=(dim, dim), format="csr")


def _truncated_product(factors, dim: int):
    product = factors[0]
    for factor in factors[1:]:
        product = product @ factor
    return product.tocsr()[:dim, :dim]


def position_power(N: int, power: int, padding: Optional[int] = None):
    """Return the leading N x N block of x^power as a real sparse matrix.

    The ladder matrix is built at dimension N + padding before the power is
    taken, so that the retained block equals the infinite-matrix entries
    once padding >= power.

    @param N: retained dimension
    @param power: non-negative integer exponent
    @param padding: extra rows/columns, defaults to power
    """
    if padding is None:
        padding = power
    if power == 0:
        return sparse.identity(N, format="csr")
    x = _position_sparse(N + padding)
    return _truncated_product([x] * power, N)


def build_position_matrix(N: int, padding: int = 0) -> BandedComplexMatrix:
    """Return the position operator in the Hermite basis.

    X[k, k+1] = X[k+1, k] = sqrt((k+1)/2), at dimension N + padding.

    @param N: number of retained basis functions, at least 1
    @param padding: extra basis functions appended, defaults to 0
    @raises ValidationError: if N < 1 or padding < 0
    """
    if N < 1 or padding < 0:
        raise ValidationError("need N >= 1 and padding >= 0")
    dim = N + padding
    s = _ladder_values(dim)
    return BandedComplexMatrix.from_diagonals({-1: s, 1: s}, dim, 1)


def build_momentum_matrix(N: int, padding: int = 0) -> BandedComplexMatrix:
    """Return the momentum operator in the Hermite basis.

    P[k, k+1] = -P[k+1, k] = i*sqrt((k+1)/2), at dimension N + padding.
    """
    if N < 1 or padding < 0:
        raise ValidationError("need N >= 1 and padding >= 0")
    dim = N + padding
    s = 1j * _ladder_values(dim)
    return BandedComplexMatrix.from_diagonals({-1: -s, 1: s}, dim, 1)


def kinetic_matrix(N: int, padding: int = 1):
    """Return the leading N x N block of P^dagger P = -d^2/dx^2 (real sparse)."""
    q = _momentum_imaginary_sparse(N + padding)
    return _truncated_product([q.T.tocsr(), q], N)


def _band_rows(matrix, dim: int, bandwidth: int) -> np.ndarray:
    """Band storage of a symmetric matrix; the lower band mirrors the upper one bit for bit."""
    rows = np.zeros((2 * bandwidth + 1, dim))
    for d in range(-bandwidth, bandwidth + 1):
        if abs(d) >= dim:
            continue
        values = matrix.diagonal(abs(d))
        if d >= 0:
            rows[bandwidth - d, d:] = values
        else:
            rows[bandwidth - d, : dim + d] = values
    return rows


def build_hamiltonian(spec: PotentialSpec, N: int) -> BandedComplexMatrix:
    """Assemble the Hermite-basis truncation of H (or H_h).

    Physical operator: A = diag(2k+1) + i*beta*T_N(X^(2n+1)).
    Semiclassical operator: A_h = h^2 K + c_h T_N(X^2) + i*beta*T_N(X^(2n+1)),
    with K = T_N(P^dagger P).  Real parts sit on even offsets and imaginary
    parts on odd offsets, so the PT relation P conj(A) P = A holds exactly.

    @param spec: the potential parameters
    @param N: truncation dimension; at least 2n+2 when beta != 0
    @return: the band matrix, bandwidth 2n+1 (beta != 0)
    @raises ValidationError: if N is too small to hold the band
    """
    m = spec.power
    if N < 1:
        raise ValidationError("N must be positive")
    if spec.beta != 0 and N < m + 1:
        raise ValidationError("N = %d is too small to hold a band of width %d" % (N, m))

    if spec.is_semiclassical:
        quadratic = (
            spec.kinetic_coefficient * kinetic_matrix(N, padding=2)
            + spec.quadratic_coefficient * position_power(N, 2)
        )
        bandwidth = max(m, 2) if spec.beta != 0 else 2
        real_rows = _band_rows(quadratic, N, bandwidth)
    else:
        bandwidth = m if spec.beta != 0 else 0
        real_rows = np.zeros((2 * bandwidth + 1, N))
        real_rows[bandwidth, :] = 2.0 * np.arange(N) + 1.0

    imag_rows = np.zeros_like(real_rows)
    if spec.beta != 0:
        imag_rows = spec.beta * _band_rows(position_power(N, m), N, bandwidth)

    bands = np.empty(real_rows.shape, dtype=complex)
    bands.real = real_rows
    bands.imag = imag_rows
    logger.debug("assembled %s operator, N=%d, bandwidth=%d",
                 "semiclassical" if spec.is_semiclassical else "physical", N, bandwidth)
    return BandedComplexMatrix(bands, bandwidth, _BASIS_TAG, spec)


# -----------------------------------------------------------------------

# Structural checks


def pt_defect(A: BandedComplexMatrix) -> float:
    """Return max |(P conj(A) P - A)_jk| with P = diag((-1)^k)."""
    b = A.bandwidth
    signs = (-1.0) ** (np.arange(2 * b + 1) - b)
    return float(np.max(np.abs(signs[:, None] * np.conj(A.bands) - A.bands)))


def min_hermitian_eigenvalue(A: BandedComplexMatrix) -> float:
    """Return the smallest eigenvalue of (A + A^dagger)/2.

    A lower bound for Re of the numerical range; equal to 1 for the physical
    operator at every N (m-accretivity of H - 1).
    """
    herm = A.hermitian_part()
    upper = herm.bands[: herm.bandwidth + 1]
    values = eigvals_banded(upper, lower=False, select="i", select_range=(0, 0))
    return float(values[0])


# -----------------------------------------------------------------------

# Real-space application


def apply_hamiltonian(spec: PotentialSpec, f: GridFunction) -> GridFunction:
    """Apply -d^2/dx^2 + V (or -h^2 d^2/dx^2 + V_h) to samples on a uniform grid.

    The second derivative uses a centred 8th order finite difference; values
    beyond the grid ends are taken to be zero.

    @param spec: the potential parameters
    @param f: samples on a uniform grid that decay to below 1e-12 at both ends
    @return: the image, on the same grid
    @raises ValidationError: if the grid has fewer than 16 nodes or is not uniform
    """
    if len(f) < _MIN_GRID_NODES:
        raise ValidationError("need at least %d grid nodes, got %d" % (_MIN_GRID_NODES, len(f)))
    dx = f.spacing
    edge = f.boundary_magnitude()
    if edge >= _BOUNDARY_TOLERANCE:
        logger.warning("grid function is %.3g at the grid ends", edge)
        warnings.warn("grid function is %.3g at the grid ends" % edge, BoundaryValueWarning)
    second = np.convolve(f.values, _FD8_SECOND_DERIVATIVE, mode="same") / dx ** 2
    image = -spec.kinetic_coefficient * second + spec.potential(f.nodes) * f.values
    return f.with_values(image)


# -----------------------------------------------------------------------

# Hermite functions


def hermite_functions(N: int, x) -> np.ndarray:
    """Return psi_0..psi_{N-1} at the points x, shape (N, len(x)).

    Uses psi_{k+1} = sqrt(2/(k+1)) x psi_k - sqrt(k/(k+1)) psi_{k-1}.
    """
    x = np.asarray(x, dtype=float)
    psi = np.zeros((N, x.size))
    psi[0] = np.pi ** -0.25 * np.exp(-0.5 * x ** 2)
    if N > 1:
        psi[1] = np.sqrt(2.0) * x * psi[0]
    for k in range(1, N - 1):
        psi[k + 1] = np.sqrt(2.0 / (k + 1)) * x * psi[k] - np.sqrt(k / (k + 1)) * psi[k - 1]
    return psi


def hermite_coefficients(f: GridFunction, N: int) -> np.ndarray:
    """Project samples onto the first N Hermite functions by quadrature."""
    basis = hermite_functions(N, f.nodes)
    return basis @ (f.quadrature_weights * f.values)


def synthesize(coefficients: np.ndarray, x) -> np.ndarray:
    """Evaluate sum_k c_k psi_k(x)."""
    coefficients = np.asarray(coefficients)
    return coefficients @ hermite_functions(coefficients.size, x)


# -----------------------------------------------------------------------

# Matrix export: header "N bandwidth", then "row col re im" per stored entry


def write_matrix(A: BandedComplexMatrix, target: Union[str, TextIO]) -> None:
    """Write A in the documented text format, row-major band order."""
    if isinstance(target, str):
        with open(target, "w") as stream:
            write_matrix(A, stream)
        return
    n, b = A.dim, A.bandwidth
    target.write("%d %d\n" % (n, b))
    for i in range(n):
        for j in range(max(0, i - b), min(n, i + b + 1)):
            value = A.bands[b + i - j, j]
            target.write("%d %d %r %r\n" % (i, j, float(value.real), float(value.imag)))


def read_matrix(source: Union[str, TextIO]) -> BandedComplexMatrix:
    """Read a matrix written by write_matrix.

    @raises ValidationError: on a malformed header or out-of-band entry
    """
    if isinstance(source, str):
        with open(source) as stream:
            return read_matrix(stream)
    header = source.readline().split()
    if len(header) != 2:
        raise ValidationError("matrix header must read 'N bandwidth'")
    n, b = int(header[0]), int(header[1])
    bands = np.zeros((2 * b + 1, n), dtype=complex)
    for line in source:
        fields = line.split()
        if not fields:
            continue
        i, j = int(fields[0]), int(fields[1])
        if abs(i - j) > b or not (0 <= i < n and 0 <= j < n):
            raise ValidationError("entry (%d, %d) outside the band" % (i, j))
        bands[b + i - j, j] = complex(float(fields[2]), float(fields[3]))
    return BandedComplexMatrix(bands, b)
