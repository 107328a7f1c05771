"""
wkb.py

The wkb module builds semiclassical pseudomodes

    psi_h(x) = exp(i phi(x)/h) chi(x) a(x, h),    a = sum_j h^j a_j,

for H_h = -h^2 d^2/dx^2 + V_h at a point lambda of the semiclassical
pseudospectrum, and certifies that ||(H_h - lambda) psi_h|| / ||psi_h||
decays like C^(-1/h).  The phase solves the eikonal equation
(phi')^2 + V_h - lambda = 0, the amplitudes solve the transport equations
(sqrt(phi') a_j)' = (i/2) a_{j-1}'' / sqrt(phi'), and chi is a smooth cutoff
equal to 1 near the turning point x0.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence

import numpy as np
from scipy.stats import linregress

from .chebyshev import ChebyshevInterval, ChebyshevSeries
from .errors import (
    CertificationRefusedError,
    CrossCheckError,
    DegeneratePointError,
    InvariantViolationError,
    NoValidWindowError,
    SeriesBlowupError,
    ValidationError,
)
from .operator_core import GridFunction, PotentialSpec, apply_hamiltonian
from .pool import run_parallel

logger = logging.getLogger(__name__)

# -----------------------------------------------------------------------

# Default Sizes and Values

_SYMBOL_RTOL = 1e-12
_EIKONAL_TOLERANCE = 1e-10
_TRANSPORT_TOLERANCE = 1e-8
_BLOWUP_NORM = 1e15
_CROSS_CHECK_FACTOR = 3.0
_CROSS_CHECK_FLOOR = 1e-12
_QUADRATURE_POINTS = 16
_TRACKING_SUBSTEPS = 8
_DEFAULT_TRANSPORT_ORDER = 12
_DEFAULT_PLATEAU_FRACTION = 0.5
_DEFAULT_SAMPLE_COUNT = 4097

# -----------------------------------------------------------------------


def _continue_sqrt(w, reference: complex) -> np.ndarray:
    """Square roots of the path values w, each sign chosen continuous with the previous one."""
    roots = np.sqrt(np.asarray(w, dtype=complex))
    ref = complex(reference)
    for k in range(roots.size):
        if abs(roots[k] - ref) > abs(roots[k] + ref):
            roots[k] = -roots[k]
        ref = roots[k]
    return roots


# -----------------------------------------------------------------------


@dataclass(frozen=True)
class SymbolPoint:
    """
    A phase-space point (x0, xi0) with lam = xi0^2 + V_h(x0).  potential is a
    PotentialSpec (or any object with potential and potential_derivative).
    """

    x0: float
    xi0: float
    lam: complex
    h: float
    potential: object

    def __post_init__(self):
        value = self.xi0 ** 2 + complex(self.potential.potential(self.x0))
        if abs(value - self.lam) > _SYMBOL_RTOL * max(1.0, abs(self.lam)):
            raise ValidationError(
                "lambda %s does not match xi0^2 + V(x0) = %s" % (self.lam, value)
            )

    def is_elliptic(self) -> bool:
        """True when xi0 * Im V'(x0) < 0."""
        return self.xi0 * complex(self.potential.potential_derivative(self.x0)).imag < 0

    def to_dict(self) -> dict:
        return {
            "x0": self.x0,
            "xi0": self.xi0,
            "lambda": [self.lam.real, self.lam.imag],
            "h": self.h,
        }


def solve_turning_point(lam: complex, h: float, spec: PotentialSpec) -> SymbolPoint:
    """Find (x0, xi0) with lam = xi0^2 + V_h(x0) and xi0 * Im V_h'(x0) < 0.

    x0 is the real root of beta x^(2n+1) = Im lam and
    xi0 = -sgn(Im V_h'(x0)) sqrt(Re lam - c_h x0^2).

    @param lam: the semiclassical spectral parameter
    @param h: semiclassical parameter
    @param spec: the potential family (its own semiclassical_h is ignored)
    @raises DegeneratePointError: if Im lam <= 0, beta = 0 or Re lam - c_h x0^2 <= 0
    """
    lam = complex(lam)
    if h <= 0:
        raise ValidationError("h must be positive")
    family = spec.with_h(h)
    if family.beta == 0:
        raise DegeneratePointError("beta = 0 has no elliptic points", lam=lam)
    if lam.imag <= 0:
        raise DegeneratePointError("Im lambda = %g <= 0" % lam.imag, lam=lam)
    target = lam.imag / family.beta
    x0 = math.copysign(abs(target) ** (1.0 / family.power), target)
    kinetic = lam.real - family.quadratic_coefficient * x0 ** 2
    if kinetic <= 0:
        raise DegeneratePointError(
            "Re lambda - c_h x0^2 = %g <= 0" % kinetic, lam=lam, x0=x0
        )
    slope = complex(family.potential_derivative(x0)).imag
    xi0 = -math.copysign(math.sqrt(kinetic), slope)
    # x0 ** power reproduces Im lam only to rounding
    lam_exact = complex(xi0 ** 2 + family.quadratic_coefficient * x0 ** 2, family.beta * x0 ** family.power)
    if abs(lam_exact - lam) > _SYMBOL_RTOL * abs(lam):
        raise DegeneratePointError("turning point does not reproduce lambda", lam=lam)
    logger.debug("turning point x0=%.6g xi0=%.6g at h=%g", x0, xi0, h)
    return SymbolPoint(x0=x0, xi0=xi0, lam=lam, h=float(h), potential=family)


# -----------------------------------------------------------------------


@dataclass(frozen=True)
class WindowSearch:
    """Parameters of the search for the analyticity radius R0."""

    r0_max: float = 1.0
    r0_min: float = 0.02
    shrink: float = 0.9
    refine_steps: int = 20
    circles: int = 3
    circle_points: int = 64
    modulus_bound: float = 4.0
    degree: int = 128


@dataclass
class PhaseFunction:
    """
    The eikonal phase on the Lobatto grid of [x0 - R0/2, x0 + R0/2], with
    phi(x0) = 0 and phi'(x0) = xi0, and the constant C2 of Im phi'' > 1/C2.
    """

    point: SymbolPoint
    interval: ChebyshevInterval
    phi: np.ndarray
    dphi: np.ndarray
    ddphi: np.ndarray
    R0: float
    C2: float

    def __post_init__(self):
        self.phi_series = self.interval.series(self.phi)
        self.dphi_series = self.interval.series(self.dphi)

    @property
    def x0(self) -> float:
        return self.point.x0

    @property
    def lam(self) -> complex:
        return self.point.lam

    @property
    def h(self) -> float:
        return self.point.h

    @property
    def nodes(self) -> np.ndarray:
        return self.interval.nodes

    def eikonal_residual(self) -> float:
        """max |(phi')^2 + V - lambda| over the nodes."""
        potential = self.point.potential.potential(self.nodes)
        return float(np.max(np.abs(self.dphi ** 2 + potential - self.lam)))

    def require_eikonal(self, tolerance: float = _EIKONAL_TOLERANCE) -> float:
        """Return the eikonal residual, raising if it reaches tolerance * max(1, |lambda|).

        @raises InvariantViolationError: if the residual is too large
        """
        residual = self.eikonal_residual()
        if not residual < tolerance * max(1.0, abs(self.lam)):
            raise InvariantViolationError(
                "eikonal residual %.3g at lambda=%s" % (residual, self.lam),
                residual=residual,
                lam=self.lam,
            )
        return residual

    def curvature_at_center(self) -> float:
        """Im phi''(x0)."""
        return float(self.ddphi[self.interval.center_index].imag)


def _tracked_derivative(point: SymbolPoint, nodes: np.ndarray, center: int) -> np.ndarray:
    """phi' = sqrt(lambda - V) at the nodes, continued outward from phi'(x0) = xi0."""
    potential = point.potential.potential
    dphi = np.empty(nodes.size, dtype=complex)
    dphi[center] = point.xi0
    fractions = np.arange(1, _TRACKING_SUBSTEPS + 1) / _TRACKING_SUBSTEPS
    for step in (1, -1):
        reference = complex(point.xi0)
        k = center
        while 0 <= k + step < nodes.size:
            path = nodes[k] + (nodes[k + step] - nodes[k]) * fractions
            reference = _continue_sqrt(point.lam - potential(path), reference)[-1]
            k += step
            dphi[k] = reference
    return dphi


def _integrate_phase(point: SymbolPoint, nodes: np.ndarray, dphi: np.ndarray, center: int) -> np.ndarray:
    """phi(x_k) = integral of phi' from x0, by Gauss-Legendre on every node interval."""
    potential = point.potential.potential
    unit_nodes, unit_weights = np.polynomial.legendre.leggauss(_QUADRATURE_POINTS)
    phi = np.zeros(nodes.size, dtype=complex)
    for step in (1, -1):
        k = center
        while 0 <= k + step < nodes.size:
            a, b = nodes[k], nodes[k + step]
            y = 0.5 * (a + b) + 0.5 * (b - a) * unit_nodes
            order = np.argsort(np.abs(y - a))
            roots = np.empty(y.size, dtype=complex)
            roots[order] = _continue_sqrt(point.lam - potential(y[order]), dphi[k])
            phi[k + step] = phi[k] + 0.5 * (b - a) * np.sum(unit_weights * roots)
            k += step
    return phi


def _disc_is_safe(point: SymbolPoint, radius: float, search: WindowSearch) -> bool:
    scale = abs(point.xi0)
    angles = 2.0 * np.pi * np.arange(search.circle_points) / search.circle_points
    for ring in range(1, search.circles + 1):
        z = point.x0 + radius * ring / search.circles * np.exp(1j * angles)
        modulus = np.abs(point.lam - point.potential.potential(z))
        if np.min(modulus) <= 0:
            return False
        root = np.sqrt(modulus)
        if np.any(root < scale / search.modulus_bound) or np.any(root > scale * search.modulus_bound):
            return False
    return True


def _window_phase(point: SymbolPoint, radius: float, search: WindowSearch):
    interval = ChebyshevInterval(point.x0, radius / 2.0, search.degree)
    center = interval.center_index
    dphi = _tracked_derivative(point, interval.nodes, center)
    ddphi = -point.potential.potential_derivative(interval.nodes) / (2.0 * dphi)
    return interval, dphi, ddphi


def _window_is_valid(point: SymbolPoint, radius: float, search: WindowSearch) -> bool:
    if not _disc_is_safe(point, radius, search):
        return False
    _, _, ddphi = _window_phase(point, radius, search)
    return bool(np.min(ddphi.imag) > 0)


def build_phase(point: SymbolPoint, spec: Optional[PotentialSpec] = None,
                search: Optional[WindowSearch] = None) -> PhaseFunction:
    """Solve the eikonal equation around x0 on the largest admissible window.

    R0 is the largest radius <= search.r0_max for which the disc |z - x0| <= R0,
    sampled on concentric circles, keeps |phi'| within a factor
    search.modulus_bound of |xi0|, and Im phi'' > 0 on the real window
    [x0 - R0/2, x0 + R0/2].  A geometric scan finds an admissible radius and
    bisection sharpens it.

    @param point: the symbol point
    @param spec: the potential, defaults to point.potential
    @param search: window search parameters
    @raises NoValidWindowError: if no radius down to search.r0_min is admissible
    @raises InvariantViolationError: if the eikonal residual is not below 1e-10 relative
    """
    search = search or WindowSearch()
    if spec is not None:
        family = spec if spec.is_semiclassical else spec.with_h(point.h)
        if family != point.potential:
            point = SymbolPoint(point.x0, point.xi0, point.lam, point.h, family)

    radius = search.r0_max
    failed = None
    while radius >= search.r0_min and not _window_is_valid(point, radius, search):
        failed = radius
        radius *= search.shrink
    if radius < search.r0_min:
        raise NoValidWindowError(
            "no window with Im phi'' > 0 down to radius %g" % search.r0_min,
            x0=point.x0,
            lam=point.lam,
        )
    if failed is not None:
        good, bad = radius, failed
        for _ in range(search.refine_steps):
            middle = 0.5 * (good + bad)
            if _window_is_valid(point, middle, search):
                good = middle
            else:
                bad = middle
        radius = good

    interval, dphi, ddphi = _window_phase(point, radius, search)
    center = interval.center_index
    phi = _integrate_phase(point, interval.nodes, dphi, center)
    C2 = 1.01 / float(np.min(ddphi.imag))
    phase = PhaseFunction(point, interval, phi, dphi, ddphi, radius, C2)

    residual = phase.require_eikonal()
    logger.debug("window R0=%.5g, C2=%.5g, eikonal residual %.2g", radius, C2, residual)
    return phase


# -----------------------------------------------------------------------


@dataclass
class AmplitudeSeries:
    """
    Transport amplitudes a_0..a_J on the phase's Lobatto grid.  values[j]
    holds nodal samples with a_0(x0) = 1 and a_j(x0) = 0 exactly; series[j]
    is the matching Chebyshev expansion.
    """

    interval: ChebyshevInterval
    values: List[np.ndarray]
    series: List[ChebyshevSeries]
    norms: List[float]
    transport_residuals: List[float]
    C1_estimate: float

    @property
    def truncation(self) -> int:
        return len(self.values) - 1

    def growth_margins(self) -> List[float]:
        """log||a_j|| - (j+1) log C1 - j log j, non-positive by construction of C1."""
        margins = []
        for j, norm in enumerate(self.norms):
            if norm == 0:
                margins.append(-math.inf)
                continue
            jlogj = j * math.log(j) if j > 0 else 0.0
            margins.append(math.log(norm) - (j + 1) * math.log(self.C1_estimate) - jlogj)
        return margins

    def require_transport(self, tolerance: float = _TRANSPORT_TOLERANCE) -> float:
        """Return the largest transport residual, raising if it reaches tolerance.

        @raises InvariantViolationError: if some a_j misses its transport equation
        """
        worst = max(self.transport_residuals)
        if not worst < tolerance:
            order = int(np.argmax(self.transport_residuals))
            raise InvariantViolationError(
                "transport residual %.3g of a_%d above %.0e" % (worst, order, tolerance),
                residual=worst,
                order=order,
            )
        return worst


def _fit_growth_constant(norms: Sequence[float]) -> float:
    best = 0.0
    for j, norm in enumerate(norms):
        if norm <= 0:
            continue
        jj = float(j) ** j if j > 0 else 1.0
        best = max(best, (norm / jj) ** (1.0 / (j + 1)))
    return best if best > 0 else 1.0


def solve_transport(phase: PhaseFunction, J: int = _DEFAULT_TRANSPORT_ORDER) -> AmplitudeSeries:
    """Solve the transport recursion for a_0..a_J.

    a_0 = sqrt(phi'(x0)/phi'(x)) and
    a_j = (i/2) / sqrt(phi'(x)) * integral_{x0}^{x} a_{j-1}'' / sqrt(phi') dy,
    with derivatives and integrals taken on Chebyshev coefficients.

    @param phase: a valid PhaseFunction
    @param J: highest amplitude index
    @raises SeriesBlowupError: if some ||a_j|| exceeds 1e15
    @raises InvariantViolationError: if a transport residual is not below 1e-8
    """
    if J < 0:
        raise ValidationError("transport order must be non-negative")
    interval = phase.interval
    center = interval.center_index
    if center is None:
        raise ValidationError("phase grid must contain x0 as a node")

    # sqrt(phi') continued outward from x0
    root = np.empty(phase.dphi.size, dtype=complex)
    root[center] = np.sqrt(complex(phase.dphi[center]))
    for step in (1, -1):
        indices = np.arange(center + step, phase.dphi.size if step > 0 else -1, step)
        root[indices] = _continue_sqrt(phase.dphi[indices], root[center])
    inverse_root = 1.0 / root

    a0 = root[center] * inverse_root
    a0[center] = 1.0
    values = [a0]
    series = [interval.series(a0)]
    norms = [series[0].sup_norm()]
    residuals = []

    for j in range(1, J + 1):
        integrand = series[-1].derivative(2).times_values(inverse_root)
        aj = 0.5j * inverse_root * integrand.antiderivative().nodal_values()
        aj[center] = 0.0
        if not np.all(np.isfinite(aj)):
            raise SeriesBlowupError("a_%d is not finite" % j, order=j)
        current = interval.series(aj)
        norm = current.sup_norm()
        if not np.isfinite(norm) or norm > _BLOWUP_NORM:
            raise SeriesBlowupError("||a_%d|| = %.3g exceeds %.0e" % (j, norm, _BLOWUP_NORM), order=j)
        values.append(aj)
        series.append(current)
        norms.append(norm)

    for j, current in enumerate(series):
        slope = current.derivative(1).nodal_values()
        residual = phase.dphi * slope + 0.5 * phase.ddphi * values[j]
        scale = 1.0
        if j > 0:
            previous_second = series[j - 1].derivative(2).nodal_values()
            residual = residual - 0.5j * previous_second
            scale = max(1.0, float(np.max(np.abs(previous_second))))
        residuals.append(float(np.max(np.abs(residual))) / scale)

    amps = AmplitudeSeries(interval, values, series, norms, residuals, _fit_growth_constant(norms))
    amps.require_transport()
    logger.debug("transport to order %d, C1 = %.4g", J, amps.C1_estimate)
    return amps


# -----------------------------------------------------------------------

# Cutoff: chi = 1 for |x - x0| <= r, 0 for |x - x0| >= R, smooth step between


def _smooth_step(u: np.ndarray):
    """S(u) = f(u)/(f(u) + f(1-u)), f(t) = exp(-1/t), with S' and S'' on 0 < u < 1."""
    with np.errstate(divide="ignore", over="ignore", under="ignore", invalid="ignore"):
        v = 1.0 - u
        f = np.exp(-1.0 / u)
        g = np.exp(-1.0 / v)
        df = f / u ** 2
        dg = -g / v ** 2
        ddf = f * (1.0 / u ** 4 - 2.0 / u ** 3)
        ddg = g * (1.0 / v ** 4 - 2.0 / v ** 3)
        total = f + g
        numerator = df * g - f * dg
        step = f / total
        first = numerator / total ** 2
        second = ((ddf * g - f * ddg) * total - 2.0 * numerator * (df + dg)) / total ** 3
    return step, first, second


def cutoff(x, x0: float, plateau: float, support: float):
    """Return chi, chi', chi'' at x for the cutoff centred at x0."""
    x = np.asarray(x, dtype=float)
    offset = x - x0
    distance = np.abs(offset)
    chi = np.where(distance <= plateau, 1.0, 0.0)
    dchi = np.zeros_like(x)
    ddchi = np.zeros_like(x)
    ramp = (distance > plateau) & (distance < support)
    if np.any(ramp):
        width = support - plateau
        step, first, second = _smooth_step((distance[ramp] - plateau) / width)
        chi[ramp] = 1.0 - step
        dchi[ramp] = -first * np.sign(offset[ramp]) / width
        ddchi[ramp] = -second / width ** 2
    return chi, dchi, ddchi


# -----------------------------------------------------------------------


@dataclass
class WkbPseudomode:
    """
    A sampled pseudomode psi_h = exp(i phi/h) chi a on a uniform grid over the
    support of chi, with the pieces needed for its residual.
    """

    phase: PhaseFunction
    amplitudes: AmplitudeSeries
    h: float
    lam: complex
    truncation_order: int
    plateau_radius: float
    support_radius: float
    samples: GridFunction
    amplitude: np.ndarray = field(repr=False, default=None)
    amplitude_slope: np.ndarray = field(repr=False, default=None)
    last_term_curvature: np.ndarray = field(repr=False, default=None)
    phase_values: np.ndarray = field(repr=False, default=None)
    phase_slope: np.ndarray = field(repr=False, default=None)
    residual_ratio: Optional[float] = None

    @property
    def x0(self) -> float:
        return self.phase.x0

    @property
    def nodes(self) -> np.ndarray:
        return self.samples.nodes

    def norm(self) -> float:
        return self.samples.norm()

    def to_dict(self) -> dict:
        return {
            "lambda": [self.lam.real, self.lam.imag],
            "h": self.h,
            "x0": self.phase.x0,
            "xi0": self.phase.point.xi0,
            "R0": self.phase.R0,
            "C2": self.phase.C2,
            "N_trunc": self.truncation_order,
            "C1_fit": self.amplitudes.C1_estimate,
            "norm": self.norm(),
            "residual_ratio": self.residual_ratio,
        }


def adaptive_truncation(amps: AmplitudeSeries, h: float) -> int:
    """Index of the last series term before ||h^j a_j|| first increases, capped by 1/(e C1 h).

    @raises CertificationRefusedError: if h ||a_1|| >= ||a_0||
    """
    terms = [h ** j * norm for j, norm in enumerate(amps.norms)]
    if len(terms) > 1 and terms[1] >= terms[0]:
        raise CertificationRefusedError(
            "series does not decrease at h=%g (h||a_1|| = %.3g >= ||a_0|| = %.3g)" % (h, terms[1], terms[0]),
            h=h,
        )
    order = 0
    for j in range(1, len(terms)):
        if terms[j] > terms[j - 1]:
            break
        order = j
    cap = int(math.floor(1.0 / (math.e * amps.C1_estimate * h)))
    return max(0, min(order, cap))


def assemble_pseudomode(
    phase: PhaseFunction,
    amps: AmplitudeSeries,
    h: Optional[float] = None,
    plateau_fraction: float = _DEFAULT_PLATEAU_FRACTION,
    sample_count: int = _DEFAULT_SAMPLE_COUNT,
) -> WkbPseudomode:
    """Sum the truncated amplitude series, apply the cutoff and sample psi_h.

    @param phase: the phase function
    @param amps: transport amplitudes on the same grid
    @param h: semiclassical parameter, defaults to the phase's
    @param plateau_fraction: chi = 1 on |x - x0| <= plateau_fraction * R0/2
    @param sample_count: uniform samples over the support, at least 4097
    @raises ValidationError: for a plateau fraction outside (0, 1)
    """
    if not 0 < plateau_fraction < 1:
        raise ValidationError("plateau_fraction must lie in (0, 1)")
    if h is None:
        h = phase.h
    sample_count = max(int(sample_count), _DEFAULT_SAMPLE_COUNT)
    if sample_count % 2 == 0:
        sample_count += 1
    order = adaptive_truncation(amps, h)

    x0 = phase.x0
    support = phase.R0 / 2.0
    plateau = plateau_fraction * support
    nodes = np.linspace(x0 - support, x0 + support, sample_count)
    middle = sample_count // 2
    nodes[middle] = x0

    amplitude = np.zeros(sample_count, dtype=complex)
    slope = np.zeros(sample_count, dtype=complex)
    for j in range(order + 1):
        weight = h ** j
        amplitude += weight * amps.series[j](nodes)
        slope += weight * amps.series[j].derivative(1)(nodes)
    curvature = h ** order * amps.series[order].derivative(2)(nodes)
    amplitude[middle] = sum(h ** j * amps.values[j][amps.interval.center_index] for j in range(order + 1))

    phi = phase.phi_series(nodes)
    phi[middle] = 0.0
    dphi = phase.dphi_series(nodes)
    chi, _, _ = cutoff(nodes, x0, plateau, support)

    with np.errstate(under="ignore"):
        psi = np.exp(1j * phi / h) * chi * amplitude
    samples = GridFunction.from_samples(nodes, psi)
    logger.debug("assembled pseudomode at h=%g with %d series term(s)", h, order + 1)
    return WkbPseudomode(
        phase=phase,
        amplitudes=amps,
        h=float(h),
        lam=phase.lam,
        truncation_order=order,
        plateau_radius=plateau,
        support_radius=support,
        samples=samples,
        amplitude=amplitude,
        amplitude_slope=slope,
        last_term_curvature=curvature,
        phase_values=phi,
        phase_slope=dphi,
    )


# -----------------------------------------------------------------------


@dataclass(frozen=True)
class ResidualBreakdown:
    """Norms of the interior and commutator parts of (H_h - lambda) psi_h."""

    interior: float
    commutator: float
    algebraic: float
    direct: Optional[float]
    norm: float

    @property
    def ratio(self) -> float:
        return self.algebraic / self.norm

    def agrees(self, factor: float = _CROSS_CHECK_FACTOR, floor: float = _CROSS_CHECK_FLOOR) -> bool:
        """Algebraic and direct residuals agree within factor, or one sits below floor."""
        if self.direct is None:
            return True
        if self.algebraic <= floor * self.norm or self.direct <= floor * self.norm:
            return True
        return max(self.algebraic, self.direct) <= factor * min(self.algebraic, self.direct)


def residual_breakdown(mode: WkbPseudomode, spec: Optional[PotentialSpec] = None,
                       direct: bool = False) -> ResidualBreakdown:
    """Split (H_h - lambda) psi_h into its interior and commutator parts.

    interior   = -exp(i phi/h) chi h^(N+2) a_N''
    commutator = -h^2 exp(i phi/h) (chi'' a + 2 chi' (a' + (i/h) phi' a))

    @param mode: the assembled pseudomode
    @param spec: the semiclassical operator; needed for the direct residual
    @param direct: also evaluate apply_hamiltonian(psi) - lambda psi
    """
    h = mode.h
    nodes = mode.nodes
    weights = mode.samples.quadrature_weights
    chi, dchi, ddchi = cutoff(nodes, mode.x0, mode.plateau_radius, mode.support_radius)
    with np.errstate(under="ignore"):
        oscillation = np.exp(1j * mode.phase_values / h)
    interior = -(h ** 2) * oscillation * chi * mode.last_term_curvature
    commutator = -(h ** 2) * oscillation * (
        ddchi * mode.amplitude
        + 2.0 * dchi * (mode.amplitude_slope + (1j / h) * mode.phase_slope * mode.amplitude)
    )

    def l2(values):
        return float(np.sqrt(np.sum(weights * np.abs(values) ** 2)))

    direct_norm = None
    if direct:
        if spec is None:
            spec = mode.phase.point.potential
        image = apply_hamiltonian(spec, mode.samples)
        direct_norm = l2(image.values - mode.lam * mode.samples.values)

    return ResidualBreakdown(
        interior=l2(interior),
        commutator=l2(commutator),
        algebraic=l2(interior + commutator),
        direct=direct_norm,
        norm=mode.norm(),
    )


def certify_residual(mode: WkbPseudomode, spec: Optional[PotentialSpec] = None,
                     cross_check: bool = False) -> float:
    """Return ||(H_h - lambda) psi_h|| / ||psi_h|| from the algebraic split.

    @param cross_check: compare against the direct real-space residual
    @raises CrossCheckError: if both residuals exceed 1e-12 and differ by more than a factor 3
    """
    if spec is not None and spec.semiclassical_h is not None and not math.isclose(spec.semiclassical_h, mode.h):
        raise ValidationError("operator h=%g does not match pseudomode h=%g" % (spec.semiclassical_h, mode.h))
    breakdown = residual_breakdown(mode, spec, direct=cross_check)
    if not breakdown.agrees():
        raise CrossCheckError(
            "algebraic residual %.3g and direct residual %.3g disagree at h=%g"
            % (breakdown.algebraic, breakdown.direct, mode.h),
            algebraic=breakdown.algebraic,
            direct=breakdown.direct,
        )
    return breakdown.ratio


def gaussian_envelope_violation(mode: WkbPseudomode) -> float:
    """max over the plateau of log|psi| + (x - x0)^2/(2 C2 h) - log(sup|a|); <= 0 when the envelope holds."""
    offset = mode.nodes - mode.x0
    plateau = np.abs(offset) <= mode.plateau_radius
    magnitude = np.abs(mode.samples.values[plateau])
    bound = np.log(np.max(np.abs(mode.amplitude[plateau])))
    with np.errstate(divide="ignore"):
        excess = np.log(magnitude) + offset[plateau] ** 2 / (2.0 * mode.phase.C2 * mode.h) - bound
    return float(np.max(excess))


def norm_law(mode: WkbPseudomode):
    """Return (||psi_h|| / h^(1/4), (pi / Im phi''(x0))^(1/4)), the measured and Gaussian constants."""
    measured = mode.norm() / mode.h ** 0.25
    reference = (math.pi / mode.phase.curvature_at_center()) ** 0.25
    return measured, reference


# -----------------------------------------------------------------------


@dataclass
class CertifiedPoint:
    """One rung of an h-ladder."""

    mode: WkbPseudomode
    breakdown: ResidualBreakdown

    @property
    def h(self) -> float:
        return self.mode.h

    @property
    def ratio(self) -> float:
        return self.breakdown.ratio

    def to_dict(self) -> dict:
        result = self.mode.to_dict()
        result.update(
            {
                "residual_algebraic": self.breakdown.algebraic,
                "residual_direct": self.breakdown.direct,
                "residual_interior": self.breakdown.interior,
                "residual_commutator": self.breakdown.commutator,
                "norm_over_h_quarter": norm_law(self.mode)[0],
            }
        )
        return result


@dataclass
class LadderCertificate:
    """Pseudomodes over an h-ladder and the fit log(ratio) = intercept + slope/h."""

    lam: complex
    points: List[CertifiedPoint]
    slope: Optional[float] = None
    intercept: Optional[float] = None
    r_squared: Optional[float] = None

    @property
    def decay_constant(self) -> Optional[float]:
        """C = exp(-slope), so that ratio ~ C^(-1/h)."""
        return None if self.slope is None else math.exp(-self.slope)

    @property
    def has_fit(self) -> bool:
        return self.slope is not None

    def certified_constant(self) -> float:
        """Largest C with ratio <= C^(-1/h) at every rung, i.e. min ratio^(-h)."""
        return min(p.ratio ** (-p.h) for p in self.points)

    def ratios(self) -> np.ndarray:
        return np.array([p.ratio for p in self.points])

    def strictly_decreasing(self) -> bool:
        """Ratios strictly decrease as h decreases."""
        ordered = sorted(self.points, key=lambda p: -p.h)
        values = [p.ratio for p in ordered]
        return all(b < a for a, b in zip(values, values[1:]))

    def norm_band(self):
        """(min, max) of ||psi_h|| / h^(1/4) across the ladder."""
        values = [norm_law(p.mode)[0] for p in self.points]
        return min(values), max(values)

    def to_dict(self) -> dict:
        fit = None
        if self.has_fit:
            fit = {
                "slope": self.slope,
                "intercept": self.intercept,
                "r_squared": self.r_squared,
                "C": self.decay_constant,
            }
        low, high = self.norm_band()
        return {
            "lambda": [self.lam.real, self.lam.imag],
            "points": [p.to_dict() for p in self.points],
            "slope_fit": fit,
            "certified_constant": self.certified_constant(),
            "strictly_decreasing": self.strictly_decreasing(),
            "norm_band": [low, high],
        }


def certify_point(
    lam: complex,
    h: float,
    spec: PotentialSpec,
    transport_order: int = _DEFAULT_TRANSPORT_ORDER,
    plateau_fraction: float = _DEFAULT_PLATEAU_FRACTION,
    search: Optional[WindowSearch] = None,
    cross_check: bool = False,
) -> CertifiedPoint:
    """Run turning point, phase, transport, assembly and residual at one h."""
    point = solve_turning_point(lam, h, spec)
    phase = build_phase(point, search=search)
    amps = solve_transport(phase, transport_order)
    mode = assemble_pseudomode(phase, amps, h, plateau_fraction)
    operator = spec.with_h(h)
    breakdown = residual_breakdown(mode, operator, direct=cross_check)
    if not breakdown.agrees():
        raise CrossCheckError(
            "algebraic residual %.3g and direct residual %.3g disagree at h=%g"
            % (breakdown.algebraic, breakdown.direct, h),
            h=h,
        )
    mode = replace(mode, residual_ratio=breakdown.ratio)
    logger.info("h=%g: residual ratio %.4g with %d term(s)", h, breakdown.ratio, mode.truncation_order + 1)
    return CertifiedPoint(mode, breakdown)


def certify_ladder(
    lam: complex,
    h_values: Sequence[float],
    spec: PotentialSpec,
    transport_order: int = _DEFAULT_TRANSPORT_ORDER,
    plateau_fraction: float = _DEFAULT_PLATEAU_FRACTION,
    search: Optional[WindowSearch] = None,
    cross_check_count: int = 3,
    threads: Optional[int] = None,
) -> LadderCertificate:
    """Certify pseudomodes over an h-ladder and fit the exponential decay law.

    The cross-check against the direct residual runs at the cross_check_count
    largest h.  The fit needs at least 3 rungs; with fewer a warning is logged
    and the certificate carries no fit.
    """
    h_values = sorted({float(h) for h in h_values}, reverse=True)
    if not h_values:
        raise ValidationError("the h-ladder is empty")
    checked = set(h_values[:cross_check_count])

    def run(h):
        return certify_point(lam, h, spec, transport_order, plateau_fraction, search, h in checked)

    points = run_parallel(run, h_values, threads)

    certificate = LadderCertificate(complex(lam), points)
    if len(points) < 3:
        logger.warning("h-ladder has %d rung(s); the decay fit needs at least 3", len(points))
        return certificate
    inverse_h = np.array([1.0 / p.h for p in points])
    log_ratio = np.log([p.ratio for p in points])
    fit = linregress(inverse_h, log_ratio)
    certificate.slope = float(fit.slope)
    certificate.intercept = float(fit.intercept)
    certificate.r_squared = float(fit.rvalue ** 2)
    logger.info("decay fit: slope %.4g, R^2 %.5f, C = %.4g",
                certificate.slope, certificate.r_squared, certificate.decay_constant)
    return certificate
