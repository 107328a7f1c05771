"""
scaling.py

The scaling module relates the physical operator H = -d^2/dx^2 + x^2 + i*beta*x^(2n+1)
to its semiclassical family through the unitary dilation
(U psi)(x) = tau^(-1/2) psi(x/tau):

    U H_h U^-1 = tau^-(2n+1) H,    h = tau^(-(2n+3)/2).

It decides membership in the semiclassical pseudospectrum and in the
pseudospectral region of large |lambda|, and carries pseudomodes across the
dilation.
"""

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .errors import ScalingMismatchError, ValidationError
from .operator_core import (
    BandedComplexMatrix,
    GridFunction,
    PotentialSpec,
    apply_hamiltonian,
    build_hamiltonian,
    hermite_coefficients,
    hermite_functions,
)
from .wkb import WkbPseudomode, certify_residual

logger = logging.getLogger(__name__)

# -----------------------------------------------------------------------

_REGION_MODES = ("arctan", "half_plane")
_DEFAULT_A_CONST = 10.0
_CALIBRATION_MARGIN = 1.25

# -----------------------------------------------------------------------


def tau_to_h(tau: float, n: int = 1) -> float:
    """h = tau^(-(2n+3)/2)."""
    if tau <= 0:
        raise ValidationError("tau must be positive")
    return tau ** (-(2 * n + 3) / 2.0)


def h_to_tau(h: float, n: int = 1) -> float:
    """tau = h^(-2/(2n+3))."""
    if h <= 0:
        raise ValidationError("h must be positive")
    return h ** (-2.0 / (2 * n + 3))


@dataclass(frozen=True)
class ScalingParams:
    """A dilation tau together with its semiclassical parameter h."""

    tau: float
    n: int = 1
    h: Optional[float] = None

    def __post_init__(self):
        if self.tau <= 0 or self.n < 1:
            raise ValidationError("need tau > 0 and n >= 1")
        expected = tau_to_h(self.tau, self.n)
        if self.h is None:
            object.__setattr__(self, "h", expected)
        elif not math.isclose(self.h, expected, rel_tol=1e-12):
            raise ValidationError("h = %r does not equal tau^(-(2n+3)/2) = %r" % (self.h, expected))

    @classmethod
    def from_h(cls, h: float, n: int = 1) -> "ScalingParams":
        tau = h_to_tau(h, n)
        return cls(tau=tau, n=n, h=tau_to_h(tau, n))

    @property
    def energy_scale(self) -> float:
        """tau^(2n+1), the factor between semiclassical and physical spectral parameters."""
        return self.tau ** (2 * self.n + 1)

    def to_physical(self, lam: complex) -> complex:
        return self.energy_scale * complex(lam)

    def to_semiclassical(self, lam: complex) -> complex:
        return complex(lam) / self.energy_scale

    def to_dict(self) -> dict:
        return {"tau": self.tau, "n": self.n, "h": self.h}


# -----------------------------------------------------------------------


def in_lambda_region(lam: complex, delta: float = 0.0, mode: str = "arctan") -> bool:
    """Membership in {Re lam > 0, |arg lam| < arctan(Re lam) - delta}.

    With delta > 0 the point is first normalized to |lam| = 1.  The
    "half_plane" mode tests |arg lam| < pi/2 - delta instead.
    """
    if mode not in _REGION_MODES:
        raise ValidationError("region mode must be one of %s" % (_REGION_MODES,))
    lam = complex(lam)
    if not lam.real > 0:
        return False
    if delta > 0:
        lam = lam / abs(lam)
    angle = abs(cmath.phase(lam))
    limit = math.atan(lam.real) if mode == "arctan" else 0.5 * math.pi
    return angle < limit - delta


def region_exponent(n: int = 1) -> float:
    """The exponent 2(2n+1)/(2n+3) of log(1/eps) in the region bound (6/5 for n = 1)."""
    return 2.0 * (2 * n + 1) / (2 * n + 3)


@dataclass(frozen=True)
class RegionSpec:
    delta: float
    B_const: float
    A_const: float = _DEFAULT_A_CONST
    mode: str = "arctan"

    def __post_init__(self):
        if not 0 < self.delta < 0.5 * math.pi:
            raise ValidationError("delta must lie in (0, pi/2)")
        if self.A_const <= 0 or self.B_const <= 0:
            raise ValidationError("region constants must be positive")
        if self.mode not in _REGION_MODES:
            raise ValidationError("region mode must be one of %s" % (_REGION_MODES,))


@dataclass(frozen=True)
class BoundRegion:
    """
    {|lam| > A, |arg lam| < arctan(Re lam) - delta, |lam| >= B (log 1/eps)^p},
    a region inside the eps-pseudospectrum of H.
    """

    spec: RegionSpec
    epsilon: float
    n: int = 1

    @property
    def exponent(self) -> float:
        return region_exponent(self.n)

    @property
    def modulus_floor(self) -> float:
        """The smallest admissible |lam|."""
        log_bound = self.spec.B_const * math.log(1.0 / self.epsilon) ** self.exponent
        return max(self.spec.A_const, log_bound)

    def contains(self, lam: complex) -> bool:
        lam = complex(lam)
        if abs(lam) <= self.spec.A_const:
            return False
        if not in_lambda_region(lam, self.spec.delta, self.spec.mode):
            return False
        return abs(lam) >= self.spec.B_const * math.log(1.0 / self.epsilon) ** self.exponent

    def critical_angle(self) -> float:
        """The angle theta* bounding |arg lam| on the unit circle, 0 if the sector is empty."""
        delta = self.spec.delta
        if self.spec.mode == "half_plane":
            return 0.5 * math.pi - delta
        gap = lambda theta: theta - math.atan(math.cos(theta)) + delta
        if gap(0.0) >= 0:
            return 0.0
        return brentq(gap, 0.0, 0.5 * math.pi)

    def boundary_samples(self, count: int = 64, modulus_max: Optional[float] = None) -> np.ndarray:
        """Vertices of the region boundary: one ray, the arc |lam| = floor, the other ray."""
        theta = self.critical_angle()
        if theta <= 0:
            return np.zeros(0, dtype=complex)
        floor = self.modulus_floor
        top = modulus_max if modulus_max is not None else 4.0 * floor
        radii = np.linspace(top, floor, count)
        arc = floor * np.exp(1j * np.linspace(theta, -theta, count))
        upper = radii * np.exp(1j * theta)
        lower = radii[::-1] * np.exp(-1j * theta)
        return np.concatenate([upper, arc[1:-1], lower])

    def to_dict(self) -> dict:
        return {
            "A": self.spec.A_const,
            "B": self.spec.B_const,
            "delta": self.spec.delta,
            "epsilon": self.epsilon,
            "exponent": self.exponent,
            "mode": self.spec.mode,
        }


def bound_region(spec: RegionSpec, epsilon: float, n: int = 1) -> BoundRegion:
    """Return the pseudospectral region for 0 < epsilon < 1."""
    if not 0 < epsilon < 1:
        raise ValidationError("epsilon must lie in (0, 1)")
    return BoundRegion(spec, float(epsilon), int(n))


# -----------------------------------------------------------------------


@dataclass(frozen=True)
class UnscaledPseudomode:
    lambda_phys: complex
    samples: GridFunction
    residual_phys: float
    params: ScalingParams
    inequality_holds: Optional[bool] = None

    def __iter__(self):
        return iter((self.lambda_phys, self.samples, self.residual_phys))


def unscale_pseudomode(mode: WkbPseudomode, params: ScalingParams,
                       decay_constant: Optional[float] = None) -> UnscaledPseudomode:
    """Carry a semiclassical pseudomode to the physical operator.

    lambda_phys = tau^(2n+1) lambda, samples(x) = tau^(-1/2) psi_h(x/tau) and
    residual_phys = tau^(2n+1) * ratio.  Given a decay constant C, also checks
    1/residual_phys > h^(2(2n+1)/(2n+3)) C^(1/h).

    @raises ScalingMismatchError: if params.h differs from mode.h
    """
    if not math.isclose(params.h, mode.h, rel_tol=1e-12):
        raise ScalingMismatchError("pseudomode h=%r but scaling h=%r" % (mode.h, params.h))
    tau = params.tau
    ratio = mode.residual_ratio if mode.residual_ratio is not None else certify_residual(mode)
    samples = GridFunction(
        tau * mode.samples.nodes,
        mode.samples.values / math.sqrt(tau),
        tau * mode.samples.quadrature_weights,
    )
    residual = params.energy_scale * ratio
    holds = None
    if decay_constant is not None:
        log_bound = region_exponent(params.n) * math.log(params.h) + math.log(decay_constant) / params.h
        holds = -math.log(residual) > log_bound
    return UnscaledPseudomode(params.to_physical(mode.lam), samples, residual, params, holds)


# -----------------------------------------------------------------------

# Checks tying the dilation to the Hermite matrices


def operator_identity_check(
    spec: PotentialSpec,
    tau: float,
    N: int = 200,
    seed: int = 0,
    extent: float = 22.0,
    count: int = 17601,
) -> float:
    """Relative mismatch between H u and tau^(2n+1) U H_h U^-1 u.

    u has random coefficients on the first N//2 Hermite functions.  H u is
    synthesized from the matrix product A v; the semiclassical side applies
    H_h by finite differences to (U^-1 u)(y) = tau^(1/2) u(tau y).
    """
    physical = spec.physical()
    A = build_hamiltonian(physical, N)
    rng = np.random.default_rng(seed)
    v = np.zeros(N, dtype=complex)
    active = N // 2
    v[:active] = rng.standard_normal(active) + 1j * rng.standard_normal(active)

    x = np.linspace(-extent, extent, count)
    basis = hermite_functions(N, x)
    expected = (A.matvec(v)) @ basis
    u = v @ basis

    params = ScalingParams(tau, spec.n)
    semiclassical = spec.with_h(params.h)
    dilated = GridFunction.from_samples(x / tau, math.sqrt(tau) * u)
    image = apply_hamiltonian(semiclassical, dilated).values
    actual = params.energy_scale * image / math.sqrt(tau)
    return float(np.linalg.norm(actual - expected) / np.linalg.norm(expected))


def matrix_residual_bound(samples: GridFunction, A: BandedComplexMatrix, lam: complex) -> float:
    """||(A - lam) v|| / ||v|| for the projection v of samples on the Hermite basis of A.

    An upper bound of s_min(A - lam).
    """
    v = hermite_coefficients(samples, A.dim)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValidationError("pseudomode has no weight on the first %d Hermite functions" % A.dim)
    return float(np.linalg.norm(A.shifted(lam).matvec(v)) / norm)


# -----------------------------------------------------------------------


@dataclass(frozen=True)
class Calibration:
    B_const: float
    exponent: float
    margin: float
    points: List[Tuple[float, float]]
    neglected_terms: List[float]

    def to_dict(self) -> dict:
        return {
            "B": self.B_const,
            "exponent": self.exponent,
            "margin": self.margin,
            "points": [list(p) for p in self.points],
            "neglected_log_terms": self.neglected_terms,
        }


def neglected_log_term(modulus: float, epsilon: float) -> float:
    """Relative size of the neglected log tau^-(2n+1) = -log|lam| against log(1/eps)."""
    return math.log(modulus) / math.log(1.0 / epsilon)


def calibrate_constant(frontier: Iterable[Tuple[float, float]], n: int = 1,
                       margin: float = _CALIBRATION_MARGIN) -> Calibration:
    """Fit B so that every frontier point (|lam|, eps) obeys |lam| >= B (log 1/eps)^p with margin.

    @raises ValidationError: if no point has 0 < eps < 1
    """
    p = region_exponent(n)
    usable = [(float(m), float(e)) for m, e in frontier if 0 < e < 1 and m > 0]
    if not usable:
        raise ValidationError("calibration needs frontier points with 0 < eps < 1")
    B = min(m / math.log(1.0 / e) ** p for m, e in usable) / margin
    neglected = [neglected_log_term(m, e) for m, e in usable]
    logger.info("calibrated B = %.4g from %d frontier point(s)", B, len(usable))
    return Calibration(B, p, margin, usable, neglected)
