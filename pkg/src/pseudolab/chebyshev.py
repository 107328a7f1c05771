"""
chebyshev.py

The chebyshev module represents smooth functions on a real interval by
their Chebyshev coefficients at the Chebyshev-Lobatto points, and supports
the calculus the transport recursion needs: differentiation, integration
anchored at the interval centre, and pointwise products.
"""

from typing import Optional

import numpy as np
from numpy.polynomial import chebyshev as cheb

from .errors import ValidationError

# -----------------------------------------------------------------------

_CHOP_TOLERANCE = 1e-13

# -----------------------------------------------------------------------


def _cosine_matrix(degree: int) -> np.ndarray:
    k = np.arange(degree + 1)
    return np.cos(np.pi * np.outer(k, k) / degree)


class ChebyshevInterval:
    """
    The Lobatto grid of a given degree on [center - radius, center + radius].
    Nodes are stored in increasing order.  For even degree the middle node
    is exactly the centre.
    """

    def __init__(self, center: float, radius: float, degree: int = 128):
        if radius <= 0:
            raise ValidationError("interval radius must be positive")
        if degree < 2:
            raise ValidationError("Chebyshev degree must be at least 2")
        self.center = float(center)
        self.radius = float(radius)
        self.degree = int(degree)
        self.reference_nodes = -np.cos(np.pi * np.arange(degree + 1) / degree)
        if degree % 2 == 0:
            self.reference_nodes[degree // 2] = 0.0
        self.nodes = self.center + self.radius * self.reference_nodes
        if degree % 2 == 0:
            self.nodes[degree // 2] = self.center
        self._cosines = _cosine_matrix(degree)

    @property
    def center_index(self) -> Optional[int]:
        return self.degree // 2 if self.degree % 2 == 0 else None

    def to_reference(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.center) / self.radius

    def coefficients(self, values) -> np.ndarray:
        """Return the Chebyshev coefficients interpolating values at the nodes."""
        values = np.asarray(values)
        if values.shape[-1] != self.degree + 1:
            raise ValidationError("expected %d nodal values" % (self.degree + 1))
        # cosine transform expects descending nodes
        weighted = np.array(values[::-1], dtype=complex)
        weighted[0] *= 0.5
        weighted[-1] *= 0.5
        coefs = (2.0 / self.degree) * (self._cosines @ weighted)
        coefs[0] *= 0.5
        coefs[-1] *= 0.5
        return coefs

    def series(self, values, chop: bool = True) -> "ChebyshevSeries":
        """Interpolate nodal values by a ChebyshevSeries on this interval."""
        result = ChebyshevSeries(self.coefficients(values), self)
        return result.chopped() if chop else result


class ChebyshevSeries:
    """A complex Chebyshev expansion on a ChebyshevInterval."""

    def __init__(self, coefficients, interval: ChebyshevInterval):
        self.coefficients = np.asarray(coefficients, dtype=complex)
        self.interval = interval

    def __call__(self, x) -> np.ndarray:
        return cheb.chebval(self.interval.to_reference(x), self.coefficients)

    def nodal_values(self) -> np.ndarray:
        return cheb.chebval(self.interval.reference_nodes, self.coefficients)

    def chopped(self, tolerance: float = _CHOP_TOLERANCE) -> "ChebyshevSeries":
        """Zero the trailing coefficients below tolerance * max |c|."""
        magnitudes = np.abs(self.coefficients)
        peak = magnitudes.max() if magnitudes.size else 0.0
        coefs = self.coefficients.copy()
        if peak == 0:
            return ChebyshevSeries(coefs, self.interval)
        significant = np.nonzero(magnitudes >= tolerance * peak)[0]
        coefs[significant[-1] + 1:] = 0.0
        return ChebyshevSeries(coefs, self.interval)

    def derivative(self, order: int = 1) -> "ChebyshevSeries":
        """Differentiate in x (not in the reference variable)."""
        coefs = cheb.chebder(self.coefficients, m=order, scl=1.0 / self.interval.radius)
        return ChebyshevSeries(coefs, self.interval)

    def antiderivative(self) -> "ChebyshevSeries":
        """Integrate in x; the result vanishes at the interval centre."""
        coefs = cheb.chebint(self.coefficients, m=1, lbnd=0.0, scl=self.interval.radius)
        return ChebyshevSeries(coefs, self.interval)

    def times_values(self, values) -> "ChebyshevSeries":
        """Pointwise product with nodal values, re-interpolated at the nodes."""
        return self.interval.series(self.nodal_values() * np.asarray(values))

    def sup_norm(self, oversample: int = 4) -> float:
        """Estimate max |f| on the interval from a finer Lobatto sampling."""
        count = oversample * self.interval.degree + 1
        t = -np.cos(np.pi * np.arange(count) / (count - 1))
        return float(np.max(np.abs(cheb.chebval(t, self.coefficients))))
