import numpy as np
import pytest
from numpy.testing import assert_allclose

from pseudolab.chebyshev import ChebyshevInterval
from pseudolab.errors import ValidationError


def test_nodes_are_increasing_with_exact_center():
    interval = ChebyshevInterval(0.7, 0.3, degree=64)
    assert np.all(np.diff(interval.nodes) > 0)
    assert interval.nodes[interval.center_index] == 0.7
    assert interval.nodes[0] == pytest.approx(0.4)
    assert interval.nodes[-1] == pytest.approx(1.0)
    assert ChebyshevInterval(0.0, 1.0, degree=5).center_index is None


def test_interpolation_is_spectrally_accurate():
    interval = ChebyshevInterval(1.0, 2.0, degree=64)
    series = interval.series(np.exp(interval.nodes))
    x = np.linspace(-1.0, 3.0, 101)
    assert_allclose(series(x), np.exp(x), rtol=1e-12, atol=1e-12)
    assert_allclose(series.nodal_values(), np.exp(interval.nodes), rtol=1e-12, atol=1e-12)


def test_polynomials_chop_to_their_degree():
    interval = ChebyshevInterval(0.0, 1.0, degree=32)
    series = interval.series(interval.nodes ** 2)
    assert np.all(series.coefficients[3:] == 0)
    assert_allclose(series.coefficients[:3], [0.5, 0.0, 0.5], atol=1e-15)


def test_derivative_in_physical_variable():
    interval = ChebyshevInterval(0.5, 1.5, degree=96)
    series = interval.series(np.sin(3 * interval.nodes))
    x = np.linspace(-1.0, 2.0, 41)
    assert_allclose(series.derivative(1)(x), 3 * np.cos(3 * x), atol=1e-11)
    assert_allclose(series.derivative(2)(x), -9 * np.sin(3 * x), atol=1e-9)


def test_antiderivative_vanishes_at_center():
    interval = ChebyshevInterval(2.0, 0.5, degree=64)
    series = interval.series(np.cos(interval.nodes) + 1j * interval.nodes)
    integral = series.antiderivative()
    x = np.linspace(1.5, 2.5, 21)
    expected = np.sin(x) - np.sin(2.0) + 0.5j * (x ** 2 - 4.0)
    assert_allclose(integral(x), expected, atol=1e-13)
    assert abs(integral(2.0)) < 1e-14


def test_products_and_sup_norm():
    interval = ChebyshevInterval(0.0, 2.0, degree=32)
    series = interval.series(interval.nodes)
    square = series.times_values(interval.nodes)
    assert_allclose(square(np.array([1.5, -0.5])), [2.25, 0.25], atol=1e-13)
    assert square.sup_norm() == pytest.approx(4.0)


def test_rejects_bad_input():
    with pytest.raises(ValidationError):
        ChebyshevInterval(0.0, 0.0)
    with pytest.raises(ValidationError):
        ChebyshevInterval(0.0, 1.0, degree=1)
    with pytest.raises(ValidationError):
        ChebyshevInterval(0.0, 1.0, degree=8).coefficients(np.zeros(8))
