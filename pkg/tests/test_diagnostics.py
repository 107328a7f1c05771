import logging

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.stats import linregress

from pseudolab.diagnostics import (
    EigenReport,
    compute_spectrum,
    conjugate_pairing_error,
    resolvent_consistency,
    semigroup_curve,
    semigroup_growth,
    span_residual,
    tameness_test,
)
from pseudolab.errors import DefectivePairWarning, InsufficientDataError, ValidationError
from pseudolab.operator_core import BandedComplexMatrix, PotentialSpec, build_hamiltonian


@pytest.fixture(scope="module")
def oscillator_report():
    A = build_hamiltonian(PotentialSpec(beta=0.0), 200)
    return A, compute_spectrum(A, 20)


@pytest.fixture(scope="module")
def cubic_report():
    A = build_hamiltonian(PotentialSpec(), 200)
    return A, compute_spectrum(A, 20)


def _report(norms):
    norms = np.asarray(norms, dtype=float)
    count = norms.size
    return EigenReport(
        eigenvalues=np.arange(1.0, count + 1.0) + 0j,
        overlaps=1.0 / norms,
        projection_norms=norms,
        converged=np.ones(count, dtype=bool),
        matrix_dim=4 * count,
    )


def test_oscillator_spectrum(oscillator_report):
    _, report = oscillator_report
    assert report.k_max == 20
    assert report.refined_dim == 300
    assert_allclose(report.eigenvalues, 2.0 * np.arange(20) + 1.0, rtol=1e-10)
    assert_allclose(report.projection_norms, 1.0, rtol=1e-10)
    assert report.converged.all()
    assert conjugate_pairing_error(report) < 1e-12


def test_cubic_spectrum(cubic_report):
    _, report = cubic_report
    assert report.matrix_dim == 200
    assert np.all(np.diff(report.eigenvalues.real) >= 0)
    assert np.all(report.projection_norms >= 1.0 - 1e-12)
    assert report.converged[:5].all()
    assert np.all(np.abs(report.eigenvalues[:5].imag) < 1e-8)
    assert report.projection_norms[9] > report.projection_norms[0]
    scale = np.max(np.abs(report.eigenvalues[report.converged]))
    assert conjugate_pairing_error(report, converged_only=True) <= 1e-8 * scale


def test_report_dict(cubic_report):
    _, report = cubic_report
    data = report.to_dict()
    assert len(data["eigenvalues"]) == 20
    assert data["converged_count"] == report.converged_count
    assert len(data["refined_projection_norms"]) == 20
    assert report.projection_agreement().shape == (20,)


def test_k_max_is_clipped(caplog):
    A = build_hamiltonian(PotentialSpec(), 20)
    with caplog.at_level(logging.WARNING, logger="pseudolab.diagnostics"):
        report = compute_spectrum(A, 10)
    assert report.k_max == 5
    assert "clipped" in caplog.text
    with pytest.raises(ValidationError):
        compute_spectrum(A, 0)


def test_plain_matrix_is_not_refined():
    A = BandedComplexMatrix.from_diagonals({0: np.arange(1.0, 9.0)}, 8, 0)
    report = compute_spectrum(A, 2)
    assert report.refined_dim is None
    assert report.projection_agreement() is None
    assert report.converged.all()


def test_defective_pair_is_flagged():
    A = BandedComplexMatrix.from_dense(np.array([[1.0, 1.0], [0.0, 1.0]], dtype=complex), 1)
    with pytest.warns(DefectivePairWarning):
        report = compute_spectrum(A, 1, refine=False)
    assert np.isinf(report.projection_norms[0])
    assert report.to_dict()["projection_norms"] == [None]


def test_span_of_oscillator_eigenvectors(oscillator_report):
    _, report = oscillator_report
    assert np.max(span_residual(report, 10)) < 1e-12
    # e_21 is outside the span of the first twenty eigenvectors
    assert span_residual(report, 21)[20] == pytest.approx(1.0)


def test_tameness_of_normal_operator(oscillator_report):
    _, report = oscillator_report
    verdict = tameness_test(report)
    assert verdict.verdict == "tame"
    assert verdict.alpha == pytest.approx(0.0, abs=1e-12)
    assert verdict.prefactor == pytest.approx(1.0)
    assert verdict.points == 20


def test_tameness_verdicts():
    k = np.arange(1, 13)
    assert tameness_test(_report(np.sqrt(k))).verdict == "tame"
    exponential = tameness_test(_report(2.0 ** k))
    assert exponential.verdict == "not tame at this scale"
    assert exponential.bound_violated
    assert exponential.exponential_rate == pytest.approx(np.log(2.0))
    with pytest.raises(InsufficientDataError):
        tameness_test(_report(np.ones(5)))


def test_unitary_group_of_normal_operator(oscillator_report):
    A, _ = oscillator_report
    curve = semigroup_curve(A, 2.0, steps=9, threads=2)
    assert curve.method == "eigendecomposition"
    assert curve.norms[0] == 1.0
    assert_allclose(curve.norms, 1.0, atol=1e-10)
    assert not curve.overflow


def test_group_norm_of_cubic_operator():
    A = build_hamiltonian(PotentialSpec(), 40)
    curve = semigroup_curve(A, 1.0, steps=6, threads=1)
    assert curve.times[-1] == 1.0
    assert curve.norms[0] == 1.0
    assert np.all(curve.norms >= 1.0 - 1e-6)


def test_group_rejects_bad_times(oscillator_report):
    A, _ = oscillator_report
    with pytest.raises(ValidationError):
        semigroup_curve(A, 0.0)
    with pytest.raises(ValidationError):
        semigroup_curve(A, 1.0, steps=1)


def test_growth_over_truncation_sizes():
    growth = semigroup_growth(PotentialSpec(), [40, 20], 1.0, steps=5, threads=1)
    assert growth.dims == [20, 40]
    data = growth.to_dict()
    assert data["dims"] == [20, 40]
    assert len(data["suprema"]) == 2
    assert all(s >= 1.0 for s in growth.suprema)


def test_resolvent_near_eigenvalues(oscillator_report):
    A, report = oscillator_report
    spots = resolvent_consistency(A, report, count=3)
    assert [s.k for s in spots] == [1, 2, 3]
    for spot in spots:
        assert spot.ratio == pytest.approx(1.0, rel=1e-6)
        assert spot.to_dict()["k"] == spot.k


@pytest.fixture(scope="module")
def large_cubic_report():
    return compute_spectrum(build_hamiltonian(PotentialSpec(), 600), 10)


@pytest.mark.slow
def test_cubic_eigenvalues_are_real(large_cubic_report):
    report = large_cubic_report
    assert report.refined_dim == 900
    assert report.converged.all()
    assert np.all(np.abs(report.eigenvalues.imag) < 1e-6)
    assert_allclose(report.eigenvalues, report.refined_eigenvalues, rtol=1e-6)


@pytest.mark.slow
def test_projection_norms_grow_exponentially(large_cubic_report):
    report = large_cubic_report
    k = np.arange(3, 11)
    norms = report.projection_norms[2:10]
    assert report.converged[2:10].all()
    assert np.all(np.diff(norms) > 0)
    assert norms[-1] / norms[0] > 10.0
    exponential = linregress(k, np.log(norms))
    polynomial = linregress(np.log(k), np.log(norms))
    assert exponential.rvalue ** 2 > polynomial.rvalue ** 2
    assert np.all(report.projection_agreement()[2:10] <= 0.01)


@pytest.mark.slow
def test_group_bound_grows_with_truncation():
    growth = semigroup_growth(PotentialSpec(), [100, 200, 400], 5.0)
    assert growth.dims == [100, 200, 400]
    assert growth.strictly_increasing()
    normal = semigroup_growth(PotentialSpec(beta=0.0), [100, 200, 400], 5.0)
    assert_allclose(normal.suprema, 1.0, atol=1e-10)
