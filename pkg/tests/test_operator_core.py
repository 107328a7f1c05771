import io
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from pseudolab.errors import BoundaryValueWarning, ValidationError
from pseudolab.operator_core import (
    BandedComplexMatrix,
    GridFunction,
    PotentialSpec,
    apply_hamiltonian,
    build_hamiltonian,
    build_momentum_matrix,
    build_position_matrix,
    hermite_coefficients,
    hermite_functions,
    min_hermitian_eigenvalue,
    position_power,
    pt_defect,
    read_matrix,
    synthesize,
    write_matrix,
)


def test_semiclassical_quadratic_coefficient():
    spec = PotentialSpec(beta=1.0, n=1, semiclassical_h=0.01)
    assert spec.quadratic_coefficient == pytest.approx(0.01 ** 0.4)
    assert spec.kinetic_coefficient == pytest.approx(1e-4)
    assert PotentialSpec(n=2, semiclassical_h=0.1).quadratic_coefficient == pytest.approx(0.1 ** (6 / 7))
    assert PotentialSpec().quadratic_coefficient == 1.0


@pytest.mark.parametrize("kwargs", [{"n": 0}, {"n": 1.5}, {"beta": math.nan}, {"semiclassical_h": 0.0},
                                    {"semiclassical_h": -0.1}])
def test_potential_spec_rejects(kwargs):
    with pytest.raises(ValidationError):
        PotentialSpec(**kwargs)


def test_potential_spec_family():
    spec = PotentialSpec(beta=2.0, n=2)
    assert spec.power == 5
    family = spec.with_h(0.05)
    assert family.is_semiclassical
    assert family.physical() == spec
    x = np.array([0.5, -1.0])
    assert_allclose(spec.potential(x), x ** 2 + 2j * x ** 5)
    assert_allclose(spec.potential_derivative(x), 2 * x + 10j * x ** 4)


@pytest.mark.parametrize("beta,n", [(1.0, 1), (1.0, 2)])
@pytest.mark.parametrize("N", [100, 400])
def test_structure_invariants(beta, n, N):
    A = build_hamiltonian(PotentialSpec(beta=beta, n=n), N)
    assert A.dim == N
    assert A.basis_tag == "hermite"
    assert A.bandwidth == 2 * n + 1
    assert A.occupied_bandwidth() == 2 * n + 1
    assert pt_defect(A) == 0.0

    dense = A.to_dense()
    assert not np.any(np.triu(dense, k=2 * n + 2))
    assert not np.any(np.tril(dense, k=-(2 * n + 2)))

    herm = 0.5 * (dense + dense.conj().T)
    assert_array_equal(herm, np.diag(2.0 * np.arange(N) + 1.0))
    anti = 0.5 * (dense - dense.conj().T)
    assert not np.any(anti.real)
    assert_array_equal(anti.imag, anti.imag.T)


def test_cubic_matrix_elements():
    A = build_hamiltonian(PotentialSpec(), 20)
    assert A.entry(0, 0) == 1.0
    assert A.entry(0, 1) == pytest.approx(3j / (2 * math.sqrt(2)))
    assert A.entry(0, 3) == pytest.approx(1j * math.sqrt(3) / 2)
    assert A.entry(0, 2) == 0
    assert A.entry(0, 5) == 0
    # the last rows are not cut short by the truncation
    full = position_power(30, 3).toarray()
    assert_allclose(A.to_dense().imag, full[:20, :20], atol=1e-13)


def test_harmonic_oscillator_is_diagonal():
    A = build_hamiltonian(PotentialSpec(beta=0.0), 1)
    assert A.dim == 1 and A.bandwidth == 0
    A = build_hamiltonian(PotentialSpec(beta=0.0), 50)
    assert_array_equal(A.diagonal(), 2.0 * np.arange(50) + 1.0)


def test_too_small_truncation():
    with pytest.raises(ValidationError):
        build_hamiltonian(PotentialSpec(n=1), 3)
    with pytest.raises(ValidationError):
        build_hamiltonian(PotentialSpec(n=2), 5)
    with pytest.raises(ValidationError):
        build_hamiltonian(PotentialSpec(beta=0.0), 0)
    assert build_hamiltonian(PotentialSpec(n=1), 4).dim == 4


def test_accretive_lower_bound():
    A = build_hamiltonian(PotentialSpec(), 200)
    assert min_hermitian_eigenvalue(A) == pytest.approx(1.0, abs=1e-10)


def test_semiclassical_matrix():
    spec = PotentialSpec(semiclassical_h=0.1)
    A = build_hamiltonian(spec, 60)
    assert A.bandwidth == 3
    assert pt_defect(A) == 0.0
    # h^2 K + c_h X^2 is positive definite
    assert min_hermitian_eigenvalue(A) > 0
    K = build_momentum_matrix(60, padding=2).to_dense()
    X = build_position_matrix(60, padding=2).to_dense()
    quadratic = (0.01 * (K.conj().T @ K) + 0.1 ** 0.4 * (X @ X))[:60, :60]
    assert_allclose(A.to_dense().real, quadratic.real, atol=1e-12)


def test_band_storage():
    dense = np.array([[1, 2, 0], [3, 4, 5], [0, 6, 7]], dtype=complex)
    A = BandedComplexMatrix.from_dense(dense, 1)
    assert_array_equal(A.to_dense(), dense)
    assert_array_equal(A.diagonal(-1), [3, 6])
    assert A.entry(0, 2) == 0
    assert_allclose(A.matvec(np.ones(3)), dense @ np.ones(3))
    assert_allclose(A.rmatvec(np.ones(3)), dense.conj().T @ np.ones(3))
    assert_array_equal(A.shifted(1.0).diagonal(), [0, 3, 6])
    with pytest.raises(ValidationError):
        BandedComplexMatrix.from_dense(dense, 0)
    with pytest.raises(ValueError):
        A.bands[0, 0] = 1.0


def test_matrix_file_round_trip(tmp_path):
    A = build_hamiltonian(PotentialSpec(n=2), 12)
    path = str(tmp_path / "matrix.txt")
    write_matrix(A, path)
    with open(path) as stream:
        assert stream.readline().split() == ["12", "5"]
    B = read_matrix(path)
    assert_array_equal(B.to_dense(), A.to_dense())

    with pytest.raises(ValidationError):
        read_matrix(io.StringIO("3 0\n0 2 1.0 0.0\n"))


def test_hermite_functions_orthonormal():
    f = GridFunction.uniform(-15, 15, 3001)
    basis = hermite_functions(30, f.nodes)
    gram = (basis * f.quadrature_weights) @ basis.T
    assert_allclose(gram, np.eye(30), atol=1e-10)


def test_projection_and_synthesis():
    x = np.linspace(-15, 15, 3001)
    c = np.zeros(10, dtype=complex)
    c[[0, 3, 7]] = [1.0, 0.5j, -0.25]
    f = GridFunction.from_samples(x, synthesize(c, x))
    assert_allclose(hermite_coefficients(f, 10), c, atol=1e-10)


def test_apply_hamiltonian_ground_state():
    f = GridFunction.uniform(-12, 12, 2401, lambda x: np.pi ** -0.25 * np.exp(-0.5 * x ** 2))
    image = apply_hamiltonian(PotentialSpec(beta=0.0), f)
    assert_allclose(image.values, f.values, atol=1e-8)


def test_apply_hamiltonian_matches_matrix():
    spec = PotentialSpec()
    A = build_hamiltonian(spec, 24)
    rng = np.random.default_rng(3)
    v = np.zeros(24, dtype=complex)
    v[:10] = rng.standard_normal(10) + 1j * rng.standard_normal(10)
    x = np.linspace(-16, 16, 6401)
    f = GridFunction.from_samples(x, synthesize(v, x))
    image = apply_hamiltonian(spec, f)
    expected = synthesize(A.matvec(v), x)
    assert np.linalg.norm(image.values - expected) <= 1e-7 * np.linalg.norm(expected)


def test_apply_hamiltonian_boundary_warning():
    f = GridFunction.uniform(-1, 1, 64, lambda x: np.ones_like(x))
    with pytest.warns(BoundaryValueWarning):
        apply_hamiltonian(PotentialSpec(), f)


def test_apply_hamiltonian_rejects_bad_grids():
    with pytest.raises(ValidationError):
        apply_hamiltonian(PotentialSpec(), GridFunction.uniform(-1, 1, 8))
    nodes = np.concatenate([np.linspace(-5, 0, 20), np.linspace(0.5, 5, 10)])
    with pytest.raises(ValidationError):
        apply_hamiltonian(PotentialSpec(), GridFunction.from_samples(nodes, np.zeros(30)))
