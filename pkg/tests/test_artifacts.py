import json
import math

import numpy as np
import pytest

from pseudolab import artifacts
from pseudolab.contours import extract_contours
from pseudolab.diagnostics import compute_spectrum, semigroup_growth
from pseudolab.errors import ValidationError
from pseudolab.operator_core import GridFunction, PotentialSpec, build_hamiltonian
from pseudolab.pseudospec import ResolventGrid


@pytest.fixture
def grid():
    re_axis = np.array([0.0, 0.5, 1.0])
    im_axis = np.array([-1.0, 0.0])
    values = np.array([[1.0, 2.0, 3.0], [4.0, math.inf, 6.0 + 1e-12]])
    return ResolventGrid(re_axis, im_axis, values, matrix_dim=10, sweep_seconds=0.1)


def test_grid_file_layout(grid, tmp_path):
    path = artifacts.write_grid(grid, tmp_path / "grid.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "re,im,resolvent_norm"
    assert lines[1] == "0,-1,1"
    # one blank line between imaginary-part groups
    assert lines[4] == ""
    assert lines[5:] == ["0,0,4", "0.5,0,inf", "1,0,6.0000000000010001"]


def test_grid_file_read_back(grid, tmp_path):
    restored = artifacts.read_grid(artifacts.write_grid(grid, tmp_path / "grid.csv"), matrix_dim=10)
    assert np.array_equal(restored.re_axis, grid.re_axis)
    assert np.array_equal(restored.im_axis, grid.im_axis)
    assert np.array_equal(restored.values, grid.values)
    assert restored.at_eigenvalue[1, 1]


def test_grid_file_must_be_rectangular(tmp_path):
    path = tmp_path / "grid.csv"
    path.write_text("re,im,resolvent_norm\n0,0,1\n1,0,2\n0,1,3\n")
    with pytest.raises(ValidationError):
        artifacts.read_grid(path)
    path.write_text("x,y,z\n0,0,1\n")
    with pytest.raises(ValidationError):
        artifacts.read_grid(path)


def test_contours_file(tmp_path):
    axis = np.arange(-10, 11) / 5.0
    with np.errstate(divide="ignore"):
        values = 1.0 / np.abs(axis[None, :] + 1j * axis[:, None])
    contours = extract_contours(ResolventGrid(axis, axis, values, 1, 0.0), [0.5, 1.0])
    path = artifacts.write_contours(contours, tmp_path / "contours.json")
    data = json.loads(path.read_text())
    assert data["levels"] == [0.5, 1.0]
    assert data["contours"][0]["polylines"][0]["closed"] is True
    restored = artifacts.read_contours(path)
    assert restored.vertex_count() == contours.vertex_count()


def test_eigenvalue_table(tmp_path):
    report = compute_spectrum(build_hamiltonian(PotentialSpec(beta=0.0), 40), 4)
    frame = artifacts.read_eigenvalues(artifacts.write_eigenvalues(report, tmp_path / "eigenvalues.csv"))
    assert frame["k"].tolist() == [1, 2, 3, 4]
    assert frame["re"].tolist() == [1.0, 3.0, 5.0, 7.0]
    assert frame["converged"].all()


def test_pseudomode_table(tmp_path):
    samples = GridFunction.uniform(-1.0, 1.0, 21, lambda x: np.exp(-x ** 2) * (1 + 0.5j * x))
    path = artifacts.write_pseudomode(samples, tmp_path / artifacts.pseudomode_filename(0.05))
    assert path.name == "pseudomode_h0.05.csv"
    restored = artifacts.read_pseudomode(path)
    assert np.array_equal(restored.nodes, samples.nodes)
    assert np.array_equal(restored.values, samples.values)
    assert artifacts.pseudomode_filename(0.025, physical=True) == "pseudomode_h0.025_physical.csv"


def test_semigroup_table(tmp_path):
    growth = semigroup_growth(PotentialSpec(), [10, 20], 1.0, steps=3, threads=1)
    frame = artifacts.read_semigroup(artifacts.write_semigroup(growth, tmp_path / "semigroup.csv"))
    assert len(frame) == 6
    assert frame["N"].tolist() == [10, 10, 10, 20, 20, 20]
    assert frame["norm"].iloc[0] == 1.0


def test_frontier_table(tmp_path):
    rows = [
        {"modulus": 10.0, "lam": 9.8 + 2.0j, "epsilon": 0.5, "N": 400, "trusted": True},
        {"modulus": 20.0, "lam": 19.6 + 4.0j, "epsilon": 0.01, "N": 1500, "trusted": False},
    ]
    frame = artifacts.read_frontier(artifacts.write_frontier(rows, tmp_path / "frontier.csv"))
    assert list(frame.columns) == artifacts.FRONTIER_COLUMNS
    assert frame["im"].tolist() == [2.0, 4.0]
    assert frame["trusted"].tolist() == [True, False]


def test_json_conversion(tmp_path):
    payload = {
        "array": np.array([1.0, math.nan]),
        "complex": 2.0 + 1.0j,
        "scalar": np.float64(0.25),
        "nested": ({"inf": math.inf},),
    }
    assert artifacts.jsonable(payload) == {
        "array": [1.0, None],
        "complex": [2.0, 1.0],
        "scalar": 0.25,
        "nested": [{"inf": None}],
    }
    path = artifacts.write_json(payload, artifacts.output_dir(tmp_path / "a" / "b") / "report.json")
    assert artifacts.read_json(path)["complex"] == [2.0, 1.0]
