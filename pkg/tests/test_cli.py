import json

import pytest

from pseudolab import artifacts
from pseudolab.cli import build_parser, main
from pseudolab.operator_core import read_matrix


def _run(tmp_path, *args):
    return main(list(args) + ["--output", str(tmp_path), "--threads", "2", "--log-level", "WARNING"])


def test_parser_knows_every_command():
    parser = build_parser()
    for command in ["pseudospectrum", "wkb-certify", "exponent", "diagnostics", "matrix-dump"]:
        args = parser.parse_args([command, "--N", "10"])
        assert args.command == command
        assert args.N == "10"
    with pytest.raises(SystemExit):
        parser.parse_args(["plot"])


def test_invalid_grid_exits_with_2(tmp_path):
    assert _run(tmp_path, "pseudospectrum", "--nx", "0") == 2
    assert not (tmp_path / "grid.csv").exists()


def test_bad_config_file_exits_with_2(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[operator]\ncolour = red\n")
    assert _run(tmp_path, "matrix-dump", "--config", str(path)) == 2


def test_matrix_dump(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[operator]\nN = 10\nn = 1\n")
    assert _run(tmp_path, "matrix-dump", "--config", str(path)) == 0
    A = read_matrix(str(tmp_path / "matrix.txt"))
    assert A.dim == 10
    assert A.bandwidth == 3


def test_pseudospectrum_run(tmp_path):
    # (4.1, 0) sits next to the eigenvalue 4.109, so both levels leave through the right edge
    code = _run(tmp_path, "pseudospectrum", "--N", "40", "--nx", "9", "--ny", "5",
                "--re-min", "-10", "--re-max", "4.1", "--im-min", "-2", "--im-max", "2",
                "--epsilons", "0.1, 1", "--k-max", "5", "--trust-stride", "2")
    assert code == 0
    grid = artifacts.read_grid(tmp_path / "grid.csv")
    assert grid.shape == (5, 9)
    report = json.loads((tmp_path / "report.json").read_text())
    assert all(report["checks"].values())
    assert report["checks"]["open"]
    assert sorted(report["open_levels"]) == [0.1, 1.0]
    assert report["matrix_dim"] == 40
    assert len(report["config_hash"]) == 64
    assert len(report["sandwich"]) == 2
    assert (tmp_path / "contours.json").exists()
    assert len(artifacts.read_eigenvalues(tmp_path / "eigenvalues.csv")) == 5
    assert not (tmp_path / "pseudospectrum.png").exists()


def test_closed_contours_exit_with_3(tmp_path):
    # every level is a ring of circles around 1, 3, ..., 15
    code = _run(tmp_path, "pseudospectrum", "--beta", "0", "--N", "40", "--nx", "65", "--ny", "17",
                "--re-min", "0.1", "--re-max", "16.1", "--im-min", "-2", "--im-max", "2",
                "--epsilons", "0.5", "--k-max", "5")
    assert code == 3
    report = json.loads((tmp_path / "report.json").read_text())
    checks = report.pop("checks")
    assert checks.pop("open") is False
    assert all(checks.values())
    assert report["open_levels"] == []


def test_wkb_certify_outside_region_exits_with_2(tmp_path):
    assert _run(tmp_path, "wkb-certify", "--lambda0=-1+i") == 2


def test_wkb_certify_degenerate_point_exits_with_3(tmp_path):
    # lambda0 = 5 lies in the region but has no turning point with Im lambda > 0
    assert _run(tmp_path, "wkb-certify", "--lambda0", "5", "--h-ladder", "0.05") == 3


def test_wkb_certify_single_rung(tmp_path):
    assert _run(tmp_path, "wkb-certify", "--h-ladder", "0.05") == 0
    certificate = json.loads((tmp_path / "certificate.json").read_text())
    assert certificate["slope_fit"] is None
    assert certificate["checks"] == {"cross_link": True}
    assert len(certificate["points"]) == 1
    point = certificate["points"][0]
    assert point["h"] == 0.05
    assert point["tau"] == pytest.approx(0.05 ** -0.4)
    assert point["lambda_phys"] == pytest.approx([2.0 * 0.05 ** -1.2, 0.05 ** -1.2])
    link = point["cross_link"]
    assert link["N"] == 400
    assert link["upper_bound"] and link["consistent"]
    assert link["projected_residual"] >= link["s_min"] * (1.0 - 1e-8)
    assert 0.1 <= link["agreement_factor"] <= 10.0
    assert point["inequality_holds"] is None
    assert (tmp_path / "pseudomode_h0.05.csv").exists()
    physical = artifacts.read_pseudomode(tmp_path / "pseudomode_h0.05_physical.csv")
    semiclassical = artifacts.read_pseudomode(tmp_path / "pseudomode_h0.05.csv")
    assert physical.norm() == pytest.approx(semiclassical.norm(), rel=1e-9)


def test_wkb_certify_links_off_axis_point(tmp_path):
    assert _run(tmp_path, "wkb-certify", "--lambda0", "3+2i", "--h-ladder", "0.05, 0.04") == 0
    certificate = json.loads((tmp_path / "certificate.json").read_text())
    assert certificate["checks"]["cross_link"]
    for point in certificate["points"]:
        tau = point["tau"]
        assert point["lambda_phys"] == pytest.approx([3.0 * tau ** 3, 2.0 * tau ** 3])
        link = point["cross_link"]
        assert link["consistent"]
        assert 0.1 <= link["agreement_factor"] <= 10.0


def test_exponent_ray_outside_region_exits_with_2(tmp_path):
    assert _run(tmp_path, "exponent", "--theta", "1.5") == 2


def test_exponent_for_harmonic_oscillator(tmp_path):
    code = _run(tmp_path, "exponent", "--beta", "0", "--N", "50", "--n-cap", "200",
                "--modulus-min", "10", "--modulus-max", "60", "--modulus-count", "8")
    assert code == 0
    fit = json.loads((tmp_path / "fit.json").read_text())
    assert fit["target"] == 1.0
    assert fit["exponent"] == pytest.approx(1.0, abs=0.05)
    assert fit["points_used"] == 8
    assert "calibration" not in fit
    frontier = artifacts.read_frontier(tmp_path / "frontier.csv")
    assert frontier["trusted"].all()


@pytest.mark.slow
def test_exponent_of_cubic_oscillator(tmp_path):
    assert _run(tmp_path, "exponent") == 0
    fit = json.loads((tmp_path / "fit.json").read_text())
    assert 0.70 <= fit["exponent"] <= 0.95
    assert fit["points_used"] >= 3


def test_diagnostics_run(tmp_path):
    code = _run(tmp_path, "diagnostics", "--N", "100", "--k-max", "8",
                "--n-ladder", "20, 40", "--t-max", "1", "--t-steps", "5")
    assert code == 0
    report = json.loads((tmp_path / "eigen_report.json").read_text())
    assert all(report["checks"].values())
    assert report["tameness"]["verdict"] in ("tame", "not tame at this scale", "inconclusive")
    assert report["semigroup"]["dims"] == [20, 40]
    assert len(artifacts.read_semigroup(tmp_path / "semigroup.csv")) == 10


@pytest.mark.slow
def test_default_pseudospectrum_run(tmp_path):
    assert _run(tmp_path, "pseudospectrum") == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["matrix_dim"] == 400
    assert all(report["checks"].values())
    assert len(report["open_levels"]) == 33
    assert artifacts.read_grid(tmp_path / "grid.csv").shape == (160, 200)
