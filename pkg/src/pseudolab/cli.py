"""
cli.py

The cli module is the command-line front door of pseudolab.  Each
subcommand resolves an ExperimentConfig, runs one experiment and writes
its artifacts into the output directory:

    pseudospectrum   grid.csv, contours.json, eigenvalues.csv, report.json [, pseudospectrum.png]
    wkb-certify      pseudomode_h*.csv, certificate.json
    exponent         frontier.csv, fit.json
    diagnostics      eigen_report.json, semigroup.csv, eigenvalues.csv
    matrix-dump      matrix.txt

Exit codes: 0 success, 2 invalid input, 3 numerical failure or a broken
invariant.
"""

import argparse
import cmath
import functools
import logging
import math
import sys
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
from scipy.stats import linregress

from . import artifacts
from .config import OPTIONS, ExperimentConfig
from .contours import contours_nested, extract_contours, open_levels, vertices_within
from .diagnostics import (
    compute_spectrum,
    conjugate_pairing_error,
    resolvent_consistency,
    semigroup_growth,
    span_residual,
    tameness_test,
)
from .errors import (
    InsufficientDataError,
    InvariantViolationError,
    PseudolabError,
    ValidationError,
)
from .operator_core import BandedComplexMatrix, PotentialSpec, build_hamiltonian, write_matrix
from .pool import run_parallel
from .pseudospec import sandwich_check, smallest_singular_value, sweep_grid, trusted_window
from .scaling import (
    RegionSpec,
    ScalingParams,
    bound_region,
    calibrate_constant,
    in_lambda_region,
    matrix_residual_bound,
    region_exponent,
    unscale_pseudomode,
)
from .wkb import certify_ladder

logger = logging.getLogger(__name__)

# -----------------------------------------------------------------------

# Default Sizes and Values

_LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
_ESCALATION_FACTOR = 1.5
_ESCALATION_TOLERANCE = 0.01
_PAIRING_TOLERANCE = 1e-8
_PROJECTION_FLOOR_SLACK = 1e-10
_LINK_SLACK = 10.0
_LINK_RTOL = 1e-8
_LINK_FLOOR = 1e-12
_MIN_FIT_POINTS = 3

# -----------------------------------------------------------------------


def _report_header(config: ExperimentConfig) -> dict:
    return {"config": config.to_dict(), "config_hash": config.content_hash()}


def _raise_on_failed_checks(checks: Dict[str, bool], where: str) -> None:
    failed = sorted(name for name, ok in checks.items() if not ok)
    if failed:
        raise InvariantViolationError("%s: invariant(s) violated: %s" % (where, ", ".join(failed)), failed=failed)


@functools.lru_cache(maxsize=16)
def _hamiltonian(spec: PotentialSpec, N: int) -> BandedComplexMatrix:
    return build_hamiltonian(spec, N)


# -----------------------------------------------------------------------


def cmd_pseudospectrum(config: ExperimentConfig) -> Dict[str, Path]:
    """Sweep the resolvent norm, extract the epsilon contours and check the inclusions.

    @raises InvariantViolationError: after writing every file, if any check failed
    """
    started = time.perf_counter()
    out = artifacts.output_dir(config.output)
    A = build_hamiltonian(config.potential(), config.N)

    grid = sweep_grid(A, config.re_range, config.im_range, config.nx, config.ny, threads=config.threads)
    contours = extract_contours(grid, config.epsilons)
    report = compute_spectrum(A, config.k_max)
    trust = trusted_window(A, grid, stride=config.trust_stride, threads=config.threads)
    sandwich = [sandwich_check(A, grid, eps, eigenvalues=report.all_eigenvalues) for eps in config.epsilons]

    opened = open_levels(contours)
    checks = {
        "lipschitz": grid.lipschitz_violations == 0,
        "sandwich": all(s.ok for s in sandwich),
        "open": all(eps in opened for eps in config.epsilons),
        "nested": contours_nested(grid, contours),
        "vertices_within_window": vertices_within(grid, contours),
    }
    written = {
        "grid": artifacts.write_grid(grid, out / "grid.csv"),
        "contours": artifacts.write_contours(contours, out / "contours.json"),
        "eigenvalues": artifacts.write_eigenvalues(report, out / "eigenvalues.csv"),
    }
    if config.render:
        from .draw import render_pseudospectrum

        trusted_box = None
        if trust.re_cutoff is not None:
            trusted_box = (config.re_min, trust.re_cutoff, config.im_min, config.im_max)
        written["figure"] = Path(
            render_pseudospectrum(grid, contours, report.all_eigenvalues, str(out / "pseudospectrum.png"),
                                  trusted=trusted_box)
        )

    payload = _report_header(config)
    payload.update(
        {
            "matrix_dim": A.dim,
            "bandwidth": A.bandwidth,
            "timing": {"sweep_seconds": grid.sweep_seconds, "total_seconds": time.perf_counter() - started},
            "dense_svd_fallbacks": grid.fallback_count,
            "eigenvalue_points": int(np.count_nonzero(grid.at_eigenvalue)),
            "lipschitz_violations": grid.lipschitz_violations,
            "trusted": trust.to_dict(),
            "sandwich": [s.to_dict() for s in sandwich],
            "open_levels": opened,
            "contour_vertices": contours.vertex_count(),
            "checks": checks,
        }
    )
    written["report"] = artifacts.write_json(payload, out / "report.json")
    logger.info("pseudospectrum artifacts written to %s", out)
    _raise_on_failed_checks(checks, "pseudospectrum")
    return written


# -----------------------------------------------------------------------


def _cross_link(A: BandedComplexMatrix, unscaled) -> dict:
    """Compare a physical-plane certificate with the Hermite truncation at the same lambda.

    The projected residual must bound s_min(A - lambda) from above and agree
    with the physical residual to within the basis-truncation slack; values
    below the floor count as equal to it.
    """
    lam = unscaled.lambda_phys
    result = smallest_singular_value(A, lam)
    projected = matrix_residual_bound(unscaled.samples, A, lam)
    sigma = result.sigma
    floor = _LINK_FLOOR * max(1.0, abs(lam))
    agreement = max(projected, floor) / max(unscaled.residual_phys, floor)
    upper_bound = projected >= sigma * (1.0 - _LINK_RTOL) - floor
    within_slack = 1.0 / _LINK_SLACK <= agreement <= _LINK_SLACK
    return {
        "N": A.dim,
        "s_min": sigma,
        "resolvent_norm": result.resolvent_norm,
        "projected_residual": projected,
        "agreement_factor": agreement,
        "upper_bound": bool(upper_bound),
        "consistent": bool(upper_bound and within_slack),
    }


def cmd_wkb_certify(config: ExperimentConfig) -> Dict[str, Path]:
    """Certify WKB pseudomodes over the h-ladder and carry them to the physical plane.

    @raises ValidationError: if lambda0 lies outside the semiclassical pseudospectrum
    @raises InvariantViolationError: after writing every file, if a projected residual is
        inconsistent with the Hermite truncation
    """
    lam = config.lambda0
    if not in_lambda_region(lam):
        raise ValidationError("lambda0=%s lies outside the semiclassical pseudospectrum" % lam, lambda0=lam)
    out = artifacts.output_dir(config.output)
    spec = config.potential()

    certificate = certify_ladder(
        lam, config.h_ladder, spec,
        transport_order=config.transport_order,
        plateau_fraction=config.plateau_fraction,
        threads=config.threads,
    )
    link_matrix = build_hamiltonian(spec, config.link_n)

    written: Dict[str, Path] = {}
    entries = []
    frontier = []
    for point in certificate.points:
        params = ScalingParams.from_h(point.h, spec.n)
        unscaled = unscale_pseudomode(point.mode, params, certificate.decay_constant)
        written["h=%g" % point.h] = artifacts.write_pseudomode(
            point.mode.samples, out / artifacts.pseudomode_filename(point.h))
        written["h=%g physical" % point.h] = artifacts.write_pseudomode(
            unscaled.samples, out / artifacts.pseudomode_filename(point.h, physical=True))
        entry = point.to_dict()
        entry.update(
            {
                "tau": params.tau,
                "lambda_phys": unscaled.lambda_phys,
                "residual_phys": unscaled.residual_phys,
                "inequality_holds": unscaled.inequality_holds,
                "cross_link": _cross_link(link_matrix, unscaled),
            }
        )
        entries.append(entry)
        frontier.append((abs(unscaled.lambda_phys), unscaled.residual_phys))

    region = None
    try:
        calibration = calibrate_constant(frontier, spec.n)
        epsilon = min(e for _, e in calibration.points)
        bound = bound_region(RegionSpec(config.delta, calibration.B_const, config.region_a), epsilon, spec.n)
        region = {"calibration": calibration.to_dict(), "region": bound.to_dict()}
    except ValidationError as exc:
        logger.warning("no bound region: %s", exc)

    payload = _report_header(config)
    payload.update(certificate.to_dict())
    checks = {"cross_link": all(entry["cross_link"]["consistent"] for entry in entries)}
    payload.update(
        {
            "points": entries,
            "bound_region": region,
            "exponent": region_exponent(spec.n),
            "checks": checks,
        }
    )
    written["certificate"] = artifacts.write_json(payload, out / "certificate.json")
    logger.info("certificate written to %s", out)
    _raise_on_failed_checks(checks, "wkb-certify")
    return written


# -----------------------------------------------------------------------


def _frontier_point(spec: PotentialSpec, lam: complex, start_dim: int, cap: int) -> dict:
    """s_min(A_N - lam) with N grown by 1.5x until two sizes agree to 1%."""
    N = start_dim
    sigma = smallest_singular_value(_hamiltonian(spec, N), lam).sigma
    while True:
        larger = int(math.ceil(_ESCALATION_FACTOR * N))
        if larger > cap:
            logger.warning("point %s untrusted: no 1%% agreement up to N=%d", lam, N)
            return {"modulus": abs(lam), "lam": lam, "epsilon": sigma, "N": N, "trusted": False}
        refined = smallest_singular_value(_hamiltonian(spec, larger), lam).sigma
        if abs(refined - sigma) <= _ESCALATION_TOLERANCE * max(refined, sigma):
            return {"modulus": abs(lam), "lam": lam, "epsilon": refined, "N": larger, "trusted": True}
        N, sigma = larger, refined


def cmd_exponent_experiment(config: ExperimentConfig) -> Dict[str, Path]:
    """Fit the growth of log(1/eps) along the ray arg lambda = theta.

    For beta != 0 the slope of log log(1/eps) against log|lambda| is
    compared with (2n+3)/(2(2n+1)).  For beta = 0 the slope of log eps
    against log|lambda| is compared with 1.

    @raises ValidationError: if the ray leaves the semiclassical pseudospectrum
    @raises InsufficientDataError: with fewer than 3 usable trusted points
    """
    direction = cmath.exp(1j * config.theta)
    if not in_lambda_region(direction, config.delta):
        raise ValidationError("ray theta=%g is outside the semiclassical pseudospectrum" % config.theta,
                              theta=config.theta)
    out = artifacts.output_dir(config.output)
    spec = config.potential()
    moduli = np.geomspace(config.modulus_min, config.modulus_max, config.modulus_count)

    rows = run_parallel(lambda r: _frontier_point(spec, complex(r * direction), config.N, config.n_cap),
                        list(moduli), config.threads)

    normal = config.beta == 0
    usable = [r for r in rows if r["trusted"] and r["epsilon"] > 0 and (normal or r["epsilon"] < 1)]
    if len(usable) < _MIN_FIT_POINTS:
        artifacts.write_frontier(rows, out / "frontier.csv")
        raise InsufficientDataError("exponent fit needs %d trusted points, got %d" % (_MIN_FIT_POINTS, len(usable)),
                                    untrusted=[r["modulus"] for r in rows if not r["trusted"]])

    x = np.log([r["modulus"] for r in usable])
    if normal:
        y = np.log([r["epsilon"] for r in usable])
        target, model = 1.0, "log(eps) vs log|lambda|"
    else:
        y = np.log(np.log([1.0 / r["epsilon"] for r in usable]))
        target, model = 1.0 / region_exponent(spec.n), "log(log(1/eps)) vs log|lambda|"
    fit = linregress(x, y)
    logger.info("exponent fit: %.4f (target %.4f), R^2 %.4f", fit.slope, target, fit.rvalue ** 2)

    payload = _report_header(config)
    payload.update(
        {
            "model": model,
            "exponent": float(fit.slope),
            "intercept": float(fit.intercept),
            "r_squared": float(fit.rvalue ** 2),
            "target": target,
            "points_used": len(usable),
            "untrusted": [r["modulus"] for r in rows if not r["trusted"]],
            "excluded": [r["modulus"] for r in rows if r["trusted"] and r not in usable],
        }
    )
    if not normal:
        payload["calibration"] = calibrate_constant(
            [(r["modulus"], r["epsilon"]) for r in usable], spec.n).to_dict()
    written = {
        "frontier": artifacts.write_frontier(rows, out / "frontier.csv"),
        "fit": artifacts.write_json(payload, out / "fit.json"),
    }
    return written


# -----------------------------------------------------------------------


def cmd_diagnostics(config: ExperimentConfig) -> Dict[str, Path]:
    """Eigenvalues, projection norms, the tameness verdict and semigroup growth.

    @raises InvariantViolationError: after writing every file, if any check failed
    """
    out = artifacts.output_dir(config.output)
    spec = config.potential()
    A = build_hamiltonian(spec, config.N)

    report = compute_spectrum(A, config.k_max)
    verdict = tameness_test(report)
    pairing = conjugate_pairing_error(report, converged_only=True)
    spots = resolvent_consistency(A, report, threads=config.threads)
    growth = semigroup_growth(spec, config.n_ladder, config.t_max, config.t_steps, threads=config.threads)

    converged_norms = report.projection_norms[report.converged]
    scale = max(1.0, float(np.max(np.abs(report.eigenvalues))))
    checks = {
        "conjugate_pairing": pairing <= _PAIRING_TOLERANCE * scale,
        "projection_norms_at_least_one": bool(np.all(converged_norms >= 1.0 - _PROJECTION_FLOOR_SLACK)),
        "semigroup_starts_at_one": all(abs(c.norms[0] - 1.0) <= 1e-12 for c in growth.curves),
    }

    payload = _report_header(config)
    payload.update(
        {
            "spectrum": report.to_dict(),
            "tameness": verdict.to_dict(),
            "pairing_error_converged": pairing,
            "span_residual": span_residual(report),
            "resolvent_consistency": [s.to_dict() for s in spots],
            "semigroup": growth.to_dict(),
            "checks": checks,
        }
    )
    written = {
        "eigen_report": artifacts.write_json(payload, out / "eigen_report.json"),
        "semigroup": artifacts.write_semigroup(growth, out / "semigroup.csv"),
        "eigenvalues": artifacts.write_eigenvalues(report, out / "eigenvalues.csv"),
    }
    _raise_on_failed_checks(checks, "diagnostics")
    return written


def cmd_matrix_dump(config: ExperimentConfig) -> Dict[str, Path]:
    out = artifacts.output_dir(config.output)
    A = build_hamiltonian(config.potential(), config.N)
    path = out / "matrix.txt"
    write_matrix(A, str(path))
    logger.info("wrote %r to %s", A, path)
    return {"matrix": path}


COMMANDS: Dict[str, Callable[[ExperimentConfig], Dict[str, Path]]] = {
    "pseudospectrum": cmd_pseudospectrum,
    "wkb-certify": cmd_wkb_certify,
    "exponent": cmd_exponent_experiment,
    "diagnostics": cmd_diagnostics,
    "matrix-dump": cmd_matrix_dump,
}

_COMMAND_HELP = {
    "pseudospectrum": "resolvent-norm grid, epsilon contours and inclusion checks",
    "wkb-certify": "certify WKB pseudomodes over an h-ladder",
    "exponent": "fit the log(1/eps) growth along a ray",
    "diagnostics": "projection norms, tameness verdict and semigroup growth",
    "matrix-dump": "write the Hermite matrix in band text format",
}

# -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pseudolab",
        description="Spectra, pseudospectra and WKB pseudomodes of -d^2/dx^2 + x^2 + i beta x^(2n+1).",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True
    for name, help_text in _COMMAND_HELP.items():
        sub = subparsers.add_parser(name, help=help_text, description=help_text, allow_abbrev=False)
        sub.add_argument("--config", default=None, help="INI file with [operator], [window], ... sections")
        sub.add_argument("-v", "--verbose", action="store_true", help="shorthand for --log-level DEBUG")
        for option in OPTIONS:
            sub.add_argument(option.flag, dest=option.dest, default=None, metavar="VALUE", help=option.help)
    return parser


def configure_logging(level: str) -> None:
    logging.basicConfig(format=_LOG_FORMAT)
    logging.getLogger().setLevel(level.upper())


def main(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand and return its exit code."""
    args = build_parser().parse_args(argv)
    overrides = {option.dest: getattr(args, option.dest) for option in OPTIONS}
    if args.verbose:
        overrides["log_level"] = "DEBUG"

    try:
        config = ExperimentConfig.from_sources(args.command, args.config, overrides)
    except PseudolabError as exc:
        configure_logging("INFO")
        logger.error("%s: %s", exc.label, exc)
        return exc.exit_code

    configure_logging(config.log_level)
    logger.info("pseudolab %s (config %s)", config.command, config.content_hash()[:12])
    try:
        COMMANDS[config.command](config)
    except PseudolabError as exc:
        logger.error("%s: %s", exc.label, exc)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
