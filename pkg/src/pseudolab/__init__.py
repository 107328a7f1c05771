from .errors import *
from .operator_core import (
    BandedComplexMatrix,
    GridFunction,
    PotentialSpec,
    apply_hamiltonian,
    build_hamiltonian,
    hermite_coefficients,
    hermite_functions,
    pt_defect,
    read_matrix,
    synthesize,
    write_matrix,
)
from .pseudospec import (
    ResolventGrid,
    resolvent_norm,
    sandwich_check,
    smallest_singular_value,
    sweep_grid,
    trusted_window,
)
from .contours import ContourSet, contours_nested, extract_contours
from .wkb import (
    assemble_pseudomode,
    build_phase,
    certify_ladder,
    certify_residual,
    solve_transport,
    solve_turning_point,
)
from .scaling import ScalingParams, bound_region, in_lambda_region, unscale_pseudomode
from .diagnostics import compute_spectrum, semigroup_curve, tameness_test
from .config import ExperimentConfig

__version__ = "0.1.0"
