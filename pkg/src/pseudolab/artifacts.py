"""
artifacts.py

The artifacts module writes and reads the flat files pseudolab runs emit.
Tables are CSV through pandas; reports and contour polylines are JSON.

grid.csv is grouped by imaginary part with one blank line between groups,
the layout gnuplot's splot/pm3d expects:

    re,im,resolvent_norm
    0,-6,1.2
    0.1,-6,1.3
    ...

    0,-5.9,1.25
    ...

Points at an eigenvalue hold "inf".
"""

import json
import logging
import math
from pathlib import Path
from typing import Iterable, List, Mapping, Union

import numpy as np
import pandas as pd

from .contours import ContourSet
from .diagnostics import EigenReport, SemigroupGrowth
from .errors import ValidationError
from .operator_core import GridFunction
from .pseudospec import ResolventGrid

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# -----------------------------------------------------------------------

# Default Sizes and Values

_FLOAT_FORMAT = "%.17g"

GRID_COLUMNS = ["re", "im", "resolvent_norm"]
EIGENVALUE_COLUMNS = ["k", "re", "im", "proj_norm", "converged"]
PSEUDOMODE_COLUMNS = ["x", "re_psi", "im_psi"]
SEMIGROUP_COLUMNS = ["N", "t", "norm"]
FRONTIER_COLUMNS = ["modulus", "re", "im", "epsilon", "N", "trusted"]

# -----------------------------------------------------------------------


def output_dir(path: PathLike) -> Path:
    """Create the output directory if needed and return it."""
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def jsonable(value):
    """Turn numpy scalars/arrays and complex numbers into JSON values; non-finite floats become null."""
    if isinstance(value, Mapping):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, complex):
        return [jsonable(value.real), jsonable(value.imag)]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_json(payload: Mapping, path: PathLike) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as stream:
        json.dump(jsonable(payload), stream, indent=2, sort_keys=True, allow_nan=False)
        stream.write("\n")
    logger.debug("wrote %s", path)
    return path


def read_json(path: PathLike) -> dict:
    with open(path, "r", encoding="utf-8") as stream:
        return json.load(stream)


def _check_columns(frame: pd.DataFrame, expected: List[str], path: PathLike) -> pd.DataFrame:
    if list(frame.columns) != expected:
        raise ValidationError(
            "%s has columns %s, expected %s" % (path, list(frame.columns), expected),
            path=str(path),
        )
    return frame


def _write_table(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    frame.to_csv(path, index=False, float_format=_FLOAT_FORMAT)
    logger.debug("wrote %d row(s) to %s", len(frame), path)
    return path


# -----------------------------------------------------------------------

# grid.csv


def write_grid(grid: ResolventGrid, path: PathLike) -> Path:
    """Write the resolvent grid, one block of rows per imaginary value."""
    path = Path(path)
    blocks = []
    for iy, im in enumerate(grid.im_axis):
        frame = pd.DataFrame(
            {
                "re": grid.re_axis,
                "im": np.full(grid.re_axis.size, im),
                "resolvent_norm": grid.values[iy],
            },
            columns=GRID_COLUMNS,
        )
        blocks.append(frame.to_csv(index=False, header=(iy == 0), float_format=_FLOAT_FORMAT))
    with open(path, "w", encoding="utf-8", newline="") as stream:
        stream.write("\n".join(blocks))
    logger.debug("wrote %dx%d grid to %s", grid.shape[0], grid.shape[1], path)
    return path


def read_grid(path: PathLike, matrix_dim: int = 0) -> ResolventGrid:
    """Read grid.csv back into a ResolventGrid (sweep metadata is not stored in the file).

    @raises ValidationError: if the rows do not form a full rectangular grid
    """
    frame = _check_columns(pd.read_csv(path, skip_blank_lines=True), GRID_COLUMNS, path)
    re_axis = np.unique(frame["re"].to_numpy(dtype=float))
    im_axis = np.unique(frame["im"].to_numpy(dtype=float))
    if len(frame) != re_axis.size * im_axis.size:
        raise ValidationError("%s does not hold a rectangular grid" % path, path=str(path))
    values = frame["resolvent_norm"].to_numpy(dtype=float).reshape(im_axis.size, re_axis.size)
    return ResolventGrid(re_axis, im_axis, values, matrix_dim=matrix_dim, sweep_seconds=0.0)


# -----------------------------------------------------------------------

# contours.json


def write_contours(contours: ContourSet, path: PathLike) -> Path:
    return write_json(contours.to_dict(), path)


def read_contours(path: PathLike) -> ContourSet:
    return ContourSet.from_dict(read_json(path))


# -----------------------------------------------------------------------

# eigenvalues.csv


def write_eigenvalues(report: EigenReport, path: PathLike) -> Path:
    frame = pd.DataFrame(
        {
            "k": np.arange(1, report.k_max + 1),
            "re": report.eigenvalues.real,
            "im": report.eigenvalues.imag,
            "proj_norm": report.projection_norms,
            "converged": report.converged.astype(bool),
        },
        columns=EIGENVALUE_COLUMNS,
    )
    return _write_table(frame, path)


def read_eigenvalues(path: PathLike) -> pd.DataFrame:
    return _check_columns(pd.read_csv(path), EIGENVALUE_COLUMNS, path)


# -----------------------------------------------------------------------

# pseudomode_*.csv


def write_pseudomode(samples: GridFunction, path: PathLike) -> Path:
    frame = pd.DataFrame(
        {"x": samples.nodes, "re_psi": samples.values.real, "im_psi": samples.values.imag},
        columns=PSEUDOMODE_COLUMNS,
    )
    return _write_table(frame, path)


def read_pseudomode(path: PathLike) -> GridFunction:
    frame = _check_columns(pd.read_csv(path), PSEUDOMODE_COLUMNS, path)
    values = frame["re_psi"].to_numpy(dtype=float) + 1j * frame["im_psi"].to_numpy(dtype=float)
    return GridFunction.from_samples(frame["x"].to_numpy(dtype=float), values)


def pseudomode_filename(h: float, physical: bool = False) -> str:
    suffix = "_physical" if physical else ""
    return "pseudomode_h%g%s.csv" % (h, suffix)


# -----------------------------------------------------------------------

# semigroup.csv


def write_semigroup(growth: SemigroupGrowth, path: PathLike) -> Path:
    frame = pd.concat(
        [
            pd.DataFrame({"N": curve.matrix_dim, "t": curve.times, "norm": curve.norms}, columns=SEMIGROUP_COLUMNS)
            for curve in growth.curves
        ],
        ignore_index=True,
    )
    return _write_table(frame, path)


def read_semigroup(path: PathLike) -> pd.DataFrame:
    return _check_columns(pd.read_csv(path), SEMIGROUP_COLUMNS, path)


# -----------------------------------------------------------------------

# frontier.csv


def write_frontier(rows: Iterable[Mapping], path: PathLike) -> Path:
    """rows carry modulus, lam (complex), epsilon, N and trusted."""
    records = [
        {
            "modulus": row["modulus"],
            "re": complex(row["lam"]).real,
            "im": complex(row["lam"]).imag,
            "epsilon": row["epsilon"],
            "N": row["N"],
            "trusted": bool(row["trusted"]),
        }
        for row in rows
    ]
    return _write_table(pd.DataFrame.from_records(records, columns=FRONTIER_COLUMNS), path)


def read_frontier(path: PathLike) -> pd.DataFrame:
    return _check_columns(pd.read_csv(path), FRONTIER_COLUMNS, path)
