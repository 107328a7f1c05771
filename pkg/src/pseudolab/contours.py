"""
contours.py

The contours module extracts epsilon-pseudospectrum boundaries from a
ResolventGrid.  Boundaries are isolines of log10(||(A - lambda)^-1||) at the
levels log10(1/eps), found by marching squares and stitched into polylines
that are either closed or end on the grid boundary.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import ValidationError
from .pseudospec import ResolventGrid

logger = logging.getLogger(__name__)

# -----------------------------------------------------------------------

# Cell corners are numbered counter-clockwise from the lower left:
# 0 = (iy, ix), 1 = (iy, ix+1), 2 = (iy+1, ix+1), 3 = (iy+1, ix).
# Cell sides: 0 bottom (0-1), 1 right (1-2), 2 top (3-2), 3 left (0-3).

_SIDE_CORNERS = ((0, 1), (1, 2), (3, 2), (0, 3))

# For each inside/outside corner pattern (bit k set = corner k inside), the
# pairs of sides joined by a segment.  Saddles hold both resolutions:
# (center outside, center inside).
_CASES = {
    0b0000: [],
    0b0001: [(0, 3)],
    0b0010: [(0, 1)],
    0b0011: [(1, 3)],
    0b0100: [(1, 2)],
    0b0101: ([(0, 3), (1, 2)], [(0, 1), (2, 3)]),
    0b0110: [(0, 2)],
    0b0111: [(2, 3)],
    0b1000: [(2, 3)],
    0b1001: [(0, 2)],
    0b1010: ([(0, 1), (2, 3)], [(0, 3), (1, 2)]),
    0b1011: [(1, 2)],
    0b1100: [(1, 3)],
    0b1101: [(0, 1)],
    0b1110: [(0, 3)],
    0b1111: [],
}

_INFINITE_HEADROOM = 10.0

# -----------------------------------------------------------------------


@dataclass
class ContourSet:
    """
    Isolines per epsilon level.  polylines[k] holds complex vertex chains for
    epsilon_levels[k]; closed chains repeat their first vertex at the end.
    """

    epsilon_levels: List[float]
    polylines: List[List[np.ndarray]] = field(default_factory=list)
    closed_flags: List[List[bool]] = field(default_factory=list)

    def level_index(self, epsilon: float) -> int:
        for k, level in enumerate(self.epsilon_levels):
            if np.isclose(level, epsilon, rtol=1e-12, atol=0.0):
                return k
        raise KeyError(epsilon)

    def lines(self, epsilon: float) -> List[np.ndarray]:
        return self.polylines[self.level_index(epsilon)]

    def vertex_count(self) -> int:
        return sum(line.size for lines in self.polylines for line in lines)

    def to_dict(self) -> dict:
        return {
            "levels": list(self.epsilon_levels),
            "contours": [
                {
                    "epsilon": eps,
                    "polylines": [
                        {"closed": bool(closed), "re": line.real.tolist(), "im": line.imag.tolist()}
                        for line, closed in zip(lines, flags)
                    ],
                }
                for eps, lines, flags in zip(self.epsilon_levels, self.polylines, self.closed_flags)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ContourSet":
        result = cls(epsilon_levels=[float(e) for e in data["levels"]])
        for entry in data["contours"]:
            lines = [np.asarray(p["re"]) + 1j * np.asarray(p["im"]) for p in entry["polylines"]]
            result.polylines.append(lines)
            result.closed_flags.append([bool(p["closed"]) for p in entry["polylines"]])
        return result


def log_field(grid: ResolventGrid) -> np.ndarray:
    """Return log10 of the grid values with eigenvalue points lifted above every finite value."""
    values = grid.values
    finite = np.isfinite(values)
    result = np.empty(values.shape)
    result[finite] = np.log10(values[finite])
    ceiling = result[finite].max() if np.any(finite) else 0.0
    result[~finite] = ceiling + _INFINITE_HEADROOM
    return result


def _side_vertex(grid: ResolventGrid, F: np.ndarray, level: float, key) -> complex:
    kind, iy, ix = key
    if kind == "h":
        fa, fb = F[iy, ix], F[iy, ix + 1]
        t = (level - fa) / (fb - fa)
        x = grid.re_axis[ix] + t * (grid.re_axis[ix + 1] - grid.re_axis[ix])
        return complex(x, grid.im_axis[iy])
    fa, fb = F[iy, ix], F[iy + 1, ix]
    t = (level - fa) / (fb - fa)
    y = grid.im_axis[iy] + t * (grid.im_axis[iy + 1] - grid.im_axis[iy])
    return complex(grid.re_axis[ix], y)


def _side_key(side: int, iy: int, ix: int):
    if side == 0:
        return ("h", iy, ix)
    if side == 1:
        return ("v", iy, ix + 1)
    if side == 2:
        return ("h", iy + 1, ix)
    return ("v", iy, ix)


def _cell_segments(F: np.ndarray, level: float):
    inside = F > level
    ny, nx = F.shape
    for iy in range(ny - 1):
        for ix in range(nx - 1):
            corners = (inside[iy, ix], inside[iy, ix + 1], inside[iy + 1, ix + 1], inside[iy + 1, ix])
            pattern = sum(1 << k for k, flag in enumerate(corners) if flag)
            case = _CASES[pattern]
            if isinstance(case, tuple):
                center = 0.25 * (F[iy, ix] + F[iy, ix + 1] + F[iy + 1, ix + 1] + F[iy + 1, ix])
                case = case[int(center > level)]
            for a, b in case:
                yield _side_key(a, iy, ix), _side_key(b, iy, ix)


def _stitch(segments) -> List[Tuple[list, bool]]:
    adjacency: Dict[tuple, list] = defaultdict(list)
    for a, b in segments:
        adjacency[a].append(b)
        adjacency[b].append(a)

    chains = []
    visited = set()

    def walk(start):
        chain = [start]
        visited.add(start)
        current = start
        while True:
            candidates = [k for k in adjacency[current] if k not in visited]
            if not candidates:
                return chain
            current = candidates[0]
            chain.append(current)
            visited.add(current)

    for key in sorted(k for k in adjacency if len(adjacency[k]) == 1):
        if key not in visited:
            chains.append((walk(key), False))
    for key in sorted(adjacency):
        if key not in visited:
            chains.append((walk(key), True))
    return chains


def extract_contours(grid: ResolventGrid, epsilons: Sequence[float]) -> ContourSet:
    """Extract the boundary of sigma_eps for every eps in epsilons.

    Vertices are linear interpolants of log10 values along cell sides.
    Saddle cells are resolved by the average of their four corners.
    A level the grid never crosses yields an empty list.

    @param grid: a swept ResolventGrid
    @param epsilons: positive levels
    @return: the ContourSet, levels in the order given
    @raises ValidationError: for non-positive epsilon
    """
    epsilons = [float(e) for e in epsilons]
    if any(e <= 0 for e in epsilons):
        raise ValidationError("epsilon levels must be positive")
    F = log_field(grid)
    result = ContourSet(epsilon_levels=epsilons)
    for eps in epsilons:
        level = -np.log10(eps)
        lines, flags = [], []
        for chain, closed in _stitch(_cell_segments(F, level)):
            vertices = np.array([_side_vertex(grid, F, level, key) for key in chain])
            if closed:
                vertices = np.append(vertices, vertices[0])
            lines.append(vertices)
            flags.append(closed)
        if not lines:
            logger.debug("level eps=%g not crossed", eps)
        result.polylines.append(lines)
        result.closed_flags.append(flags)
    return result


# -----------------------------------------------------------------------


def point_in_polygon(point: complex, polygon: np.ndarray) -> bool:
    """Even-odd ray casting test against a closed vertex chain."""
    x, y = point.real, point.imag
    xs, ys = polygon.real, polygon.imag
    inside = False
    for k in range(polygon.size - 1):
        x0, y0, x1, y1 = xs[k], ys[k], xs[k + 1], ys[k + 1]
        if (y0 > y) != (y1 > y):
            crossing = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
            if x < crossing:
                inside = not inside
    return inside


def contours_nested(grid: ResolventGrid, contours: ContourSet, tolerance: float = 1e-6) -> bool:
    """Check that sigma_eps1 lies inside sigma_eps2 for every eps1 < eps2.

    Every vertex of a smaller-eps contour must lie where the bilinear
    interpolant of log10 values reaches the larger level, and a closed
    smaller-eps chain starting inside a closed larger-eps chain must stay
    inside it.
    """
    F = log_field(grid)
    field_at = RegularGridInterpolator((grid.im_axis, grid.re_axis), F, method="linear")
    order = np.argsort(contours.epsilon_levels)
    for smaller, larger in zip(order[:-1], order[1:]):
        outer_level = -np.log10(contours.epsilon_levels[larger])
        for line in contours.polylines[smaller]:
            samples = field_at(np.column_stack([line.imag, line.real]))
            if np.any(samples < outer_level - tolerance):
                return False
        outer_closed = [
            line for line, closed in zip(contours.polylines[larger], contours.closed_flags[larger]) if closed
        ]
        for line, closed in zip(contours.polylines[smaller], contours.closed_flags[smaller]):
            if not closed:
                continue
            for outer in outer_closed:
                if point_in_polygon(line[0], outer):
                    if not all(point_in_polygon(v, outer) for v in line[:-1]):
                        return False
    return True


def open_levels(contours: ContourSet) -> List[float]:
    """Return the levels with at least one chain leaving the grid window."""
    return [
        eps
        for eps, flags in zip(contours.epsilon_levels, contours.closed_flags)
        if flags and not all(flags)
    ]


def vertices_within(grid: ResolventGrid, contours: ContourSet) -> bool:
    """True when every vertex lies in the grid bounding box."""
    re_min, re_max, im_min, im_max = grid.bounds()
    for lines in contours.polylines:
        for line in lines:
            if np.any(line.real < re_min) or np.any(line.real > re_max):
                return False
            if np.any(line.imag < im_min) or np.any(line.imag > im_max):
                return False
    return True
