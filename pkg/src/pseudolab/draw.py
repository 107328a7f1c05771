"""
draw.py

The draw module renders pseudospectrum figures onto an off-screen
canvas.  Drawing happens in user coordinates: the x-scale runs over the
real axis of the sweep window and the y-scale over the imaginary axis.
No window is ever opened; the canvas is a plain pygame.Surface that
save() writes out as a PNG.
"""

import logging
import os
from typing import Optional, Sequence, Tuple

import numpy as np

os.environ["PYGAME_HIDE_SUPPORT_PROMPT"] = "hide"
import pygame
import pygame.gfxdraw

from .color import BLACK, LIGHT_GRAY, RED, WHITE, Color, contour_palette
from .contours import ContourSet
from .errors import ValidationError
from .pseudospec import ResolventGrid

logger = logging.getLogger(__name__)

# -----------------------------------------------------------------------

# Default Sizes and Values

_DEFAULT_XMIN = 0.0
_DEFAULT_XMAX = 1.0
_DEFAULT_YMIN = 0.0
_DEFAULT_YMAX = 1.0
_DEFAULT_CANVAS_SIZE = 512
_DEFAULT_PEN_WIDTH = 1.0
_DEFAULT_PEN_COLOR = BLACK
_EIGENVALUE_RADIUS_PIXELS = 3

_xmin = _DEFAULT_XMIN
_ymin = _DEFAULT_YMIN
_xmax = _DEFAULT_XMAX
_ymax = _DEFAULT_YMAX

_canvas_width = _DEFAULT_CANVAS_SIZE
_canvas_height = _DEFAULT_CANVAS_SIZE
_pen_width = _DEFAULT_PEN_WIDTH
_pen_color = _DEFAULT_PEN_COLOR

# Has the canvas been created?
_surface = None

# -----------------------------------------------------------------------


def _pygame_color(c: Color) -> pygame.Color:
    """
    Convert c, an object of type Color, to an equivalent object
    of type pygame.Color.  Return the result.
    """
    return pygame.Color(c.get_red(), c.get_green(), c.get_blue(), c.get_alpha())


# -----------------------------------------------------------------------

# Private functions to scale X and Y values.


def _scale_x(x: float) -> float:
    return _canvas_width * (x - _xmin) / (_xmax - _xmin)


def _scale_y(y: float) -> float:
    return _canvas_height * (_ymax - y) / (_ymax - _ymin)


def _scale_point(x: float, y: float) -> Tuple[float, float]:
    return (_scale_x(x), _scale_y(y))


def _line_width_pixels() -> int:
    return max(int(round(_pen_width)), 1)


def _make_sure_canvas_created():
    if _surface is None:
        set_canvas_size()


# -----------------------------------------------------------------------


def set_canvas_size(w: int = _DEFAULT_CANVAS_SIZE, h: int = _DEFAULT_CANVAS_SIZE):
    """Create a fresh w x h canvas filled with white.

    Calling it again discards the previous canvas.

    @param w: width of canvas in pixels, defaults to 512
    @param h: height of canvas in pixels, defaults to 512
    @raises ValidationError: if width or height values are non-positive
    """
    global _surface
    global _canvas_width
    global _canvas_height

    if (w < 1) or (h < 1):
        raise ValidationError("width and height must be positive", width=w, height=h)

    _canvas_width = int(w)
    _canvas_height = int(h)
    _surface = pygame.Surface((_canvas_width, _canvas_height))
    _surface.fill(_pygame_color(WHITE))


def get_canvas_size() -> Tuple[int, int]:
    return (_canvas_width, _canvas_height)


def set_x_scale(min: float = _DEFAULT_XMIN, max: float = _DEFAULT_XMAX):
    """Set the x-scale of the canvas such that the minimum x value
    is min and the maximum x value is max.

    @raises ValidationError: if the min value is greater or equal to the max value
    """
    global _xmin
    global _xmax
    min = float(min)
    max = float(max)
    if min >= max:
        raise ValidationError("min must be less than max", min=min, max=max)
    _xmin = min
    _xmax = max


def set_y_scale(min: float = _DEFAULT_YMIN, max: float = _DEFAULT_YMAX):
    """Set the y-scale of the canvas such that the minimum y value
    is min and the maximum y value is max.

    @raises ValidationError: if the min value is greater or equal to the max value
    """
    global _ymin
    global _ymax
    min = float(min)
    max = float(max)
    if min >= max:
        raise ValidationError("min must be less than max", min=min, max=max)
    _ymin = min
    _ymax = max


def set_pen_width(w: float = _DEFAULT_PEN_WIDTH):
    """Set the pen width to w pixels.

    @raises ValidationError: if w is negative
    """
    global _pen_width
    w = float(w)
    if w < 0.0:
        raise ValidationError("pen width must be non-negative", width=w)
    _pen_width = w


def set_pen_color(c: Color = _DEFAULT_PEN_COLOR):
    global _pen_color
    _pen_color = c


def _pixel_color(x: float, y: float) -> Color:
    """Return the color of the canvas pixel under the user point (x, y)."""
    _make_sure_canvas_created()
    xs = min(max(int(_scale_x(x)), 0), _canvas_width - 1)
    ys = min(max(int(_scale_y(y)), 0), _canvas_height - 1)
    c = _surface.get_at((xs, ys))
    return Color(c.r, c.g, c.b, c.a)


# -----------------------------------------------------------------------

# Functions to draw shapes on the canvas.


def clear(c: Color = WHITE):
    """Clear the canvas to color c."""
    _make_sure_canvas_created()
    _surface.fill(_pygame_color(c))


def line(x0: float, y0: float, x1: float, y1: float):
    """Draw on the canvas a line from (x0, y0) to (x1, y1)."""
    _make_sure_canvas_created()
    pygame.draw.line(
        _surface,
        _pygame_color(_pen_color),
        _scale_point(float(x0), float(y0)),
        _scale_point(float(x1), float(y1)),
        _line_width_pixels(),
    )


def polyline(x: Sequence[float], y: Sequence[float]):
    """Draw on the canvas a polyline through the points (x[i], y[i]).

    @param x: x-coordinates of the vertices
    @param y: y-coordinates of the vertices, same length as x
    @raises ValidationError: if x and y differ in length
    """
    _make_sure_canvas_created()
    if len(x) != len(y):
        raise ValidationError("polyline coordinates differ in length", x=len(x), y=len(y))
    if len(x) < 2:
        return
    points = [_scale_point(float(a), float(b)) for a, b in zip(x, y)]
    if _line_width_pixels() == 1:
        pygame.draw.aalines(_surface, _pygame_color(_pen_color), False, points)
    else:
        pygame.draw.lines(_surface, _pygame_color(_pen_color), False, points, _line_width_pixels())


def rectangle(x0: float, y0: float, x1: float, y1: float):
    """Draw the outline of the axis-aligned box with corners (x0, y0) and (x1, y1)."""
    polyline([x0, x1, x1, x0, x0], [y0, y0, y1, y1, y0])


def filled_circle(x: float, y: float, r: int = _EIGENVALUE_RADIUS_PIXELS):
    """Draw a filled dot of radius r pixels centered on the user point (x, y)."""
    _make_sure_canvas_created()
    xs, ys = _scale_point(float(x), float(y))
    r = max(int(r), 1)
    pygame.gfxdraw.filled_circle(_surface, int(xs), int(ys), r, _pygame_color(_pen_color))
    pygame.gfxdraw.aacircle(_surface, int(xs), int(ys), r, _pygame_color(_pen_color))


def save(filepath: str) -> str:
    """Save the canvas as a .png to filepath and return the path used."""
    _make_sure_canvas_created()
    if not filepath.lower().endswith(".png"):
        filepath += ".png"
    pygame.image.save(_surface, filepath)
    return filepath


# -----------------------------------------------------------------------


def render_pseudospectrum(
    grid: ResolventGrid,
    contours: ContourSet,
    eigenvalues: Sequence[complex],
    filepath: str,
    width: int = 800,
    trusted: Optional[Tuple[float, float, float, float]] = None,
) -> str:
    """Draw contours blue (smallest eps) to green, eigenvalues as red
    dots, the real axis and, if given, the trusted (re_lo, re_hi, im_lo,
    im_hi) box in gray, then save the figure.

    The canvas keeps the aspect ratio of the sweep window.
    """
    re_min, re_max, im_min, im_max = grid.bounds()
    height = max(int(round(width * (im_max - im_min) / (re_max - re_min))), 1)
    set_canvas_size(width, height)
    set_x_scale(re_min, re_max)
    set_y_scale(im_min, im_max)
    clear(WHITE)

    set_pen_color(LIGHT_GRAY)
    set_pen_width(1.0)
    if im_min < 0.0 < im_max:
        line(re_min, 0.0, re_max, 0.0)
    if trusted is not None:
        re_lo, re_hi, im_lo, im_hi = trusted
        rectangle(re_lo, im_lo, re_hi, im_hi)

    order = np.argsort(contours.epsilon_levels)
    palette = contour_palette(len(order))
    set_pen_width(1.0)
    for color, k in zip(palette, order):
        set_pen_color(color)
        for vertices in contours.polylines[k]:
            polyline(vertices.real, vertices.imag)

    set_pen_color(RED)
    shown = 0
    for lam in eigenvalues:
        if re_min <= lam.real <= re_max and im_min <= lam.imag <= im_max:
            filled_circle(lam.real, lam.imag)
            shown += 1
    logger.debug("rendered %d contour levels and %d eigenvalues", len(order), shown)
    return save(filepath)
