import os

import numpy as np
import pytest

from pseudolab import draw
from pseudolab.color import BLACK, BLUE, GREEN, LIGHT_GRAY, RED, WHITE, Color, blend, contour_palette
from pseudolab.contours import extract_contours
from pseudolab.errors import ValidationError
from pseudolab.pseudospec import ResolventGrid


def test_color_channels():
    c = Color(300, -5, 12.6)
    assert c.to_tuple() == (255, 0, 13, 255)
    assert str(c) == "(255, 0, 13)"
    assert Color(1, 2, 3) == Color(1, 2, 3)
    assert len({Color(1, 2, 3), Color(1, 2, 3), RED}) == 2
    assert Color(1, 2, 3) != (1, 2, 3)


def test_palette_runs_blue_to_green():
    palette = contour_palette(5)
    assert palette[0] == BLUE
    assert palette[-1] == GREEN
    assert blend(BLACK, WHITE, 0.5) == Color(128, 128, 128)
    assert contour_palette(1) == [BLUE]
    assert contour_palette(0) == []


def test_canvas_drawing():
    draw.set_canvas_size(100, 50)
    draw.set_x_scale(0.0, 10.0)
    draw.set_y_scale(0.0, 5.0)
    draw.clear(WHITE)
    assert draw.get_canvas_size() == (100, 50)
    assert draw._pixel_color(5.0, 2.5) == WHITE

    draw.set_pen_color(RED)
    draw.filled_circle(5.0, 2.5, 4)
    assert draw._pixel_color(5.0, 2.5) == RED

    draw.set_pen_color(BLUE)
    draw.set_pen_width(3.0)
    draw.line(1.0, 1.0, 9.0, 1.0)
    assert draw._pixel_color(3.0, 1.0) == BLUE
    assert draw._pixel_color(3.0, 4.0) == WHITE
    draw.set_pen_width()


def test_canvas_rejects_bad_settings():
    with pytest.raises(ValidationError):
        draw.set_canvas_size(0, 10)
    with pytest.raises(ValidationError):
        draw.set_x_scale(1.0, 1.0)
    with pytest.raises(ValidationError):
        draw.set_y_scale(2.0, 1.0)
    with pytest.raises(ValidationError):
        draw.set_pen_width(-1.0)
    with pytest.raises(ValidationError):
        draw.polyline([0.0, 1.0], [0.0])


def test_save_appends_extension(tmp_path):
    draw.set_canvas_size(16, 16)
    path = draw.save(str(tmp_path / "canvas"))
    assert path.endswith("canvas.png")
    assert os.path.getsize(path) > 0


def test_render_pseudospectrum(tmp_path):
    re_axis = np.linspace(0.0, 20.0, 41)
    im_axis = np.linspace(-6.0, 10.0, 33)
    points = re_axis[None, :] + 1j * im_axis[:, None]
    grid = ResolventGrid(re_axis, im_axis, 1.0 / np.abs(points - (5.0 + 0.25j)), 1, 0.0)
    contours = extract_contours(grid, [0.5, 1.0, 2.0])
    path = draw.render_pseudospectrum(grid, contours, [5.0 + 0.25j, 50.0 + 0j], str(tmp_path / "pseudospectrum.png"),
                                      width=200, trusted=(0.0, 15.0, -6.0, 10.0))
    assert os.path.exists(path)
    assert draw.get_canvas_size() == (200, 160)
    assert draw._pixel_color(5.0, 0.25) == RED
    assert draw._pixel_color(18.0, 0.0) == LIGHT_GRAY
    assert draw._pixel_color(18.0, 5.0) == WHITE
