"""
color.py

The color module defines the Color class, the few Color objects the
pseudospectrum figure uses, and the blue-to-green palette for its
epsilon contours.
"""

from typing import List

#-----------------------------------------------------------------------

class Color:
    """
    A Color object models an RGB with Alpha Transparency color.
    """

    #-------------------------------------------------------------------

    def __init__(self, r: int = 0, g: int = 0, b: int = 0, a: int = 255):
        """
        Construct self such that it has the given red (r),
        green (g), blue (b), and alpha (a) components, each
        clipped to 0..255.
        """
        self._r = _channel(r)
        self._g = _channel(g)
        self._b = _channel(b)
        self._a = _channel(a)

    #-------------------------------------------------------------------

    def get_red(self) -> int:
        return self._r

    def get_green(self) -> int:
        return self._g

    def get_blue(self) -> int:
        return self._b

    def get_alpha(self) -> int:
        return self._a

    def to_tuple(self):
        """
        Return the components of self as an (r, g, b, a) tuple.
        """
        return (self._r, self._g, self._b, self._a)

    #-------------------------------------------------------------------

    def __eq__(self, other):
        return isinstance(other, Color) and self.to_tuple() == other.to_tuple()

    def __hash__(self):
        return hash(self.to_tuple())

    def __str__(self):
        """
        Return the string equivalent of self, that is, a
        string of the form '(r, g, b)'.
        """
        return '(' + str(self._r) + ', ' + str(self._g) + ', ' + \
            str(self._b) + ')'

    __repr__ = __str__

#-----------------------------------------------------------------------

def _channel(value) -> int:
    return max(0, min(255, int(round(value))))


def blend(c0: Color, c1: Color, t: float) -> Color:
    """
    Return the color a fraction t of the way from c0 to c1.
    """
    t = min(1.0, max(0.0, float(t)))
    return Color(*(a + t * (b - a) for a, b in zip(c0.to_tuple(), c1.to_tuple())))


def contour_palette(count: int) -> List[Color]:
    """
    Return count colors running from blue (smallest epsilon) to
    green (largest epsilon).
    """
    if count <= 1:
        return [BLUE] * max(count, 0)
    return [blend(BLUE, GREEN, k / (count - 1)) for k in range(count)]

#-----------------------------------------------------------------------

# Predefined Color objects:

WHITE      = Color(255, 255, 255)
BLACK      = Color(  0,   0,   0)

RED        = Color(255,   0,   0)
GREEN      = Color(  0, 160,   0)
BLUE       = Color(  0,   0, 255)

LIGHT_GRAY = Color(192, 192, 192)
