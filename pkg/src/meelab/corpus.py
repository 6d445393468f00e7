"""
Built-in families used by the self test.

The corpus grid places a sample on the origin and keeps every error component,
even at the largest perturbation, more than ten scale units away from the grid
ends, which keeps the truncated tails of ``p ** 0.25`` well below the sweep tolerance.
Uniform widths are chosen so that no jump lands on a sample for any lattice
shift.
"""
import math

import numpy as np
from scipy import stats

from meelab.densities import CsumFamily
from meelab.densities import CsumShape
from meelab.densities import TabulatedShape
from meelab.grid import Grid
from meelab.grid import GridFunction

DEFAULT_GRID = Grid(-12.0, 12.0, 8193)
CORPUS_GRID = Grid(-16.0, 16.0, 8193)
CORPUS_S_MAX = 5.0
# samples at (j + 1/2) / 1024, so jumps at multiples of 1/1024 fall between samples
HALF_STEP_GRID = Grid(-3.99951171875, 3.99951171875, 8192)


def _family(components, grid=CORPUS_GRID, s_max=CORPUS_S_MAX):
    return CsumFamily(
        [(weight, CsumShape(kind, loc, scale)) for weight, kind, loc, scale in components],
        grid,
        s_max=s_max,
    )


def corpus_families():
    """
    Return the CSUM sweep corpus as an ordered ``{name: family}`` mapping.
    """
    return {
        "gaussian-pair": _family(
            [(0.4, "gaussian", -1.0, 0.5), (0.6, "gaussian", 1.5, 1.0)]
        ),
        "laplace-gaussian": _family(
            [(0.5, "laplace", 0.5, 0.15), (0.5, "gaussian", -1.0, 0.75)]
        ),
        "uniform-triangular": _family(
            [(0.3, "uniform", 0.0, 1.3), (0.7, "triangular", 1.0, 0.8)]
        ),
        "mixed-triple": _family(
            [
                (0.2, "gaussian", 0.0, 0.6),
                (0.3, "laplace", -1.5, 0.15),
                (0.5, "uniform", 1.0, 0.9),
            ]
        ),
        "triangular-triple": _family(
            [
                (0.3, "triangular", -1.0, 0.5),
                (0.3, "triangular", 0.5, 1.2),
                (0.4, "gaussian", 1.5, 0.4),
            ]
        ),
        "two-uniforms": _family([(0.5, "uniform", -0.5, 0.9), (0.5, "uniform", 1.0, 1.7)]),
    }


def two_unit_uniforms(grid=HALF_STEP_GRID):
    """
    Two unit-width uniforms centred at 0 with equal weights.
    """
    return CsumFamily([(0.5, CsumShape("uniform", 0.0, 1.0))] * 2, grid)


def unit_uniform(grid=HALF_STEP_GRID):
    return CsumFamily([(1.0, CsumShape("uniform", 0.0, 1.0))], grid)


def gaussian(sigma=1.0, location=0.0, width=16.0, n=8193):
    """
    A single Gaussian on a grid spanning ``width`` standard deviations each way.
    """
    grid = Grid(location - width * sigma, location + width * sigma, n)
    return CsumFamily([(1.0, CsumShape("gaussian", location, sigma))], grid)


def gaussian_potential(sigma, alpha):
    """
    Closed form ``V_alpha`` of a Gaussian with standard deviation ``sigma``.
    """
    return (2 * math.pi * sigma**2) ** ((1 - alpha) / 2) / math.sqrt(alpha)


def bimodal_tabulated(grid=CORPUS_GRID, separation=1.5, sigma=0.4):
    """
    A family whose single tabulated component has two modes, outside the CSUM class.
    """
    half = separation / 2
    values = 0.5 * stats.norm.pdf(grid.x, -half, sigma) + 0.5 * stats.norm.pdf(
        grid.x, half, sigma
    )
    shape = TabulatedShape(GridFunction(grid, values))
    other = CsumShape("gaussian", 0.0, 0.5)
    return CsumFamily([(0.5, shape), (0.5, other)], grid, s_max=CORPUS_S_MAX)


def tabulated_from_shape(shape, grid=CORPUS_GRID):
    """
    Sample a parametric shape into a tabulated one on ``grid``.
    """
    return TabulatedShape(GridFunction(grid, np.asarray(shape.pdf(grid.x))), shape.location)
