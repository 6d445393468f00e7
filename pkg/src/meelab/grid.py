"""
Uniform-grid representation of non-negative functions on an interval.

Quadrature is the composite trapezoidal rule. On densities that vanish at both
grid ends it coincides with the plain Riemann sum, so piecewise-constant functions
whose jumps fall between samples and piecewise-linear functions whose kinks fall
on cell midpoints are integrated exactly. Sums are accumulated with
:func:`math.fsum`, which makes every integral invariant under permutation of the
samples and hence under lattice-aligned shifts.
"""
import dataclasses
import functools
import logging
import math

import numpy as np

from meelab.exceptions import NumericalInputError
from meelab.exceptions import ParameterError
from meelab.helpers import lattice_steps

log = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class Grid:
    """
    ``n`` equally spaced abscissae ``x_min + i * delta`` covering ``[x_min, x_max]``.
    """

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise ParameterError("Grid bounds must be finite")
        if not self.x_min < self.x_max:
            raise ParameterError(f"Grid requires x_min < x_max, got {self.x_min} >= {self.x_max}")
        if int(self.n) != self.n or self.n < 2:
            raise ParameterError(f"Grid requires an integer n >= 2, got {self.n}")
        object.__setattr__(self, "x_min", float(self.x_min))
        object.__setattr__(self, "x_max", float(self.x_max))
        object.__setattr__(self, "n", int(self.n))

    @property
    def delta(self):
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def length(self):
        return self.x_max - self.x_min

    @functools.cached_property
    def x(self):
        """
        The sample abscissae (read-only).
        """
        x = self.x_min + np.arange(self.n) * self.delta
        x.setflags(write=False)
        return x

    def refined(self):
        """
        Return the grid with the step halved over the same interval.
        """
        return Grid(self.x_min, self.x_max, 2 * self.n - 1)

    def to_dict(self):
        return {"x_min": self.x_min, "x_max": self.x_max, "n": self.n}

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(float(data["x_min"]), float(data["x_max"]), data["n"])
        except (KeyError, TypeError, ValueError) as err:
            raise ParameterError(f"Invalid grid specification {data!r}: {err}") from err


class GridFunction:
    """
    A non-negative function sampled on a :class:`Grid`.

    grid
        The grid the values are sampled on.

    values
        One non-negative value per grid sample. The array is copied and frozen.
    """

    def __init__(self, grid, values):
        values = np.array(values, dtype=float)
        if values.shape != (grid.n,):
            raise ParameterError(f"Expected {grid.n} values for the grid, got shape {values.shape}")
        # NaN is let through on purpose, quadrature reports it as non-finite input
        if np.any(values < 0):
            raise ParameterError(f"Grid function values must be >= 0, minimum is {values.min()}")
        values.setflags(write=False)
        self.grid = grid
        self.values = values

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.n))

    def __repr__(self):
        return f"GridFunction(grid={self.grid!r}, max={self.values.max()!r})"

    def __eq__(self, other):
        if not isinstance(other, GridFunction):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)

    __hash__ = None

    def __add__(self, other):
        if not isinstance(other, GridFunction):
            return NotImplemented
        if other.grid != self.grid:
            raise ParameterError("Cannot add grid functions sampled on different grids")
        return GridFunction(self.grid, self.values + other.values)

    def __mul__(self, scalar):
        return GridFunction(self.grid, self.values * float(scalar))

    __rmul__ = __mul__

    def __call__(self, x):
        """
        Evaluate by linear interpolation, zero outside the grid.
        """
        return np.interp(x, self.grid.x, self.values, left=0.0, right=0.0)


def _checked(values):
    if not np.all(np.isfinite(values)):
        raise NumericalInputError("Grid function contains non-finite values")
    return values


def trapezoid(values, delta):
    """
    Composite trapezoidal rule for samples of any sign with spacing ``delta``.
    """
    values = _checked(np.asarray(values, dtype=float))
    return delta * (math.fsum(values.tolist()) - 0.5 * (values[0] + values[-1]))


def integrate(f):
    """
    Composite trapezoidal approximation of the integral of ``f`` over the grid.
    """
    return trapezoid(f.values, f.grid.delta)


def power_integral(f, alpha):
    """
    Trapezoidal approximation of the integral of ``f ** alpha``, with ``0 ** alpha = 0``.

    alpha
        Exponent, must be > 0.
    """
    alpha = float(alpha)
    if not alpha > 0:
        raise ParameterError(f"Power integral requires alpha > 0, got {alpha}")
    return trapezoid(np.power(_checked(f.values), alpha), f.grid.delta)


def half_line_weights(grid):
    """
    Trapezoidal weights of the integral over ``[0, x_max]``.

    A sample sitting on the origin gets half weight. Without one the cells of the
    positive samples tile the half-line when the grid is offset by half a step.
    """
    x = grid.x
    delta = grid.delta
    weights = np.where(x > 0, delta, 0.0)
    on_origin = np.abs(x) <= 1e-9 * delta
    weights[on_origin] = 0.5 * delta
    if x[-1] > 0:
        weights[-1] = 0.5 * delta
    return weights


def integrate_half_line(f):
    """
    Integral of ``f`` over ``x >= 0``.
    """
    return math.fsum((_checked(f.values) * half_line_weights(f.grid)).tolist())


def shift_resample(f, delta_shift):
    """
    Return ``g`` with ``g(x_i) = f(x_i + delta_shift)``.

    Shifts that are whole multiples of the step move the samples by index and are
    exact. Other shifts interpolate linearly between neighbours. Points mapping
    outside the grid evaluate to 0.
    """
    grid = f.grid
    if abs(delta_shift) >= grid.length:
        raise ParameterError(
            f"Shift {delta_shift} must be smaller in magnitude than the grid length {grid.length}"
        )
    steps = lattice_steps(delta_shift, grid.delta)
    if steps is not None:
        values = np.zeros(grid.n)
        if steps >= 0:
            values[: grid.n - steps] = f.values[steps:]
        else:
            values[-steps:] = f.values[: grid.n + steps]
        return GridFunction(grid, values)
    log.debug("Interpolating shift %s on a grid with step %s", delta_shift, grid.delta)
    return GridFunction(grid, f(grid.x + delta_shift))
