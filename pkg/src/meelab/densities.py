"""
Conditionally symmetric and unimodal (CSUM) density families.

A family is a finite set of conditional densities ``p(x|y_i)`` with observation
weights ``w_i``, so the error density of an estimator ``g`` is the finite mixture
``p^g(x) = sum_i w_i * p(x + g_i | y_i)``.
"""
import collections
import dataclasses
import enum
import functools
import logging
import math

import numpy as np
from scipy import integrate as sp_integrate
from scipy import stats

from meelab.exceptions import ParameterError
from meelab.grid import GridFunction
from meelab.grid import integrate

log = logging.getLogger(__name__)

DEFAULT_MASS_TOL = 1e-8
CSUM_RTOL = 1e-4

ConditionalStats = collections.namedtuple("ConditionalStats", ("mean", "median", "mode"))


class ShapeKind(enum.Enum):
    GAUSSIAN = "gaussian"
    LAPLACE = "laplace"
    UNIFORM = "uniform"
    TRIANGULAR = "triangular"
    TABULATED = "tabulated"


@functools.lru_cache(maxsize=512)
def _frozen(kind, location, scale):
    if kind is ShapeKind.GAUSSIAN:
        return stats.norm(loc=location, scale=scale)
    if kind is ShapeKind.LAPLACE:
        return stats.laplace(loc=location, scale=scale)
    if kind is ShapeKind.UNIFORM:
        # scale is the support width
        return stats.uniform(loc=location - scale / 2, scale=scale)
    # scale is the support half-width
    return stats.triang(0.5, loc=location - scale, scale=2 * scale)


@dataclasses.dataclass(frozen=True)
class CsumShape:
    """
    A parametric CSUM density.

    kind
        One of the analytic :class:`ShapeKind` members.

    location
        Common mean, median and mode.

    scale
        Standard deviation (Gaussian), diversity ``b`` (Laplace), support width
        (uniform) or support half-width (triangular).
    """

    kind: ShapeKind
    location: float = 0.0
    scale: float = 1.0

    is_csum = True

    def __post_init__(self):
        kind = self.kind
        if not isinstance(kind, ShapeKind):
            try:
                kind = ShapeKind(str(kind).lower())
            except ValueError as err:
                raise ParameterError(f"Unknown shape kind {self.kind!r}") from err
        if kind is ShapeKind.TABULATED:
            raise ParameterError("Tabulated shapes are built with TabulatedShape")
        if not math.isfinite(self.location):
            raise ParameterError(f"Shape location must be finite, got {self.location}")
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise ParameterError(f"Shape scale must be finite and > 0, got {self.scale}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "location", float(self.location))
        object.__setattr__(self, "scale", float(self.scale))

    @property
    def _dist(self):
        return _frozen(self.kind, self.location, self.scale)

    def pdf(self, x):
        return self._dist.pdf(x)

    def cdf(self, x):
        return self._dist.cdf(x)

    def sf(self, x):
        return self._dist.sf(x)

    def cell_average(self, x, width):
        """
        Mean of the density over the cells ``[x - width / 2, x + width / 2]``.

        Right of the location the difference is taken on the survival function so that
        far tail cells keep their relative precision.
        """
        x = np.asarray(x, dtype=float)
        half = width / 2
        mass = np.where(
            x > self.location,
            self.sf(x - half) - self.sf(x + half),
            self.cdf(x + half) - self.cdf(x - half),
        )
        return np.clip(mass, 0.0, None) / width

    def samples(self, x, width):
        """
        Values representing the density on grid cells of ``width`` centred at ``x``.

        The Gaussian is sampled pointwise. Shapes with a jump, kink or cusp are sampled
        as cell averages, whose trapezoid sums telescope to the CDF and so keep unit mass.
        """
        if self.kind is ShapeKind.GAUSSIAN:
            return self.pdf(x)
        return self.cell_average(x, width)

    @property
    def peak(self):
        """
        Density value at the location.
        """
        if self.kind is ShapeKind.GAUSSIAN:
            return 1 / (self.scale * math.sqrt(2 * math.pi))
        if self.kind is ShapeKind.LAPLACE:
            return 1 / (2 * self.scale)
        return 1 / self.scale

    def level_radius(self, level):
        """
        Half-width of the super-level set ``{x : p(x) > level}`` for ``0 < level < peak``.
        """
        ratio = self.peak / level
        if self.kind is ShapeKind.GAUSSIAN:
            return self.scale * math.sqrt(2 * math.log(ratio))
        if self.kind is ShapeKind.LAPLACE:
            return self.scale * math.log(ratio)
        if self.kind is ShapeKind.UNIFORM:
            return self.scale / 2
        return self.scale * (1 - 1 / ratio)

    def window_integral(self, t, width, cap):
        """
        Closed form of the integral of ``min(cap, p)`` over ``[location + t, location + t + width]``
        for offsets ``t >= 0``.
        """
        t = np.asarray(t, dtype=float)
        loc = self.location
        upper = t + width
        if self.peak <= cap:
            # sf differences keep their precision far out in the tail
            return self.sf(loc + t) - self.sf(loc + upper)
        radius = self.level_radius(cap)
        plateau = np.clip(np.minimum(upper, radius) - t, 0.0, width)
        tail = self.sf(loc + np.maximum(t, radius)) - self.sf(loc + np.maximum(upper, radius))
        return cap * plateau + tail

    def stats(self):
        return ConditionalStats(self.location, self.location, self.location)

    def to_dict(self):
        return {"kind": self.kind.value, "location": self.location, "scale": self.scale}


class TabulatedShape:
    """
    A density given by samples on its own grid, evaluated by linear interpolation.

    The samples are renormalized to unit mass. Unless given, the location is the
    numerical median. Whether the samples are CSUM about that location is decided
    once here and exposed as ``is_csum``.

    function
        The sampled density as a :class:`~meelab.grid.GridFunction`.

    location
        Optional symmetry center.
    """

    kind = ShapeKind.TABULATED

    def __init__(self, function, location=None):
        mass = integrate(function)
        if not mass > 0:
            raise ParameterError("Tabulated density has no mass")
        if abs(mass - 1) > 1e-6:
            log.warning("Renormalizing tabulated density with mass %s", mass)
        self.function = GridFunction(function.grid, function.values / mass)
        x = self.function.grid.x
        self._cumulative = sp_integrate.cumulative_trapezoid(
            self.function.values, dx=self.function.grid.delta, initial=0.0
        )
        self._cumulative /= self._cumulative[-1]
        self.median = self._median()
        self.location = float(location) if location is not None else self.median
        self.peak = float(self.function.values.max())
        self.mode = float(x[int(np.argmax(self.function.values))])
        self.mean = float(sp_integrate.trapezoid(x * self.function.values, dx=function.grid.delta))
        variance = sp_integrate.trapezoid(
            (x - self.mean) ** 2 * self.function.values, dx=function.grid.delta
        )
        self.scale = float(math.sqrt(variance))
        self.is_csum = check_csum(self.pdf, self.location, self.function.grid)
        if not self.is_csum:
            log.warning("Tabulated density is not CSUM about %s", self.location)

    def _median(self):
        x = self.function.grid.x
        idx = int(np.searchsorted(self._cumulative, 0.5))
        if idx == 0:
            return float(x[0])
        lo, hi = self._cumulative[idx - 1], self._cumulative[idx]
        frac = (0.5 - lo) / (hi - lo) if hi > lo else 0.0
        return float(x[idx - 1] + frac * (x[idx] - x[idx - 1]))

    def pdf(self, x):
        return self.function(x)

    def cdf(self, x):
        return np.interp(x, self.function.grid.x, self._cumulative, left=0.0, right=1.0)

    def sf(self, x):
        return 1.0 - self.cdf(x)

    def samples(self, x, width):  # pylint: disable=unused-argument
        return self.pdf(x)

    def stats(self):
        return ConditionalStats(self.mean, self.median, self.mode)

    def to_dict(self):
        return {"kind": self.kind.value, "location": self.location, "scale": self.scale}


def check_csum(pdf, location, grid, rtol=CSUM_RTOL):
    """
    Check symmetry about ``location`` and non-increase away from it on offsets
    ``(k + 1/2) * delta``, tolerating ``rtol`` times the largest sampled value.
    """
    t = (np.arange(grid.n) + 0.5) * grid.delta
    right = pdf(location + t)
    left = pdf(location - t)
    tol = rtol * max(float(np.max(right)), float(np.max(left)), 0.0)
    symmetric = float(np.max(np.abs(right - left))) <= tol
    unimodal = float(np.max(np.diff(right), initial=0.0)) <= tol
    return bool(symmetric and unimodal)


class CsumFamily:
    """
    Weighted conditional densities sharing a grid.

    components
        Sequence of ``(weight, shape)`` pairs. Weights must be positive and sum to 1.

    grid
        The :class:`~meelab.grid.Grid` error densities are sampled on.

    s_max
        Largest admissible absolute shift. Defaults to a quarter of the grid length.

    mass_tol
        Largest mass any component may lose off the grid under an admissible shift.
    """

    def __init__(self, components, grid, s_max=None, mass_tol=DEFAULT_MASS_TOL):
        components = [(float(weight), shape) for weight, shape in components]
        if not components:
            raise ParameterError("A family needs at least one component")
        weights = np.array([weight for weight, _ in components])
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise ParameterError(f"Component weights must be > 0, got {weights.tolist()}")
        if abs(math.fsum(weights) - 1) > 1e-9:
            raise ParameterError(f"Component weights must sum to 1, got {math.fsum(weights)}")
        self.components = tuple(components)
        self.grid = grid
        self.s_max = float(s_max) if s_max is not None else grid.length / 4
        if not 0 < self.s_max < grid.length / 2:
            raise ParameterError(f"s_max must lie in (0, {grid.length / 2}), got {self.s_max}")
        self.mass_tol = float(mass_tol)
        for idx, (_, shape) in enumerate(self.components):
            clipped = self.clipped_mass(idx)
            if clipped > self.mass_tol:
                raise ParameterError(
                    f"Component {idx} loses mass {clipped:.3g} off the grid under shifts up to "
                    f"s_max={self.s_max}; widen the grid or lower s_max"
                )
            if abs(shape.location) > self.s_max:
                raise ParameterError(
                    f"Component {idx} location {shape.location} exceeds s_max={self.s_max}"
                )
        log.debug("Built family with %d component(s) on %r", self.k, grid)

    def __repr__(self):
        return f"CsumFamily(k={self.k}, grid={self.grid!r}, s_max={self.s_max})"

    @property
    def k(self):
        return len(self.components)

    @property
    def weights(self):
        return np.array([weight for weight, _ in self.components])

    @property
    def shapes(self):
        return [shape for _, shape in self.components]

    @property
    def is_csum(self):
        return all(shape.is_csum for shape in self.shapes)

    def shape(self, i):
        if not isinstance(i, (int, np.integer)) or not 0 <= i < self.k:
            raise ParameterError(f"Component index {i!r} out of range for {self.k} component(s)")
        return self.components[i][1]

    def clipped_mass(self, i):
        """
        Worst-case mass of component ``i`` falling off the grid over admissible shifts.
        """
        shape = self.shape(i)
        return max(
            float(shape.cdf(self.grid.x_min + shift) + shape.sf(self.grid.x_max + shift))
            for shift in (-self.s_max, 0.0, self.s_max)
        )

    def to_dict(self):
        return {
            "grid": self.grid.to_dict(),
            "s_max": self.s_max,
            "components": [
                dict(weight=weight, **shape.to_dict()) for weight, shape in self.components
            ],
        }


@dataclasses.dataclass(frozen=True)
class ShiftAssignment:
    """
    The estimator ``g`` on a finite observation set: one shift per component.
    """

    shifts: tuple

    def __post_init__(self):
        shifts = tuple(float(shift) for shift in self.shifts)
        if not all(math.isfinite(shift) for shift in shifts):
            raise ParameterError(f"Shifts must be finite, got {shifts}")
        object.__setattr__(self, "shifts", shifts)

    def __len__(self):
        return len(self.shifts)

    def __iter__(self):
        return iter(self.shifts)

    def __getitem__(self, idx):
        return self.shifts[idx]

    def __str__(self):
        return ";".join(repr(shift) for shift in self.shifts)

    def validate(self, family):
        if len(self.shifts) != family.k:
            raise ParameterError(
                f"Expected {family.k} shift(s) for the family, got {len(self.shifts)}"
            )
        for idx, shift in enumerate(self.shifts):
            if abs(shift) > family.s_max * (1 + 1e-12):
                raise ParameterError(
                    f"Shift {shift} of component {idx} exceeds s_max={family.s_max}"
                )
        return self

    def offset(self, i, delta):
        """
        Return a copy with component ``i`` moved by ``delta``.
        """
        shifts = list(self.shifts)
        shifts[i] += delta
        return ShiftAssignment(shifts)

    def translated(self, delta):
        """
        Return a copy with every component moved by ``delta``.
        """
        return ShiftAssignment([shift + delta for shift in self.shifts])

    def as_array(self):
        return np.array(self.shifts)


def eval_conditional(family, i, x):
    """
    Density of component ``i`` at ``x``.
    """
    value = family.shape(i).pdf(x)
    if np.ndim(value) == 0:
        return float(value)
    return value


def conditional_stats(family, i):
    """
    Mean, median and mode of component ``i``; equal for CSUM components.
    """
    return family.shape(i).stats()


def component_error_values(family, i, shift):
    """
    Samples of ``p(x + shift | y_i)`` on the family grid.
    """
    grid = family.grid
    return family.shape(i).samples(grid.x + shift, grid.delta)


def mixture_error_pdf(family, g):
    """
    The error density ``p^g(x) = sum_i w_i * p(x + g_i | y_i)`` on the family grid.

    Parametric components are evaluated in closed form at the shifted abscissae, Gaussians
    pointwise and the other shapes as cell averages of their CDF. Tabulated components
    are interpolated.
    """
    g.validate(family)
    values = np.zeros(family.grid.n)
    for idx, (weight, _) in enumerate(family.components):
        values += weight * component_error_values(family, idx, g[idx])
    return GridFunction(family.grid, values)
