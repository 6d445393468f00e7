"""
Continuous, bounded approximations of CSUM components by window averaging of the
truncated density, and checks that they converge to the component.

For a component recentred at 0,

    f_n(x) = n * ∫_|x|^(|x| + 1/n) min(n, p(z)) dz

which is continuous, symmetric, unimodal, bounded by ``n`` and dominated by ``p``.
"""
import dataclasses
import logging

import numpy as np
from scipy import integrate as sp_integrate

from meelab.densities import ShapeKind
from meelab.densities import mixture_error_pdf
from meelab.exceptions import ParameterError
from meelab.grid import GridFunction
from meelab.grid import half_line_weights
from meelab.grid import power_integral
from meelab.helpers import check_alpha

log = logging.getLogger(__name__)

SUBGRID_FACTOR = 16
DOMINATION_TOL = 1e-9
DEFAULT_THRESHOLD = 5e-3
DEFAULT_N_LIST = (2, 4, 8, 16, 32, 64, 128, 256)


def _check_order(n):
    if int(n) != n or n <= 0:
        raise ParameterError(f"Smoothing order must be a positive integer, got {n}")
    return int(n)


def _window_tabulated(shape, n, t, delta):
    """
    Window integral of a tabulated shape by cumulative trapezoid on a sub-grid.
    """
    fine_step = delta / SUBGRID_FACTOR
    reach = float(np.max(t)) + 1.0 / n
    z = np.arange(int(np.ceil(reach / fine_step)) + 2) * fine_step
    clipped = np.minimum(float(n), shape.pdf(shape.location + z))
    cumulative = sp_integrate.cumulative_trapezoid(clipped, dx=fine_step, initial=0.0)
    return np.interp(t + 1.0 / n, z, cumulative) - np.interp(t, z, cumulative)


def _smoothed_values(shape, n, u, delta):
    """
    ``f_n`` of a shape recentred at 0, evaluated at the points ``u``.
    """
    if not shape.is_csum:
        raise ParameterError("Only CSUM components can be smoothed")
    t = np.abs(np.asarray(u, dtype=float))
    if shape.kind is ShapeKind.TABULATED:
        window = _window_tabulated(shape, n, t, delta)
    else:
        window = shape.window_integral(t, 1.0 / n, float(n))
    return np.clip(n * window, 0.0, None)


def smooth_truncate(family, i, n):
    """
    ``f_n`` of component ``i``, recentred at 0, sampled on the family grid.

    Parametric components use the closed-form window integral, tabulated ones a
    cumulative trapezoid on a grid :data:`SUBGRID_FACTOR` times finer.
    """
    n = _check_order(n)
    grid = family.grid
    return GridFunction(grid, _smoothed_values(family.shape(i), n, grid.x, grid.delta))


def smoothed_mixture(family, g, n):
    """
    ``f_n^g(x) = sum_i w_i * f_n(x + g_i - location_i | y_i)``: each component is smoothed
    about 0 first and shifted afterwards.
    """
    n = _check_order(n)
    g.validate(family)
    grid = family.grid
    values = np.zeros(grid.n)
    for idx, (weight, shape) in enumerate(family.components):
        u = grid.x + g[idx] - shape.location
        values += weight * _smoothed_values(shape, n, u, grid.delta)
    return GridFunction(grid, values)


@dataclasses.dataclass(frozen=True)
class ConvergenceRow:
    n: int
    l1_gap: float
    v_alpha_fn: float
    v_alpha_p: float
    domination_violation: float
    tol: float = DOMINATION_TOL

    @property
    def passed(self):
        """
        Whether ``V_alpha(f_n) <= V_alpha(p)`` within tolerance.
        """
        return self.v_alpha_fn <= self.v_alpha_p + self.tol

    @property
    def relative_gap(self):
        return abs(self.v_alpha_p - self.v_alpha_fn) / self.v_alpha_p


@dataclasses.dataclass(frozen=True)
class ConvergenceReport:
    alpha: float
    rows: tuple
    threshold: float

    @property
    def monotone(self):
        gaps = [row.l1_gap for row in self.rows]
        return all(later <= earlier + 1e-12 for earlier, later in zip(gaps, gaps[1:]))

    @property
    def converged(self):
        return bool(self.rows) and self.rows[-1].l1_gap < self.threshold

    @property
    def passed(self):
        return all(row.passed for row in self.rows) and self.monotone and self.converged


def convergence_report(family, g, n_list=DEFAULT_N_LIST, alpha=2.0, threshold=DEFAULT_THRESHOLD):
    """
    Follow ``f_n^g`` towards ``p^g`` along ``n_list``.

    Per ``n`` this records the L1 distance and the largest excess ``f_n^g - p^g``, both
    over ``x >= 0``, and the information potentials of both functions.
    """
    alpha = check_alpha(alpha)
    n_list = [_check_order(n) for n in n_list]
    if any(later <= earlier for earlier, later in zip(n_list, n_list[1:])):
        raise ParameterError(f"n_list must be strictly increasing, got {n_list}")
    p = mixture_error_pdf(family, g)
    v_p = power_integral(p, alpha)
    weights = half_line_weights(family.grid)
    positive = family.grid.x >= -1e-9 * family.grid.delta
    rows = []
    for n in n_list:
        f = smoothed_mixture(family, g, n)
        diff = f.values - p.values
        rows.append(
            ConvergenceRow(
                n=n,
                l1_gap=float(np.sum(np.abs(diff) * weights)),
                v_alpha_fn=power_integral(f, alpha),
                v_alpha_p=v_p,
                domination_violation=max(float(np.max(diff[positive])), 0.0),
            )
        )
        log.debug("n=%d: %s", n, rows[-1])
    report = ConvergenceReport(alpha=alpha, rows=tuple(rows), threshold=float(threshold))
    if not report.monotone:
        log.warning("L1 gap does not decrease along n_list %s", n_list)
    return report


@dataclasses.dataclass(frozen=True)
class PropositionConditions:
    non_negative: bool
    symmetric: bool
    unimodal: bool
    bounded: bool
    finite_potential: bool

    @property
    def passed(self):
        return all(dataclasses.astuple(self))


def proposition_conditions(f, alpha, bound, tol=DOMINATION_TOL):
    """
    Check that a grid function centred at 0 is non-negative, symmetric, non-increasing on
    ``x >= 0``, bounded by ``bound`` and has a finite information potential of order ``alpha``.
    """
    alpha = check_alpha(alpha)
    x = f.grid.x
    values = f.values
    scale = max(1.0, float(np.max(values)))
    mirrored = f(-x)
    inside = (-x >= f.grid.x_min) & (-x <= f.grid.x_max)
    right = values[x >= 0]
    potential = power_integral(f, alpha)
    return PropositionConditions(
        non_negative=bool(np.all(values >= 0)),
        symmetric=bool(np.all(np.abs(values - mirrored)[inside] <= tol * scale)),
        unimodal=bool(np.all(np.diff(right) <= tol * scale)),
        bounded=bool(np.max(values) <= bound + tol),
        finite_potential=bool(np.isfinite(potential)),
    )
