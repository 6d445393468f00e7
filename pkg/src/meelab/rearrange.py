"""
Decreasing rearrangement of grid functions and the head-dominance (majorization)
and Hölder inequality checks built on it.

On a grid the level sets are measured by counting samples, so the rearrangement
``m^h`` of ``h`` is just its samples sorted in non-increasing order and read at the
abscissae ``0, delta, 2 * delta, ...``. Sample ``i`` of a rearrangement covers the
cell ``[i * delta, (i + 1) * delta)``.
"""
import collections
import dataclasses
import logging
import math

import numpy as np

from meelab.exceptions import NumericalInputError
from meelab.exceptions import ParameterError
from meelab.grid import Grid
from meelab.grid import GridFunction
from meelab.helpers import check_alpha
from meelab.helpers import holder_order

log = logging.getLogger(__name__)

INEQUALITY_TOL = 1e-9

EquimeasureResult = collections.namedtuple("EquimeasureResult", ("lhs", "rhs"))


@dataclasses.dataclass(frozen=True, eq=False)
class Rearranged:
    """
    Non-increasing samples of ``m^h`` at ``0, delta, 2 * delta, ...``.
    """

    values: np.ndarray
    delta: float
    source_grid: Grid

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or not values.size:
            raise ParameterError("A rearrangement needs a non-empty 1-D array of values")
        if np.any(np.diff(values) > 0):
            raise ParameterError("Rearranged values must be non-increasing")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "delta", float(self.delta))

    def __len__(self):
        return self.values.size

    @property
    def x(self):
        return np.arange(self.values.size) * self.delta

    @property
    def total(self):
        return self.delta * math.fsum(self.values.tolist())

    def as_function(self):
        """
        The samples as a function on the source grid, for rearranging a rearrangement.
        """
        return GridFunction(self.source_grid, self.values)


@dataclasses.dataclass(frozen=True)
class MajorizationReport:
    total_0: float
    total_g: float
    max_violation: float
    worst_x0: float
    tol: float = INEQUALITY_TOL

    @property
    def passed(self):
        return abs(self.total_0 - self.total_g) <= self.tol and self.max_violation <= self.tol


@dataclasses.dataclass(frozen=True)
class HolderChainReport:
    """
    Slacks of the head bound ``∫_0^x0 M <= ∫_0^x0 m^0`` and of the tail bound
    ``∫_x0^∞ M <= ∫_x0^∞ m^g``, where ``M = (m^g)^(alpha - n) * (m^0)^(n + 1 - alpha)``.
    """

    alpha: float
    n: int
    x0: float
    head_lhs: float
    head_rhs: float
    tail_lhs: float
    tail_rhs: float
    tol: float = INEQUALITY_TOL

    @property
    def head_slack(self):
        return self.head_rhs - self.head_lhs

    @property
    def tail_slack(self):
        return self.tail_rhs - self.tail_lhs

    @property
    def passed(self):
        return self.head_slack >= -self.tol and self.tail_slack >= -self.tol


@dataclasses.dataclass(frozen=True)
class HolderBoundReport:
    """
    Both sides of the Hölder inequality on the head ``[0, x0]`` and on the tail ``[x0, ∞)``:
    the mixed-power integral and ``(∫ m^g)^(alpha - n) * (∫ m^0)^(n + 1 - alpha)``.
    """

    alpha: float
    x0: float
    head_lhs: float
    head_rhs: float
    tail_lhs: float
    tail_rhs: float
    tol: float = INEQUALITY_TOL

    @property
    def passed(self):
        return (
            self.head_lhs <= self.head_rhs + self.tol and self.tail_lhs <= self.tail_rhs + self.tol
        )


@dataclasses.dataclass(frozen=True)
class PropositionReport:
    """
    Comparison of ``V_alpha(m^0)`` with ``V_alpha(m^g)`` through its chain of intermediate
    integrals.

    For ``alpha > 1`` the chain is ``V_alpha(m^0), T_n, T_(n-1), ..., T_0 = V_alpha(m^g)`` with
    ``T_j = ∫ (m^0)^j (m^g)^(alpha - j)``; it must be non-increasing.
    For ``alpha < 1`` it is ``V_alpha(m^g), ∫_0^S_g (m^0)^alpha``, which must be non-increasing,
    and the mass of ``m^0`` beyond ``S_g`` must vanish.
    """

    alpha: float
    v_0: float
    v_g: float
    chain: tuple
    tail_mass: float
    tol: float = INEQUALITY_TOL

    @property
    def ordered(self):
        if self.alpha > 1:
            return self.v_0 >= self.v_g - self.tol
        return self.v_0 <= self.v_g + self.tol

    @property
    def passed(self):
        steps = np.diff(self.chain)
        chain_ok = bool(np.all(steps <= self.tol))
        return self.ordered and chain_ok and self.tail_mass <= self.tol


def _samples(h):
    if isinstance(h, Rearranged):
        return h.values, h.delta
    return h.values, h.grid.delta


class _StepIntegral:
    """
    Integrals over ``[0, x0]`` of the step function with value ``values[i]`` on cell ``i``.
    """

    def __init__(self, values, delta):
        self.values = values
        self.delta = delta
        self.prefix = np.concatenate(([0.0], np.cumsum(values)))
        self.total = delta * math.fsum(values.tolist())

    def head(self, x0):
        if not x0 >= 0:
            raise ParameterError(f"x0 must be >= 0, got {x0}")
        steps = x0 / self.delta
        whole = int(math.floor(steps))
        if whole >= self.values.size:
            return self.total
        frac = steps - whole
        return self.delta * (self.prefix[whole] + frac * float(self.values[whole]))

    def tail(self, x0):
        return max(self.total - self.head(x0), 0.0)


def _same_support(m0, mg):
    if len(m0) != len(mg) or not math.isclose(m0.delta, mg.delta, rel_tol=1e-12):
        raise ParameterError("Rearrangements must come from grids with the same size and step")


def level_measure(h, z):
    """
    Measure of the level set ``{x : h(x) >= z}``, counted in samples times the step.
    """
    if not z >= 0:
        raise ParameterError(f"Level must be >= 0, got {z}")
    values, delta = _samples(h)
    return delta * int(np.count_nonzero(values >= z))


def decreasing_rearrangement(h):
    """
    Return the decreasing rearrangement of a grid function (or of a rearrangement).

    Ties keep their source order.
    """
    if isinstance(h, Rearranged):
        return h
    if not np.all(np.isfinite(h.values)):
        raise NumericalInputError("Cannot rearrange non-finite values")
    order = np.argsort(-h.values, kind="stable")
    return Rearranged(h.values[order], h.grid.delta, h.grid)


def equimeasure_check(h, alpha):
    """
    Return ``(sum_i h_i^alpha * delta, sum_i m_i^alpha * delta)``.

    Both sums are correctly rounded sums of the same multiset, so they agree bit for bit.
    """
    alpha = float(alpha)
    if not alpha > 0:
        raise ParameterError(f"alpha must be > 0, got {alpha}")
    values, delta = _samples(h)
    rearranged = decreasing_rearrangement(h).values
    lhs = delta * math.fsum(np.power(values, alpha).tolist())
    rhs = delta * math.fsum(np.power(rearranged, alpha).tolist())
    return EquimeasureResult(lhs, rhs)


def head_integral(m, x0):
    """
    ``∫_0^x0 m``: the top ``floor(x0 / delta)`` samples plus the prorated boundary sample.
    """
    return _StepIntegral(m.values, m.delta).head(x0)


def support_end(m):
    """
    ``S = sup{x : m(x) > 0}``, the end of the last cell with a positive sample.
    """
    return m.delta * int(np.count_nonzero(m.values > 0))


def majorization_check(m0, mg, tol=INEQUALITY_TOL):
    """
    Compare the totals of ``m^0`` and ``m^g`` and find the largest excess of
    ``∫_0^x0 m^g`` over ``∫_0^x0 m^0`` for ``x0`` on the lattice ``0, delta, ...``.
    """
    _same_support(m0, mg)
    heads_0 = np.concatenate(([0.0], np.cumsum(m0.values))) * m0.delta
    heads_g = np.concatenate(([0.0], np.cumsum(mg.values))) * mg.delta
    excess = heads_g - heads_0
    worst = int(np.argmax(excess))
    report = MajorizationReport(
        total_0=m0.total,
        total_g=mg.total,
        max_violation=float(excess[worst]),
        worst_x0=worst * m0.delta,
        tol=tol,
    )
    if not report.passed:
        log.debug("Head dominance fails: %s", report)
    return report


class _HolderTerms:
    """
    Step integrals of ``m^0``, ``m^g`` and of ``(m^g)^(alpha - n) * (m^0)^(n + 1 - alpha)``.
    """

    def __init__(self, m0, mg, alpha):
        _same_support(m0, mg)
        self.alpha = check_alpha(alpha)
        self.n = holder_order(self.alpha)
        mixed = np.power(mg.values, self.alpha - self.n) * np.power(
            m0.values, self.n + 1 - self.alpha
        )
        self.mixed = _StepIntegral(mixed, m0.delta)
        self.m0 = _StepIntegral(m0.values, m0.delta)
        self.mg = _StepIntegral(mg.values, mg.delta)

    def chain(self, x0, tol):
        head_lhs = self.mixed.head(x0)
        return HolderChainReport(
            alpha=self.alpha,
            n=self.n,
            x0=float(x0),
            head_lhs=head_lhs,
            head_rhs=self.m0.head(x0),
            tail_lhs=self.mixed.total - head_lhs,
            tail_rhs=self.mg.total - self.mg.head(x0),
            tol=tol,
        )

    def bound(self, x0, tol):
        low, high = self.alpha - self.n, self.n + 1 - self.alpha
        head_lhs = self.mixed.head(x0)
        return HolderBoundReport(
            alpha=self.alpha,
            x0=float(x0),
            head_lhs=head_lhs,
            head_rhs=self.mg.head(x0) ** low * self.m0.head(x0) ** high,
            tail_lhs=self.mixed.total - head_lhs,
            tail_rhs=self.mg.tail(x0) ** low * self.m0.tail(x0) ** high,
            tol=tol,
        )


def holder_chain_check(m0, mg, alpha, x0, tol=INEQUALITY_TOL):
    """
    Evaluate the head and tail bounds on the mixed power of ``m^g`` and ``m^0`` with
    ``n = ceil(alpha) - 1``.
    """
    return _HolderTerms(m0, mg, alpha).chain(x0, tol)


def holder_bound(m0, mg, alpha, x0, tol=INEQUALITY_TOL):
    """
    Both sides of the Hölder inequality underlying :func:`holder_chain_check`.
    """
    return _HolderTerms(m0, mg, alpha).bound(x0, tol)


def holder_sweep(m0, mg, alpha, x0s, tol=INEQUALITY_TOL):
    """
    :func:`holder_chain_check` and :func:`holder_bound` over several ``x0`` at once.

    Returns a list of ``(chain_report, bound_report)`` pairs.
    """
    terms = _HolderTerms(m0, mg, alpha)
    return [(terms.chain(x0, tol), terms.bound(x0, tol)) for x0 in x0s]


def _potential(values, delta, alpha):
    return delta * math.fsum(np.power(values, alpha).tolist())


def proposition_check(m0, mg, alpha, tol=INEQUALITY_TOL):
    """
    Check ``V_alpha(m^0) >= V_alpha(m^g)`` for ``alpha > 1`` (``<=`` for ``alpha < 1``) along
    the chain of intermediate integrals described in :class:`PropositionReport`.
    """
    _same_support(m0, mg)
    alpha = check_alpha(alpha)
    delta = m0.delta
    v_0 = _potential(m0.values, delta, alpha)
    v_g = _potential(mg.values, delta, alpha)
    s_g = support_end(mg)
    if alpha > 1:
        n = holder_order(alpha)
        chain = [v_0]
        for j in range(n, -1, -1):
            term = np.power(m0.values, j) * np.power(mg.values, alpha - j)
            chain.append(delta * math.fsum(term.tolist()))
        tail_mass = 0.0
    else:
        within = m0.values[: int(round(s_g / delta))]
        chain = [v_g, _potential(within, delta, alpha)]
        tail_mass = max(m0.total - head_integral(m0, s_g), 0.0)
    return PropositionReport(
        alpha=alpha, v_0=v_0, v_g=v_g, chain=tuple(chain), tail_mass=tail_mass, tol=tol
    )
