"""
Optimal estimates on a CSUM family: the median shift assignment, the comparison of
information potentials at the median against candidate assignments, and a lattice
search for the assignment optimizing any risk.
"""
import concurrent.futures
import dataclasses
import enum
import functools
import itertools
import logging

import numpy as np

from meelab import risks
from meelab.densities import ShiftAssignment
from meelab.densities import component_error_values
from meelab.densities import mixture_error_pdf
from meelab.exceptions import NumericalError
from meelab.exceptions import NumericalInputError
from meelab.exceptions import ParameterError
from meelab.grid import GridFunction
from meelab.helpers import check_alpha
from meelab.helpers import lattice_offsets
from meelab.helpers import snap_to_lattice

log = logging.getLogger(__name__)

THEOREM_TOL = 1e-8
TIE_TOL = 1e-12

PER_COMPONENT = "per-component"
JOINT = "joint"
PERTURBATION_MODES = (PER_COMPONENT, JOINT)


class Verdict(enum.Enum):
    HOLDS_LOWER = "HoldsLower"
    HOLDS_UPPER = "HoldsUpper"
    VIOLATION = "Violation"


@dataclasses.dataclass(frozen=True)
class Perturbation:
    """
    A candidate assignment together with its offsets from the median assignment.

    component
        Index of the single perturbed component, or None for a joint perturbation.
    """

    candidate: ShiftAssignment
    offsets: tuple
    component: int = None

    @property
    def label(self):
        if self.component is not None:
            return repr(self.offsets[self.component])
        return ";".join(repr(offset) for offset in self.offsets)


@dataclasses.dataclass(frozen=True)
class TheoremReport:
    alpha: float
    candidate: ShiftAssignment
    v_median: float
    v_candidate: float
    gap: float
    verdict: Verdict
    h_median: float
    h_candidate: float
    renyi_consistent: bool
    component: int = None
    perturbation: str = ""
    csum: bool = True

    @property
    def holds(self):
        return self.verdict is not Verdict.VIOLATION


@dataclasses.dataclass(frozen=True)
class SearchConfig:
    """
    Shift lattice explored by :func:`optimize_shifts`.

    step, half_width
        Lattice spacing and extent around the median assignment, in units of each
        component's scale.

    restarts
        Random restarts of the coordinate descent used for more than three components.

    max_iters
        Upper bound on coordinate descent sweeps per start.

    seed
        Seed of the generator drawing the restarts.
    """

    step: float = 0.05
    half_width: float = 0.5
    restarts: int = 2
    max_iters: int = 50
    seed: int = 0

    def __post_init__(self):
        if not self.step > 0 or not self.half_width > 0:
            raise ParameterError("Search step and half_width must be > 0")
        if self.step > self.half_width:
            raise ParameterError(
                f"Search step {self.step} exceeds the half width {self.half_width}"
            )
        if int(self.restarts) != self.restarts or self.restarts < 0:
            raise ParameterError(f"restarts must be a non-negative integer, got {self.restarts}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ParameterError(f"max_iters must be a positive integer, got {self.max_iters}")

    @classmethod
    def from_dict(cls, data, seed=0):
        return cls(
            step=float(data["step"]),
            half_width=float(data["half_width"]),
            restarts=int(data["restarts"]),
            max_iters=int(data["max_iters"]),
            seed=int(seed),
        )


@dataclasses.dataclass(frozen=True)
class OptimizeResult:
    best_shifts: ShiftAssignment
    best_value: float
    evaluations: int
    trace: tuple
    strategy: str = "exhaustive"
    converged: bool = True


def median_assignment(family):
    """
    Shift every component by its median, centering each error component at 0.
    """
    return ShiftAssignment([shape.location for shape in family.shapes])


def _component_offsets(family, i, step, half_width, include_zero=True):
    """
    Lattice offsets of component ``i`` in units of its scale, snapped to the grid step.
    """
    scale = family.shape(i).scale
    delta = family.grid.delta
    offsets = [
        snap_to_lattice(offset * scale, delta)
        for offset in lattice_offsets(step, half_width, include_zero=include_zero)
    ]
    # coarse grids can snap neighbouring offsets onto the same lattice point
    unique = sorted(set(offsets))
    if len(unique) < len(offsets):
        log.debug("Component %d: %d offsets collapse on the grid", i, len(offsets) - len(unique))
    if not include_zero:
        unique = [offset for offset in unique if offset != 0.0]
    return unique


def perturbation_grid(family, step=0.1, half_width=2.0, mode=PER_COMPONENT):
    """
    Build the candidate assignments of a theorem sweep.

    step, half_width
        Offset lattice around the median assignment, in units of the perturbed
        component's scale. Offsets are snapped to multiples of the grid step.

    mode
        ``per-component`` moves one component at a time, ``joint`` moves both
        components of a two-component family over the product lattice.

    Candidates whose shifts leave ``[-s_max, s_max]`` are skipped.
    """
    median = median_assignment(family)
    perturbations = []
    if mode == PER_COMPONENT:
        for i in range(family.k):
            for offset in _component_offsets(family, i, step, half_width, include_zero=False):
                offsets = tuple(offset if j == i else 0.0 for j in range(family.k))
                perturbations.append(Perturbation(median.offset(i, offset), offsets, i))
    elif mode == JOINT:
        if family.k != 2:
            raise ParameterError(f"Joint perturbations need exactly 2 components, got {family.k}")
        lattices = [_component_offsets(family, i, step, half_width) for i in range(2)]
        for offsets in itertools.product(*lattices):
            if offsets == (0.0, 0.0):
                continue
            candidate = ShiftAssignment([s + o for s, o in zip(median, offsets)])
            perturbations.append(Perturbation(candidate, tuple(offsets)))
    else:
        raise ParameterError(
            f"Unknown perturbation mode {mode!r}, expected one of {PERTURBATION_MODES}"
        )
    admissible = [
        pert for pert in perturbations if max(abs(s) for s in pert.candidate) <= family.s_max
    ]
    if len(admissible) < len(perturbations):
        log.warning(
            "Skipping %d candidate(s) with shifts beyond s_max=%s",
            len(perturbations) - len(admissible),
            family.s_max,
        )
    return admissible


def _as_perturbation(candidate, median):
    if isinstance(candidate, Perturbation):
        return candidate
    candidate = ShiftAssignment(candidate)
    offsets = tuple(c - m for c, m in zip(candidate, median))
    moved = [idx for idx, offset in enumerate(offsets) if offset != 0.0]
    return Perturbation(candidate, offsets, moved[0] if len(moved) == 1 else None)


def _verdict(alpha, gap, tol):
    if alpha < 1 and gap <= tol:
        return Verdict.HOLDS_LOWER
    if alpha > 1 and gap >= -tol:
        return Verdict.HOLDS_UPPER
    return Verdict.VIOLATION


def _report(alpha, v_median, v_candidate, perturbation, csum, tol):
    gap = v_median - v_candidate
    verdict = _verdict(alpha, gap, tol)
    h_median = risks.renyi_from_potential(v_median, alpha)
    h_candidate = risks.renyi_from_potential(v_candidate, alpha)
    # the potential tolerance carried through log(V) / (1 - alpha)
    renyi_tol = tol / (abs(1 - alpha) * min(v_median, v_candidate))
    renyi_holds = h_median - h_candidate <= renyi_tol
    return TheoremReport(
        alpha=alpha,
        candidate=perturbation.candidate,
        v_median=v_median,
        v_candidate=v_candidate,
        gap=gap,
        verdict=verdict,
        h_median=h_median,
        h_candidate=h_candidate,
        renyi_consistent=renyi_holds == (verdict is not Verdict.VIOLATION),
        component=perturbation.component,
        perturbation=perturbation.label,
        csum=csum,
    )


def theorem_gap(family, alpha, candidate, tol=THEOREM_TOL):
    """
    Compare ``V_alpha`` of the error at the median assignment against a candidate.

    The gap is ``v_median - v_candidate``. The median assignment minimizes ``V_alpha``
    for ``alpha < 1`` and maximizes it for ``alpha > 1`` on CSUM families.
    """
    alpha = check_alpha(alpha)
    median = median_assignment(family)
    perturbation = _as_perturbation(candidate, median)
    v_median = risks.information_potential(mixture_error_pdf(family, median), alpha)
    v_candidate = risks.information_potential(
        mixture_error_pdf(family, perturbation.candidate), alpha
    )
    return _report(alpha, v_median, v_candidate, perturbation, family.is_csum, tol)


def _candidate_potentials(family, alphas, candidate):
    p = mixture_error_pdf(family, candidate)
    return [risks.information_potential(p, alpha) for alpha in alphas]


def verify_theorem(family, alphas, perturbations, tol=THEOREM_TOL, jobs=1):
    """
    Run :func:`theorem_gap` over every ``(alpha, candidate)`` cell.

    Reports are ordered by alpha, then by candidate. With ``jobs > 1`` candidates are
    evaluated in worker processes; the result is identical to the sequential one.
    """
    alphas = [check_alpha(alpha) for alpha in alphas]
    median = median_assignment(family)
    perturbations = [_as_perturbation(pert, median) for pert in perturbations]
    for pert in perturbations:
        pert.candidate.validate(family)
    if not perturbations or not alphas:
        return []
    log.debug(
        "Sweeping %d alpha(s) x %d candidate(s) with %d job(s)",
        len(alphas),
        len(perturbations),
        jobs,
    )
    worker = functools.partial(_candidate_potentials, family, alphas)
    candidates = [pert.candidate for pert in perturbations]
    v_median = worker(median)
    if jobs > 1 and len(candidates) > 1:
        chunksize = max(1, len(candidates) // (4 * jobs))
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as executor:
            potentials = list(executor.map(worker, candidates, chunksize=chunksize))
    else:
        potentials = [worker(candidate) for candidate in candidates]
    csum = family.is_csum
    reports = [
        _report(alpha, v_median[a_idx], potentials[c_idx][a_idx], pert, csum, tol)
        for a_idx, alpha in enumerate(alphas)
        for c_idx, pert in enumerate(perturbations)
    ]
    violations = sum(1 for report in reports if not report.holds)
    if violations:
        log.warning(
            "%d of %d sweep cell(s) violate the ordering%s",
            violations,
            len(reports),
            "" if csum else " (family is not CSUM)",
        )
    return reports


class _ShiftSearch:
    """
    Lattice search state: the candidate shifts of every component and their
    precomputed error samples.
    """

    def __init__(self, family, spec, search):
        self.family = family
        self.spec = spec
        self.median = median_assignment(family)
        self.offsets = [
            np.array(_component_offsets(family, i, search.step, search.half_width))
            for i in range(family.k)
        ]
        for i, offsets in enumerate(self.offsets):
            reach = abs(self.median[i]) + float(np.max(np.abs(offsets)))
            if reach > family.s_max * (1 + 1e-12):
                raise ParameterError(
                    f"Search lattice of component {i} reaches {reach}, beyond s_max={family.s_max}"
                )
        self.center = [int(np.flatnonzero(offsets == 0.0)[0]) for offsets in self.offsets]
        self.samples = [
            np.array(
                [
                    weight * component_error_values(family, i, self.median[i] + offset)
                    for offset in self.offsets[i]
                ]
            )
            for i, (weight, _) in enumerate(family.components)
        ]
        self.evaluations = 0
        self.trace = []
        self._cache = {}

    def shifts(self, idx):
        return ShiftAssignment(
            [self.median[i] + self.offsets[i][j] for i, j in enumerate(idx)]
        )

    def norm(self, idx):
        return sum((j - c) ** 2 for j, c in zip(idx, self.center))

    def value(self, idx):
        """
        Risk at the lattice point ``idx``, memoized.
        """
        idx = tuple(int(j) for j in idx)
        if idx in self._cache:
            return self._cache[idx]
        values = np.zeros(self.family.grid.n)
        for i, j in enumerate(idx):
            values += self.samples[i][j]
        try:
            value = risks.evaluate(self.spec, GridFunction(self.family.grid, values))
        except (NumericalError, NumericalInputError) as err:
            raise NumericalError(
                f"Risk {self.spec} failed: {err}", shifts=self.shifts(idx)
            ) from err
        self.record(idx, value)
        return value

    def record(self, idx, value):
        if not np.isfinite(value):
            raise NumericalError(f"Risk {self.spec} is not finite", shifts=self.shifts(idx))
        self.evaluations += 1
        self.trace.append((self.shifts(idx), value))
        self._cache[idx] = value

    def better(self, idx, value, best_idx, best_value):
        """
        Lower objective wins; near ties go to the point closer to the median assignment.
        """
        if best_idx is None:
            return True
        obj, best_obj = self.spec.objective(value), self.spec.objective(best_value)
        if obj < best_obj - TIE_TOL:
            return True
        return abs(obj - best_obj) <= TIE_TOL and self.norm(idx) < self.norm(best_idx)

    def free_components(self):
        # a common shift leaves translation invariant risks unchanged, so component 0 stays put
        if self.spec.translation_invariant:
            return list(range(1, self.family.k))
        return list(range(self.family.k))


_LINEAR_RISKS = {
    risks.RiskKind.MSE: (risks.mse_risk, 0.0),
    risks.RiskKind.MAD: (risks.mad_risk, 0.0),
    risks.RiskKind.ZERO_ONE: (lambda f: -float(f(0.0)), 1.0),
}


def _exhaustive_linear(state):
    """
    Bayes risks are affine in the error density, so the risk on the whole lattice is a
    sum of per-component tables.
    """
    functional, constant = _LINEAR_RISKS[state.spec.kind]
    grid = state.family.grid
    tables = [
        np.array([functional(GridFunction(grid, row)) for row in samples])
        for samples in state.samples
    ]
    total = functools.reduce(np.add.outer, tables) + constant
    best_idx, best_value = None, None
    for idx in itertools.product(*(range(len(table)) for table in tables)):
        value = float(total[idx])
        state.record(idx, value)
        if state.better(idx, value, best_idx, best_value):
            best_idx, best_value = idx, value
    return best_idx


def _exhaustive(state):
    free = state.free_components()
    ranges = [
        range(len(state.offsets[i])) if i in free else [state.center[i]]
        for i in range(state.family.k)
    ]
    best_idx, best_value = None, None
    for idx in itertools.product(*ranges):
        value = state.value(idx)
        if state.better(idx, value, best_idx, best_value):
            best_idx, best_value = idx, value
    return best_idx


def _coordinate_descent(state, start, max_iters):
    idx = list(start)
    value = state.value(idx)
    free = state.free_components()
    for iteration in range(max_iters):
        previous = state.spec.objective(value)
        for i in free:
            best_j, best_value = idx[i], value
            for j in range(len(state.offsets[i])):
                trial = idx[:i] + [j] + idx[i + 1 :]
                trial_value = state.value(trial)
                current = idx[:i] + [best_j] + idx[i + 1 :]
                if state.better(tuple(trial), trial_value, tuple(current), best_value):
                    best_j, best_value = j, trial_value
            idx[i] = best_j
            value = best_value
        improvement = previous - state.spec.objective(value)
        log.debug("Sweep %d: objective %s, improvement %s", iteration, value, improvement)
        if improvement < TIE_TOL:
            return tuple(idx), True
    log.warning("Coordinate descent stopped after max_iters=%d sweeps", max_iters)
    return tuple(idx), False


def optimize_shifts(family, spec, search=None):
    """
    Search the shift lattice around the median assignment for the assignment
    optimizing ``spec``.

    Up to three components the lattice is searched exhaustively; beyond that by
    cyclic coordinate descent from the median assignment and ``search.restarts``
    seeded random starts. The information potential is maximized for ``alpha > 1``,
    every other risk is minimized. For translation invariant risks the first
    component stays at its median.
    """
    spec = risks.RiskSpec.parse(spec)
    search = search or SearchConfig()
    state = _ShiftSearch(family, spec, search)
    converged = True
    if family.k <= 3:
        strategy = "exhaustive"
        if spec.kind in _LINEAR_RISKS:
            best_idx = _exhaustive_linear(state)
        else:
            best_idx = _exhaustive(state)
    else:
        strategy = "coordinate-descent"
        rng = np.random.default_rng(search.seed)
        starts = [tuple(state.center)]
        for _ in range(search.restarts):
            start = [int(rng.integers(len(offsets))) for offsets in state.offsets]
            for i in range(family.k):
                if i not in state.free_components():
                    start[i] = state.center[i]
            starts.append(tuple(start))
        best_idx, best_value = None, None
        for start in starts:
            idx, start_converged = _coordinate_descent(state, start, search.max_iters)
            converged = converged and start_converged
            value = state.value(idx)
            if state.better(idx, value, best_idx, best_value):
                best_idx, best_value = idx, value
    best_shifts = state.shifts(best_idx)
    best_value = risks.evaluate(spec, mixture_error_pdf(family, best_shifts))
    log.debug(
        "Optimized %s over %d evaluation(s): %s -> %s",
        spec,
        state.evaluations,
        best_shifts,
        best_value,
    )
    return OptimizeResult(
        best_shifts=best_shifts,
        best_value=best_value,
        evaluations=state.evaluations,
        trace=tuple(state.trace),
        strategy=strategy,
        converged=converged,
    )
