"""
The invariant suite run by ``meelab self-test``: theorem sweeps over the built-in
corpus, closed-form oracles, rearrangement and inequality checks, the smoothing
sequence and the optimizer cross-checks.

Every check yields a :class:`CheckResult`; nothing here depends on a config file.
"""
import collections
import logging
import math

import numpy as np

from meelab import approx
from meelab import corpus
from meelab import csvio
from meelab import estimate
from meelab import rearrange
from meelab import risks
from meelab.densities import CsumFamily
from meelab.densities import CsumShape
from meelab.densities import mixture_error_pdf

log = logging.getLogger(__name__)

SWEEP_ALPHAS = (0.25, 0.5, 0.75, 1.5, 2.0, 3.0)
INEQUALITY_ALPHAS = SWEEP_ALPHAS + (3.7,)
EQUIMEASURE_ALPHAS = (0.5, 1.0, 2.0, 3.0)
ORACLE_SIGMAS = (0.5, 1.0, 2.0)
ORACLE_ALPHAS = (0.5, 2.0, 3.0)
TABLE_RISKS = ("mse", "mad", "zero-one", "shannon", "renyi:2", "renyi:0.5")
INEQUALITY_X0_COUNT = 20

CheckResult = collections.namedtuple(
    "CheckResult", ("check", "subject", "cells", "failures")
)


def _row(check, subject, cells, failures):
    if failures:
        log.warning("Self test %s on %s: %d of %d cell(s) failed", check, subject, failures, cells)
    return CheckResult(check, subject, cells, failures)


def check_theorem_sweep(families, output_dir, jobs=1):
    """
    Sweep every family over one-component perturbations of up to two scale units.
    """
    results = []
    for name, family in families.items():
        perturbations = estimate.perturbation_grid(family, step=0.1, half_width=2.0)
        reports = estimate.verify_theorem(family, SWEEP_ALPHAS, perturbations, jobs=jobs)
        csvio.write_theorem(output_dir / f"theorem_{name}.csv", reports)
        failures = sum(1 for rep in reports if not (rep.holds and rep.renyi_consistent))
        results.append(_row("theorem-sweep", name, len(reports), failures))
    return results


def check_analytic_gap():
    """
    Two unit uniforms, the second displaced by 0.5: the gaps follow from the overlap areas.
    """
    family = corpus.two_unit_uniforms()
    candidate = estimate.median_assignment(family).offset(1, 0.5)
    expected = {2.0: 1.0 - 0.75, 0.5: 1.0 - (0.5 + 2 * 0.5 * math.sqrt(0.5))}
    failures = 0
    for alpha, gap in expected.items():
        report = estimate.theorem_gap(family, alpha, candidate)
        if abs(report.gap - gap) > 1e-9 or not report.holds:
            failures += 1
    return [_row("analytic-gap", "two-unit-uniforms", len(expected), failures)]


def check_gaussian_oracles():
    failures = 0
    cells = 0
    for sigma in ORACLE_SIGMAS:
        family = corpus.gaussian(sigma)
        p = mixture_error_pdf(family, estimate.median_assignment(family))
        for alpha in ORACLE_ALPHAS:
            cells += 1
            expected = corpus.gaussian_potential(sigma, alpha)
            if abs(risks.information_potential(p, alpha) / expected - 1) > 1e-6:
                failures += 1
    family = corpus.gaussian(1.0)
    p = mixture_error_pdf(family, estimate.median_assignment(family))
    cells += 1
    if abs(risks.shannon_ee(p) - 0.5 * math.log(2 * math.pi * math.e)) > 1e-5:
        failures += 1
    return [_row("gaussian-oracles", "gaussian", cells, failures)]


def check_shannon_limit(families):
    results = []
    for name, family in families.items():
        p = mixture_error_pdf(family, estimate.median_assignment(family))
        shannon = risks.shannon_ee(p)
        failures = sum(
            1 for alpha in (1 - 1e-3, 1 + 1e-3) if abs(risks.renyi_ee(p, alpha) - shannon) >= 1e-2
        )
        results.append(_row("shannon-limit", name, 2, failures))
    return results


def check_rearrangement(families):
    results = []
    for name, family in families.items():
        failures = 0
        cells = 0
        median = estimate.median_assignment(family)
        candidates = [median] + [
            pert.candidate
            for pert in estimate.perturbation_grid(family, step=1.0, half_width=2.0)
        ]
        for candidate in candidates:
            p = mixture_error_pdf(family, candidate)
            m = rearrange.decreasing_rearrangement(p)
            again = rearrange.decreasing_rearrangement(m.as_function())
            cells += 1
            if not np.array_equal(again.values, m.values):
                failures += 1
            for alpha in EQUIMEASURE_ALPHAS:
                cells += 1
                lhs, rhs = rearrange.equimeasure_check(p, alpha)
                if lhs != rhs:
                    failures += 1
        results.append(_row("rearrangement", name, cells, failures))
    return results


def check_inequalities(families):
    """
    Head dominance, the Hölder chain and bounds and the rearranged potential ordering
    for every candidate, order and ``x0``.
    """
    results = []
    for name, family in families.items():
        x0s = np.linspace(0.0, 0.25 * family.grid.length, INEQUALITY_X0_COUNT)
        m0 = rearrange.decreasing_rearrangement(
            mixture_error_pdf(family, estimate.median_assignment(family))
        )
        failures = 0
        cells = 0
        for pert in estimate.perturbation_grid(family, step=0.1, half_width=2.0):
            mg = rearrange.decreasing_rearrangement(mixture_error_pdf(family, pert.candidate))
            cells += 1
            if not rearrange.majorization_check(m0, mg).passed:
                failures += 1
            for alpha in INEQUALITY_ALPHAS:
                for chain, bound in rearrange.holder_sweep(m0, mg, alpha, x0s):
                    cells += 2
                    failures += (not chain.passed) + (not bound.passed)
                cells += 1
                if not rearrange.proposition_check(m0, mg, alpha).passed:
                    failures += 1
        results.append(_row("inequalities", name, cells, failures))
    return results


def check_smoothing(families):
    results = []
    family = corpus.unit_uniform()
    median = estimate.median_assignment(family)
    report = approx.convergence_report(family, median, (2, 4, 8), alpha=2.0)
    failures = sum(1 for row in report.rows if abs(row.l1_gap - 1 / (2 * row.n)) > 1e-9)
    results.append(_row("smoothing-l1", "unit-uniform", len(report.rows), failures))
    for name, family in families.items():
        median = estimate.median_assignment(family)
        failures = 0
        cells = 0
        for alpha in SWEEP_ALPHAS:
            report = approx.convergence_report(family, median, approx.DEFAULT_N_LIST, alpha)
            cells += len(report.rows) + 1
            failures += sum(
                1
                for row in report.rows
                if not row.passed or row.domination_violation > approx.DOMINATION_TOL
            )
            failures += not report.monotone
        results.append(_row("smoothing", name, cells, failures))
    return results


def _near_median(family, result, search):
    median = estimate.median_assignment(family)
    for i, (best, center) in enumerate(zip(result.best_shifts, median)):
        step = search.step * family.shape(i).scale
        if abs(best - center) > step + family.grid.delta:
            return False
    return True


def check_optimizers(families, seed=0):
    results = []
    search = estimate.SearchConfig(seed=seed)
    for name, family in families.items():
        failures = 0
        for spec in TABLE_RISKS:
            result = estimate.optimize_shifts(family, spec, search)
            failures += not _near_median(family, result, search)
        results.append(_row("optimizers", name, len(TABLE_RISKS), failures))
    family = CsumFamily(
        [
            (0.25, CsumShape("gaussian", location, scale))
            for location, scale in ((-1.5, 0.5), (-0.5, 0.6), (0.5, 0.7), (1.5, 0.8))
        ],
        corpus.CORPUS_GRID,
        s_max=corpus.CORPUS_S_MAX,
    )
    result = estimate.optimize_shifts(family, "ip:2", search)
    failures = not (_near_median(family, result, search) and result.converged)
    results.append(_row("coordinate-descent", "gaussian-quadruple", 1, int(failures)))
    return results


def run(output_dir, seed=0, jobs=1):
    """
    Run every check, write ``self_test.csv`` and the per-family theorem sweeps into
    ``output_dir`` and return the results.
    """
    families = corpus.corpus_families()
    results = []
    results += check_theorem_sweep(families, output_dir, jobs=jobs)
    results += check_analytic_gap()
    results += check_gaussian_oracles()
    results += check_shannon_limit(families)
    results += check_rearrangement(families)
    results += check_inequalities(families)
    results += check_smoothing(families)
    results += check_optimizers(families, seed=seed)
    csvio.write_rows(
        output_dir / "self_test.csv",
        csvio.SELF_TEST_HEADER,
        (
            (res.check, res.subject, res.cells, res.failures, res.failures == 0)
            for res in results
        ),
    )
    return results
