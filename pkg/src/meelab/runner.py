"""
Experiment commands behind the ``meelab`` command line.

Each command takes a validated :class:`~meelab.config.ExperimentConfig` (or the
paths it needs), writes its CSV artifacts and returns 0. Failures are raised as
:mod:`meelab.exceptions`, whose ``exit_code`` the command line returns.
"""
import logging
import pathlib

from meelab import approx
from meelab import csvio
from meelab import estimate
from meelab import rearrange
from meelab import risks
from meelab import selftest
from meelab.densities import mixture_error_pdf
from meelab.exceptions import TheoremViolation

log = logging.getLogger(__name__)


def _shifts(config):
    return config.shifts or estimate.median_assignment(config.family)


def cmd_risk(config):
    """
    Evaluate every configured risk on the error density of the configured shifts
    (the median assignment by default) and write ``risks.csv``.
    """
    shifts = _shifts(config)
    p = mixture_error_pdf(config.family, shifts)
    rows = [(spec, shifts, risks.evaluate(spec, p)) for spec in config.risks]
    path = csvio.write_risks(config.output_dir / "risks.csv", rows)
    log.info("Wrote %d risk value(s) to %s", len(rows), path)
    return 0


def cmd_verify_theorem(config):
    """
    Sweep the configured alphas and perturbations and write ``theorem.csv``.

    Violations on a CSUM family raise :class:`~meelab.exceptions.TheoremViolation`
    after the file is written. Families outside the CSUM class are swept in
    exploratory mode: their rows carry ``csum=false`` and violations are only logged.
    """
    family = config.family
    perturbations = estimate.perturbation_grid(family, **config.perturbations)
    reports = estimate.verify_theorem(family, config.alphas, perturbations, jobs=config.jobs)
    path = csvio.write_theorem(config.output_dir / "theorem.csv", reports)
    log.info("Wrote %d sweep cell(s) to %s", len(reports), path)
    failed = [report for report in reports if not (report.holds and report.renyi_consistent)]
    if failed and family.is_csum:
        raise TheoremViolation(failed)
    return 0


def cmd_optimize(config):
    """
    Optimize the configured risk over the shift lattice and write ``optimize.csv``
    together with the evaluation trace ``optimize_trace.csv``.
    """
    result = estimate.optimize_shifts(config.family, config.risk, config.search)
    csvio.write_optimize(config.output_dir / "optimize.csv", config.risk, result)
    csvio.write_trace(config.output_dir / "optimize_trace.csv", result)
    log.info("Best shifts for %s: %s (%s)", config.risk, result.best_shifts, result.best_value)
    return 0


def cmd_rearrange(input_path, output_dir):
    """
    Write the decreasing rearrangement of an ``x,value`` file to ``rearranged.csv``.
    """
    function = csvio.read_grid_function(input_path)
    rearranged = rearrange.decreasing_rearrangement(function)
    path = csvio.write_rearranged(pathlib.Path(output_dir) / "rearranged.csv", rearranged)
    log.info("Wrote rearrangement of %s to %s", input_path, path)
    return 0


def cmd_approx(config):
    """
    Follow the smoothing sequence along ``n_list`` for every configured alpha and write
    one ``convergence_<alpha>.csv`` per alpha.

    On a CSUM family at the median assignment, a smoothed potential exceeding the
    potential of the error density raises :class:`~meelab.exceptions.TheoremViolation`.
    """
    family = config.family
    shifts = _shifts(config)
    at_median = shifts == estimate.median_assignment(family)
    failed = []
    for alpha in config.alphas:
        report = approx.convergence_report(
            family, shifts, config.n_list, alpha, threshold=config.approx_threshold
        )
        csvio.write_convergence(config.output_dir / f"convergence_{alpha!r}.csv", report)
        if not report.converged:
            log.warning(
                "alpha=%s: L1 gap %s at n=%s is not below %s",
                alpha,
                report.rows[-1].l1_gap if report.rows else None,
                report.rows[-1].n if report.rows else None,
                report.threshold,
            )
        failed.extend(row for row in report.rows if not row.passed)
    if failed and at_median and family.is_csum:
        raise TheoremViolation(
            failed, msg=f"{len(failed)} smoothed potential(s) exceed the error potential"
        )
    return 0


def cmd_self_test(output_dir, seed=0, jobs=1):
    """
    Run the built-in invariant suite and write ``self_test.csv``.
    """
    output_dir = pathlib.Path(output_dir)
    results = selftest.run(output_dir, seed=seed, jobs=jobs)
    failed = [result for result in results if result.failures]
    if failed:
        raise TheoremViolation(failed, msg=f"{len(failed)} self test check(s) failed")
    log.info("All %d self test check(s) passed", len(results))
    return 0
