"""
CSV artifacts written and read by the command line runner.

Floats are written with their shortest round-tripping representation, so reading
a file back reproduces the values bit for bit and identical runs produce
identical bytes.
"""
import csv
import logging
import pathlib

import numpy as np

from meelab.exceptions import ConfigError
from meelab.exceptions import ParameterError
from meelab.grid import Grid
from meelab.grid import GridFunction
from meelab.helpers import format_float

log = logging.getLogger(__name__)

GRID_FUNCTION_HEADER = ("x", "value")
REARRANGED_HEADER = ("x", "m")
THEOREM_HEADER = (
    "alpha",
    "component",
    "perturbation",
    "v_median",
    "v_candidate",
    "gap",
    "verdict",
    "csum",
    "renyi_consistent",
)
CONVERGENCE_HEADER = ("n", "l1_gap", "v_alpha_fn", "v_alpha_p", "domination_violation", "pass")
RISKS_HEADER = ("risk", "alpha", "shifts", "value")
OPTIMIZE_HEADER = ("risk", "strategy", "evaluations", "converged", "best_shifts", "best_value")
TRACE_HEADER = ("evaluation", "shifts", "value")
SELF_TEST_HEADER = ("check", "subject", "cells", "failures", "passed")


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return str(value)


def write_rows(path, header, rows):
    """
    Write ``rows`` under ``header``, formatting every cell with :func:`_cell`.
    """
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh_:
        writer = csv.writer(fh_, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(value) for value in row])
    log.debug("Wrote %s", path)
    return path


def _read_columns(path, header):
    path = pathlib.Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh_:
            reader = csv.reader(fh_)
            found = next(reader, None)
            if found is None or tuple(col.strip() for col in found) != header:
                raise ConfigError(f"{path}: expected header {','.join(header)}, got {found}")
            rows = [row for row in reader if row]
            if any(len(row) != len(header) for row in rows):
                raise ConfigError(f"{path}: expected {len(header)} numeric columns")
    except OSError as err:
        raise ConfigError(f"Cannot read {path}: {err}") from err
    try:
        data = np.array([[float(cell) for cell in row] for row in rows], dtype=float)
    except ValueError as err:
        raise ConfigError(f"{path}: {err}") from err
    if data.ndim != 2 or data.shape[1] != len(header):
        raise ConfigError(f"{path}: expected {len(header)} numeric columns")
    return data


def read_grid_function(path):
    """
    Read an ``x,value`` file sampled on a uniform grid.
    """
    data = _read_columns(path, GRID_FUNCTION_HEADER)
    if data.shape[0] < 2:
        raise ConfigError(f"{path}: a grid function needs at least 2 samples")
    x, values = data[:, 0], data[:, 1]
    try:
        grid = Grid(x[0], x[-1], x.size)
        function = GridFunction(grid, values)
    except ParameterError as err:
        raise ConfigError(f"{path}: {err}") from err
    if not np.allclose(x, grid.x, rtol=0.0, atol=1e-9 * max(1.0, abs(grid.x_max))):
        raise ConfigError(f"{path}: abscissae are not uniformly spaced")
    return function


def write_grid_function(path, f):
    return write_rows(path, GRID_FUNCTION_HEADER, zip(f.grid.x.tolist(), f.values.tolist()))


def write_rearranged(path, m):
    return write_rows(path, REARRANGED_HEADER, zip(m.x.tolist(), m.values.tolist()))


def write_theorem(path, reports):
    rows = (
        (
            report.alpha,
            "joint" if report.component is None else report.component,
            report.perturbation,
            report.v_median,
            report.v_candidate,
            report.gap,
            report.verdict.value,
            report.csum,
            report.renyi_consistent,
        )
        for report in reports
    )
    return write_rows(path, THEOREM_HEADER, rows)


def write_convergence(path, report):
    rows = (
        (row.n, row.l1_gap, row.v_alpha_fn, row.v_alpha_p, row.domination_violation, row.passed)
        for row in report.rows
    )
    return write_rows(path, CONVERGENCE_HEADER, rows)


def write_risks(path, rows):
    """
    rows
        ``(spec, shifts, value)`` triples.
    """
    return write_rows(
        path,
        RISKS_HEADER,
        ((spec.kind.value, spec.alpha, str(shifts), value) for spec, shifts, value in rows),
    )


def write_optimize(path, spec, result):
    row = (
        str(spec),
        result.strategy,
        result.evaluations,
        result.converged,
        str(result.best_shifts),
        result.best_value,
    )
    return write_rows(path, OPTIMIZE_HEADER, [row])


def write_trace(path, result):
    rows = ((idx, str(shifts), value) for idx, (shifts, value) in enumerate(result.trace))
    return write_rows(path, TRACE_HEADER, rows)
