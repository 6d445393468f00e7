"""
    tests.support.helpers
    ~~~~~~~~~~~~~~~~~~~~~

    Test support helpers
"""
import json
import logging

from meelab import csvio
from meelab.grid import GridFunction

log = logging.getLogger(__name__)


def write_config(path, family, **overrides):
    """
    Write an experiment configuration for ``family`` (a family or its dict form).
    """
    if not isinstance(family, dict):
        family = family.to_dict()
    config = {"family": family}
    config.update(overrides)
    path.write_text(json.dumps(config, indent=2), encoding="utf-8")
    return path


def write_samples(path, grid, values):
    """
    Write samples on ``grid`` as an ``x,value`` file.
    """
    return csvio.write_grid_function(path, GridFunction(grid, values))


def read_csv(path):
    """
    Return the header and the rows of a CSV artifact as lists of strings.
    """
    lines = path.read_text(encoding="utf-8").splitlines()
    rows = [line.split(",") for line in lines]
    return rows[0], rows[1:]
