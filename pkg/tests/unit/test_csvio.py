import numpy as np
import pytest
from meelab import csvio
from meelab import estimate
from meelab.exceptions import ConfigError
from meelab.grid import Grid
from meelab.grid import GridFunction
from meelab.rearrange import decreasing_rearrangement

from tests.support.helpers import read_csv


@pytest.fixture
def bump():
    return GridFunction(Grid(-1.0, 1.0, 9), [0.0, 0.1, 0.2, 0.7, 1.0, 0.7, 0.2, 0.1, 0.0])


@pytest.mark.parametrize(
    "value,expected",
    [
        (None, ""),
        (True, "true"),
        (False, "false"),
        (np.bool_(True), "true"),
        (np.float64(1.0) > 0, "true"),
        (np.bool_(False), "false"),
        (0.1, "0.1"),
        (np.float64(0.25), "0.25"),
        (3, "3"),
        ("joint", "joint"),
    ],
)
def test_cell(value, expected):
    assert csvio._cell(value) == expected  # pylint: disable=protected-access


def test_grid_function_round_trip(tmp_path, bump):
    path = csvio.write_grid_function(tmp_path / "sub" / "bump.csv", bump)
    assert path.read_text(encoding="utf-8").splitlines()[:2] == ["x,value", "-1.0,0.0"]
    assert csvio.read_grid_function(path) == bump


def test_write_rearranged(tmp_path, bump):
    path = csvio.write_rearranged(tmp_path / "m.csv", decreasing_rearrangement(bump))
    header, rows = read_csv(path)
    assert header == ["x", "m"]
    assert rows[:3] == [["0.0", "1.0"], ["0.25", "0.7"], ["0.5", "0.7"]]


@pytest.mark.parametrize(
    "text,match",
    [
        ("a,b\n0,1\n1,1\n", "expected header"),
        ("", "expected header"),
        ("x,value\n0,1\n", "at least 2"),
        ("x,value\n0,1\n1,one\n", "could not convert"),
        ("x,value\n0,1\n1\n", "numeric columns"),
        ("x,value\n0,1\n1,-1\n", ">= 0"),
        ("x,value\n0,1\n1,1\n3,1\n", "uniformly spaced"),
    ],
)
def test_read_grid_function_rejects(tmp_path, text, match):
    path = tmp_path / "bad.csv"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigError, match=match):
        csvio.read_grid_function(path)


def test_read_grid_function_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="Cannot read"):
        csvio.read_grid_function(tmp_path / "missing.csv")


def test_write_theorem(tmp_path, gaussian_pair):
    perturbations = estimate.perturbation_grid(
        gaussian_pair, step=1.0, half_width=1.0, mode=estimate.JOINT
    )
    reports = estimate.verify_theorem(gaussian_pair, [2.0], perturbations)
    path = csvio.write_theorem(tmp_path / "theorem.csv", reports)
    header, rows = read_csv(path)
    assert tuple(header) == csvio.THEOREM_HEADER
    assert len(rows) == 8
    assert rows[0][:3] == ["2.0", "joint", "-0.5;-1.0"]
    assert rows[0][6:] == ["HoldsUpper", "true", "true"]


def test_writers_are_deterministic(tmp_path, gaussian_pair):
    perturbations = estimate.perturbation_grid(gaussian_pair, step=0.5, half_width=1.0)
    reports = estimate.verify_theorem(gaussian_pair, [0.5, 2.0], perturbations)
    first = csvio.write_theorem(tmp_path / "first.csv", reports)
    second = csvio.write_theorem(tmp_path / "second.csv", reports)
    assert first.read_bytes() == second.read_bytes()
