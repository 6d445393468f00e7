import logging

import pytest
from meelab import corpus
from meelab.cli import build_parser
from meelab.cli import main
from meelab.grid import GridFunction

from tests.support.helpers import read_csv
from tests.support.helpers import write_config
from tests.support.helpers import write_samples

pytestmark = [
    pytest.mark.timeout(300),
]


@pytest.fixture(autouse=True)
def _restore_logging():
    # main() configures the root logger
    level = logging.root.level
    yield
    logging.root.setLevel(level)


@pytest.fixture
def pair_config(tmp_path, gaussian_pair):
    return write_config(
        tmp_path / "pair.json",
        gaussian_pair,
        alphas=[0.5, 2],
        perturbations={"step": 0.5, "half_width": 2.0},
    )


def test_version(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["--version"])
    assert excinfo.value.code == 0
    assert capsys.readouterr().out.startswith("meelab ")


def test_command_is_required(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main([])
    assert excinfo.value.code == 1
    assert "a command or --self-test is required" in capsys.readouterr().err


def test_jobs_must_be_positive(pair_config):
    with pytest.raises(SystemExit) as excinfo:
        main(["verify-theorem", "--config", str(pair_config), "--jobs", "0"])
    assert excinfo.value.code == 1


def test_risk(pair_config, tmp_path):
    out = tmp_path / "out"
    assert main(["risk", "--config", str(pair_config), "--out", str(out)]) == 0
    header, rows = read_csv(out / "risks.csv")
    assert header == ["risk", "alpha", "shifts", "value"]
    assert [row[:2] for row in rows] == [
        ["mse", ""],
        ["mad", ""],
        ["zero-one", ""],
        ["shannon", ""],
        ["renyi", "0.5"],
        ["renyi", "2.0"],
        ["ip", "0.5"],
        ["ip", "2.0"],
    ]
    assert {row[2] for row in rows} == {"-1.0;1.5"}


def test_malformed_json(tmp_path, caplog):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "family": {\n    "grid": ,\n', encoding="utf-8")
    assert main(["risk", "--config", str(path), "--out", str(tmp_path)]) == 1
    assert "line 3, column 13" in caplog.text


def test_order_one_is_rejected(tmp_path, gaussian_pair):
    path = write_config(tmp_path / "config.json", gaussian_pair, alphas=[0.5, 1.0])
    assert main(["verify-theorem", "--config", str(path), "--out", str(tmp_path)]) == 1
    assert not (tmp_path / "theorem.csv").exists()


def test_verify_theorem_two_uniforms(tmp_path, two_uniforms):
    path = write_config(
        tmp_path / "config.json", two_uniforms, perturbations={"step": 0.2, "half_width": 2.0}
    )
    assert main(["verify-theorem", "--config", str(path), "--out", str(tmp_path / "out")]) == 0
    header, rows = read_csv(tmp_path / "out" / "theorem.csv")
    assert header[6] == "verdict"
    # 6 default alphas, 20 offsets per component
    assert len(rows) == 6 * 40
    for row in rows:
        expected = "HoldsLower" if float(row[0]) < 1 else "HoldsUpper"
        assert row[6] == expected
        assert row[7:] == ["true", "true"]


def test_verify_theorem_jobs_are_deterministic(tmp_path, pair_config):
    for jobs in ("1", "2"):
        args = ["--jobs", jobs, "verify-theorem", "--config", str(pair_config)]
        assert main(args + ["--out", str(tmp_path / jobs)]) == 0
    sequential = (tmp_path / "1" / "theorem.csv").read_bytes()
    assert sequential == (tmp_path / "2" / "theorem.csv").read_bytes()


def test_verify_theorem_exploratory(tmp_path):
    family = corpus.bimodal_tabulated()
    write_samples(tmp_path / "bimodal.csv", family.grid, family.shape(0).function.values)
    data = family.to_dict()
    data["components"][0] = {"weight": 0.5, "kind": "tabulated", "values_file": "bimodal.csv"}
    path = write_config(
        tmp_path / "config.json",
        data,
        alphas=[0.5, 2],
        perturbations={"step": 0.5, "half_width": 1.0},
    )
    assert main(["verify-theorem", "--config", str(path), "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "theorem.csv")
    assert rows
    assert {row[7] for row in rows} == {"false"}


def test_optimize(tmp_path, pair_config):
    assert main(["optimize", "--config", str(pair_config), "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "optimize.csv")
    assert header[0] == "risk"
    assert rows[0][:2] == ["ip:2.0", "exhaustive"]
    assert rows[0][4] == "-1.0;1.5"
    _, trace = read_csv(tmp_path / "optimize_trace.csv")
    assert len(trace) == int(rows[0][2])


def test_rearrange_fixed_point(tmp_path):
    grid = corpus.HALF_STEP_GRID
    family = corpus.two_unit_uniforms()
    values = family.shape(0).pdf(grid.x)
    write_samples(tmp_path / "density.csv", grid, values)
    out = tmp_path / "first"
    assert main(["rearrange", str(tmp_path / "density.csv"), "--out", str(out)]) == 0
    _, first = read_csv(out / "rearranged.csv")
    assert [float(row[1]) for row in first[:1024]] == [1.0] * 1024
    assert {float(row[1]) for row in first[1024:]} == {0.0}
    # rearranging the rearranged samples changes nothing
    m = [float(row[1]) for row in first]
    write_samples(tmp_path / "again.csv", grid, m)
    assert main(["rearrange", str(tmp_path / "again.csv"), "--out", str(tmp_path / "again")]) == 0
    _, again = read_csv(tmp_path / "again" / "rearranged.csv")
    assert [row[1] for row in again] == [row[1] for row in first]


def test_rearrange_rejects_non_finite(tmp_path):
    path = tmp_path / "density.csv"
    path.write_text("x,value\n0,1\n1,inf\n2,0\n", encoding="utf-8")
    assert main(["rearrange", str(path), "--out", str(tmp_path)]) == 2


def test_rearrange_missing_input(tmp_path):
    assert main(["rearrange", str(tmp_path / "missing.csv"), "--out", str(tmp_path)]) == 1


def test_approx_unit_uniform(tmp_path, unit_uniform):
    path = write_config(tmp_path / "config.json", unit_uniform, alphas=[2], n_list=[2])
    assert main(["approx", "--config", str(path), "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "convergence_2.0.csv")
    assert header == ["n", "l1_gap", "v_alpha_fn", "v_alpha_p", "domination_violation", "pass"]
    assert len(rows) == 1
    assert rows[0][0] == "2"
    assert float(rows[0][1]) == pytest.approx(0.25, abs=1e-9)
    assert rows[0][5] == "true"


def test_approx_default_n_list(tmp_path, gaussian_pair):
    path = write_config(tmp_path / "config.json", gaussian_pair, alphas=[0.5, 3])
    assert main(["approx", "--config", str(path), "--out", str(tmp_path)]) == 0
    for alpha in ("0.5", "3.0"):
        _, rows = read_csv(tmp_path / f"convergence_{alpha}.csv")
        assert [int(row[0]) for row in rows] == [2, 4, 8, 16, 32, 64, 128, 256]
        assert float(rows[-1][1]) < 5e-3
        assert {row[5] for row in rows} == {"true"}


def test_rearrange_output_matches_grid_function(tmp_path):
    grid = corpus.HALF_STEP_GRID
    write_samples(tmp_path / "zeros.csv", grid, GridFunction.zeros(grid).values)
    assert main(["rearrange", str(tmp_path / "zeros.csv"), "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "rearranged.csv")
    assert len(rows) == grid.n
    assert rows[1][0] == repr(grid.delta)


def test_self_test_subcommand_arguments():
    args = build_parser().parse_args(["--seed", "4", "self-test", "--out", "results"])
    assert args.command == "self-test"
    assert (args.seed, str(args.out), args.jobs) == (4, "results", None)


@pytest.mark.parametrize(
    "argv",
    [
        ["self-test", "--log-level", "error"],
        ["--log-level", "error", "self-test"],
        ["rearrange", "samples.csv", "--log-level", "error"],
        ["risk", "--config", "c.json", "--log-level", "error"],
    ],
)
def test_log_level_on_either_side_of_the_command(argv):
    assert build_parser().parse_args(argv).log_level == "error"


def test_log_level_default():
    assert build_parser().parse_args(["self-test"]).log_level == "warning"


@pytest.mark.timeout(1800)
def test_self_test(tmp_path):
    assert main(["--self-test", "--out", str(tmp_path), "--jobs", "2"]) == 0
    header, rows = read_csv(tmp_path / "self_test.csv")
    assert header == ["check", "subject", "cells", "failures", "passed"]
    checks = {row[0] for row in rows}
    assert checks == {
        "theorem-sweep",
        "analytic-gap",
        "gaussian-oracles",
        "shannon-limit",
        "rearrangement",
        "inequalities",
        "smoothing-l1",
        "smoothing",
        "optimizers",
        "coordinate-descent",
    }
    assert all(row[3] == "0" and row[4] == "true" for row in rows)
    for name in corpus.corpus_families():
        assert (tmp_path / f"theorem_{name}.csv").exists()
