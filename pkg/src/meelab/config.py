"""
Loading and validation of experiment configurations
"""
import copy
import dataclasses
import json
import logging
import pathlib

from meelab import csvio
from meelab.densities import DEFAULT_MASS_TOL
from meelab.densities import CsumFamily
from meelab.densities import CsumShape
from meelab.densities import ShapeKind
from meelab.densities import ShiftAssignment
from meelab.densities import TabulatedShape
from meelab.estimate import PERTURBATION_MODES
from meelab.estimate import SearchConfig
from meelab.exceptions import ConfigError
from meelab.exceptions import ParameterError
from meelab.grid import Grid
from meelab.helpers import check_alpha
from meelab.helpers import number_list_map
from meelab.risks import RiskKind
from meelab.risks import RiskSpec

log = logging.getLogger(__name__)

DEFAULT_CONFIG = {
    "alphas": [0.25, 0.5, 0.75, 1.5, 2, 3],
    "risk": "ip:2",
    "risks": ["mse", "mad", "zero-one", "shannon", "renyi", "ip"],
    "shifts": None,
    "perturbations": {
        "mode": "per-component",
        "step": 0.1,
        "half_width": 2.0,
    },
    "search": {
        "step": 0.05,
        "half_width": 0.5,
        "restarts": 2,
        "max_iters": 50,
    },
    "n_list": [2, 4, 8, 16, 32, 64, 128, 256],
    "approx": {
        "threshold": 5e-3,
    },
    "output_dir": ".",
    "seed": 0,
    "jobs": 1,
}


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    family: CsumFamily
    alphas: tuple
    risk: RiskSpec
    risks: tuple
    shifts: ShiftAssignment
    perturbations: dict
    search: SearchConfig
    n_list: tuple
    approx_threshold: float
    output_dir: pathlib.Path
    seed: int
    jobs: int


def merge(dest, upd):
    """
    Recursively merge ``upd`` into a copy of ``dest``. Mappings merge, everything
    else (lists included) is replaced.
    """
    merged = copy.deepcopy(dest)
    for key, val in upd.items():
        if isinstance(val, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge(merged[key], val)
        else:
            merged[key] = copy.deepcopy(val)
    return merged


def load_config(path):
    """
    Read a JSON configuration file. Syntax errors are reported with their position.
    """
    path = pathlib.Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"Cannot read configuration {path}: {err}") from err
    try:
        config = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(
            f"Malformed JSON in {path}: {err.msg}", lineno=err.lineno, colno=err.colno
        ) from err
    if not isinstance(config, dict):
        raise ConfigError(f"Configuration {path} must be a JSON object")
    return config


def _shape_from_dict(data, base_dir):
    kind = str(data.get("kind", "")).lower()
    if kind == ShapeKind.TABULATED.value:
        if "values_file" not in data:
            raise ConfigError("Tabulated components need a values_file")
        values_file = pathlib.Path(data["values_file"])
        if not values_file.is_absolute():
            values_file = pathlib.Path(base_dir) / values_file
        return TabulatedShape(csvio.read_grid_function(values_file), data.get("location"))
    return CsumShape(kind, float(data.get("location", 0.0)), float(data.get("scale", 1.0)))


def family_from_dict(data, base_dir="."):
    """
    Build a :class:`~meelab.densities.CsumFamily` from its JSON representation.

    base_dir
        Directory relative ``values_file`` paths are resolved against.
    """
    try:
        grid = Grid.from_dict(data["grid"])
        components = [
            (float(comp["weight"]), _shape_from_dict(comp, base_dir))
            for comp in data["components"]
        ]
        return CsumFamily(
            components,
            grid,
            s_max=data.get("s_max"),
            mass_tol=data.get("mass_tol", DEFAULT_MASS_TOL),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError, ParameterError) as err:
        raise ConfigError(f"Invalid family: {err}") from err


def _risk_specs(entries, alphas):
    """
    Expand order-less ``renyi`` and ``ip`` entries over the configured alphas.
    """
    specs = []
    for entry in entries:
        name = str(entry).strip().lower()
        if name in (RiskKind.RENYI.value, RiskKind.IP.value):
            specs.extend(RiskSpec(name, alpha) for alpha in alphas)
        else:
            specs.append(RiskSpec.parse(name))
    return tuple(specs)


def parse_config(config, base_dir="."):
    """
    Returns a validated :class:`ExperimentConfig` with every missing key taken from
    :data:`DEFAULT_CONFIG`.

    base_dir
        Directory of the configuration file. Relative paths in it are resolved against it.
    """
    merged = merge(DEFAULT_CONFIG, config)
    try:
        if "family" not in merged:
            raise AssertionError("family is required")
        family = family_from_dict(merged["family"], base_dir)
        alphas = tuple(check_alpha(alpha) for alpha in number_list_map(merged["alphas"]))
        if not alphas:
            raise AssertionError("alphas must not be empty")
        perturbations = {
            key: merged["perturbations"][key] for key in ("mode", "step", "half_width")
        }
        if perturbations["mode"] not in PERTURBATION_MODES:
            raise AssertionError(
                f"perturbations:mode must be one of {PERTURBATION_MODES}, "
                f"got {perturbations['mode']!r}"
            )
        perturbations["step"] = float(perturbations["step"])
        perturbations["half_width"] = float(perturbations["half_width"])
        if not 0 < perturbations["step"] <= perturbations["half_width"]:
            raise AssertionError("perturbations need 0 < step <= half_width")
        shifts = None
        if merged["shifts"] is not None:
            shifts = ShiftAssignment(number_list_map(merged["shifts"])).validate(family)
        n_list = tuple(number_list_map(merged["n_list"], cast=int))
        seed = int(merged["seed"])
        jobs = int(merged["jobs"])
        if jobs < 1:
            raise AssertionError(f"jobs must be >= 1, got {jobs}")
        output_dir = pathlib.Path(merged["output_dir"])
        if not output_dir.is_absolute():
            output_dir = pathlib.Path(base_dir) / output_dir
        parsed = ExperimentConfig(
            family=family,
            alphas=alphas,
            risk=RiskSpec.parse(merged["risk"]),
            risks=_risk_specs(merged["risks"], alphas),
            shifts=shifts,
            perturbations=perturbations,
            search=SearchConfig.from_dict(merged["search"], seed=seed),
            n_list=n_list,
            approx_threshold=float(merged["approx"]["threshold"]),
            output_dir=output_dir,
            seed=seed,
            jobs=jobs,
        )
    except ConfigError:
        raise
    except (AssertionError, KeyError, TypeError, ValueError, ParameterError) as err:
        raise ConfigError(f"Invalid experiment configuration: {err}") from err
    if not family.is_csum:
        log.warning("Family is not CSUM, results are exploratory")
    return parsed


def load_experiment(path, out=None, seed=None, jobs=None):
    """
    Load and validate a configuration file, letting command line values override it.

    out
        Output directory, relative to the working directory.
    """
    path = pathlib.Path(path)
    config = load_config(path)
    if out is not None:
        config["output_dir"] = str(pathlib.Path(out).resolve())
    if seed is not None:
        config["seed"] = seed
    if jobs is not None:
        config["jobs"] = jobs
    log.debug("Loaded configuration %s", path)
    return parse_config(config, base_dir=path.resolve().parent)
