"""
Several utility functions shared by the numerical modules
"""
import math
import re

import numpy as np

from meelab.exceptions import ParameterError

# |alpha - 1| must exceed this, otherwise 1 / (1 - alpha) cancels catastrophically
ALPHA_GUARD = 1e-6

LATTICE_RTOL = 1e-9


def check_alpha(alpha, name="alpha"):
    """
    Validate an entropy order and return it as a float.

    Orders must be finite, positive and outside the guard band around 1,
    where Renyi entropy degenerates to Shannon entropy.
    """
    try:
        alpha = float(alpha)
    except (TypeError, ValueError) as err:
        raise ParameterError(f"{name} must be a real number, got {alpha!r}") from err
    if not math.isfinite(alpha) or alpha <= 0:
        raise ParameterError(f"{name} must be finite and > 0, got {alpha}")
    if abs(alpha - 1) <= ALPHA_GUARD:
        raise ParameterError(
            f"{name}={alpha} lies within {ALPHA_GUARD} of 1, use the shannon risk instead"
        )
    return alpha


def holder_order(alpha):
    """
    Return the integer ``n`` with ``n < alpha <= n + 1``.
    """
    return math.ceil(alpha) - 1


def number_list_map(val, cast=float):
    """
    Turn a list, a single number or a comma-separated string (like ``0.5,2,3``)
    into a list of numbers.
    """
    if val is None:
        return []
    if isinstance(val, (int, float)) and not isinstance(val, bool):
        return [cast(val)]
    if isinstance(val, str):
        val = [part for part in re.split(r"[,\s]+", val.strip()) if part]
    try:
        return [cast(item) for item in val]
    except (TypeError, ValueError) as err:
        raise ParameterError(f"Expected a list of numbers, got {val!r}") from err


def lattice_offsets(step, half_width, include_zero=True):
    """
    Return the symmetric lattice ``-half_width, ..., -step, [0,] step, ..., half_width``.

    The number of points per side is ``round(half_width / step)``, so a
    half-width that is not a multiple of the step is rounded to the nearest one.
    """
    if step <= 0 or half_width <= 0:
        raise ParameterError("Lattice step and half width must be > 0")
    if step > half_width * (1 + LATTICE_RTOL):
        raise ParameterError(f"Lattice step {step} exceeds half width {half_width}")
    per_side = int(round(half_width / step))
    idx = np.arange(-per_side, per_side + 1)
    if not include_zero:
        idx = idx[idx != 0]
    return idx * step


def snap_to_lattice(value, delta):
    """
    Round ``value`` to the nearest integer multiple of ``delta``.
    """
    return round(value / delta) * delta


def lattice_steps(value, delta):
    """
    Return ``value / delta`` as an integer if it is one (up to rounding), else None.
    """
    ratio = value / delta
    nearest = round(ratio)
    if abs(ratio - nearest) <= LATTICE_RTOL * max(1.0, abs(ratio)):
        return int(nearest)
    return None


def format_float(value):
    """
    Shortest decimal representation that reads back to the same float.
    """
    return repr(float(value))
