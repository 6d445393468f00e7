import math

import numpy as np
import pytest
from meelab import corpus
from meelab import densities as dens
from meelab import risks
from meelab.estimate import median_assignment
from meelab.estimate import perturbation_grid
from meelab.exceptions import ParameterError
from meelab.grid import Grid
from meelab.grid import integrate
from meelab.grid import shift_resample
from scipy import integrate as sp_integrate


@pytest.mark.parametrize(
    "kind,scale,peak",
    [
        ("gaussian", 0.5, 1 / (0.5 * math.sqrt(2 * math.pi))),
        ("laplace", 0.25, 2.0),
        ("uniform", 2.0, 0.5),
        ("triangular", 0.5, 2.0),
    ],
)
def test_shape_peak(kind, scale, peak):
    shape = dens.CsumShape(kind, 0.3, scale)
    assert shape.peak == pytest.approx(peak)
    assert float(shape.pdf(0.3)) == pytest.approx(peak)


def test_shape_kind_is_case_insensitive():
    assert dens.CsumShape("Gaussian").kind is dens.ShapeKind.GAUSSIAN


@pytest.mark.parametrize(
    "kind,location,scale",
    [
        ("cauchy", 0.0, 1.0),
        ("tabulated", 0.0, 1.0),
        ("gaussian", math.nan, 1.0),
        ("gaussian", 0.0, 0.0),
        ("laplace", 0.0, -1.0),
    ],
)
def test_shape_rejects(kind, location, scale):
    with pytest.raises(ParameterError):
        dens.CsumShape(kind, location, scale)


@pytest.mark.parametrize("kind", ["gaussian", "laplace", "triangular"])
def test_level_radius(kind):
    shape = dens.CsumShape(kind, 1.0, 0.5)
    level = 0.4 * shape.peak
    radius = shape.level_radius(level)
    assert float(shape.pdf(1.0 + radius)) == pytest.approx(level)


@pytest.mark.parametrize(
    "kind,scale,cap,t",
    [
        ("laplace", 0.5, 0.8, 0.0),
        ("laplace", 0.5, 0.8, 0.3),
        ("gaussian", 0.2, 1.5, 0.05),
        ("triangular", 0.5, 1.0, 0.1),
        ("gaussian", 1.0, 2.0, 0.4),
    ],
)
def test_window_integral(kind, scale, cap, t):
    """
    The closed form matches quadrature of the capped density
    """
    shape = dens.CsumShape(kind, 0.3, scale)
    width = 0.5
    lower, upper = 0.3 + t, 0.3 + t + width
    points = None
    if shape.peak > cap and lower < 0.3 + shape.level_radius(cap) < upper:
        points = [0.3 + shape.level_radius(cap)]
    expected, _ = sp_integrate.quad(
        lambda z: min(cap, float(shape.pdf(z))), lower, upper, points=points, epsabs=1e-13
    )
    assert float(shape.window_integral(t, width, cap)) == pytest.approx(expected, rel=1e-8)


def test_shape_stats_coincide():
    shape = dens.CsumShape("laplace", -0.7, 0.2)
    assert shape.stats() == dens.ConditionalStats(-0.7, -0.7, -0.7)


def test_check_csum():
    grid = Grid(-4.0, 4.0, 801)
    gaussian = dens.CsumShape("gaussian", 0.5, 0.5)
    assert dens.check_csum(gaussian.pdf, 0.5, grid)
    # symmetric about the wrong point
    assert not dens.check_csum(gaussian.pdf, 0.0, grid)


def test_tabulated_shape():
    shape = corpus.tabulated_from_shape(dens.CsumShape("gaussian", 0.0, 0.5))
    assert shape.is_csum
    assert shape.location == 0.0
    assert integrate(shape.function) == pytest.approx(1.0, abs=1e-12)
    assert shape.median == pytest.approx(0.0, abs=1e-2)
    assert shape.scale == pytest.approx(0.5, rel=1e-3)
    assert float(shape.pdf(0.0)) == pytest.approx(1 / (0.5 * math.sqrt(2 * math.pi)), rel=1e-6)


def test_tabulated_shape_renormalizes(caplog):
    grid = Grid(-8.0, 8.0, 2049)
    function = dens.GridFunction(grid, 2 * dens.CsumShape("gaussian").pdf(grid.x))
    shape = dens.TabulatedShape(function)
    assert integrate(shape.function) == pytest.approx(1.0, abs=1e-12)
    assert "Renormalizing" in caplog.text


def test_tabulated_shape_without_mass():
    grid = Grid(-1.0, 1.0, 11)
    with pytest.raises(ParameterError, match="no mass"):
        dens.TabulatedShape(dens.GridFunction.zeros(grid))


def test_bimodal_family_is_not_csum():
    family = corpus.bimodal_tabulated()
    assert not family.shape(0).is_csum
    assert family.shape(1).is_csum
    assert not family.is_csum


def test_family_properties(gaussian_pair):
    assert gaussian_pair.k == 2
    assert gaussian_pair.weights.tolist() == [0.4, 0.6]
    assert gaussian_pair.is_csum
    assert gaussian_pair.shape(1).location == 1.5
    assert gaussian_pair.clipped_mass(1) < gaussian_pair.mass_tol
    data = gaussian_pair.to_dict()
    assert data["grid"] == gaussian_pair.grid.to_dict()
    assert data["components"][0] == {
        "weight": 0.4,
        "kind": "gaussian",
        "location": -1.0,
        "scale": 0.5,
    }


@pytest.mark.parametrize("idx", [-1, 2, 1.0])
def test_family_rejects_component_index(gaussian_pair, idx):
    with pytest.raises(ParameterError, match="out of range"):
        gaussian_pair.shape(idx)


@pytest.mark.parametrize(
    "components,match",
    [
        ([], "at least one"),
        ([(0.5, dens.CsumShape("gaussian")), (0.6, dens.CsumShape("gaussian"))], "sum to 1"),
        ([(1.0, dens.CsumShape("gaussian")), (0.0, dens.CsumShape("gaussian"))], "> 0"),
        ([(1.0, dens.CsumShape("gaussian", 3.0, 0.1))], "exceeds s_max"),
        ([(1.0, dens.CsumShape("gaussian", 0.0, 3.0))], "loses mass"),
    ],
)
def test_family_rejects(components, match):
    with pytest.raises(ParameterError, match=match):
        dens.CsumFamily(components, Grid(-12.0, 12.0, 2049), s_max=2.0)


def test_family_rejects_s_max():
    with pytest.raises(ParameterError, match="s_max"):
        dens.CsumFamily([(1.0, dens.CsumShape("gaussian"))], Grid(-12.0, 12.0, 2049), s_max=12.0)


def test_shift_assignment(gaussian_pair):
    shifts = dens.ShiftAssignment([0.5, -1])
    assert shifts.shifts == (0.5, -1.0)
    assert str(shifts) == "0.5;-1.0"
    assert shifts.offset(1, 0.25) == dens.ShiftAssignment([0.5, -0.75])
    assert shifts.translated(1.0).as_array().tolist() == [1.5, 0.0]
    assert shifts.validate(gaussian_pair) is shifts


@pytest.mark.parametrize("shifts,match", [([0.0], "Expected 2"), ([0.0, 5.5], "exceeds s_max")])
def test_shift_assignment_validate(gaussian_pair, shifts, match):
    with pytest.raises(ParameterError, match=match):
        dens.ShiftAssignment(shifts).validate(gaussian_pair)


def test_shift_assignment_rejects_non_finite():
    with pytest.raises(ParameterError):
        dens.ShiftAssignment([0.0, math.inf])


def test_conditional_evaluation(gaussian_pair):
    assert dens.conditional_stats(gaussian_pair, 0) == (-1.0, -1.0, -1.0)
    value = dens.eval_conditional(gaussian_pair, 0, -1.0)
    assert isinstance(value, float)
    assert value == pytest.approx(gaussian_pair.shape(0).peak)


def test_error_component_is_centred_at_location_minus_shift():
    family = corpus.gaussian(1.0)
    p = dens.mixture_error_pdf(family, dens.ShiftAssignment([0.5]))
    assert family.grid.x[int(np.argmax(p.values))] == -0.5


def test_mixture_error_pdf(gaussian_pair):
    median = dens.ShiftAssignment([-1.0, 1.5])
    p = dens.mixture_error_pdf(gaussian_pair, median)
    assert integrate(p) == pytest.approx(1.0, abs=1e-9)
    # both components centred at 0 make the error symmetric
    np.testing.assert_allclose(p.values, p.values[::-1], rtol=1e-12, atol=1e-300)
    expected = 0.4 * gaussian_pair.shape(0).peak + 0.6 * gaussian_pair.shape(1).peak
    assert float(p(0.0)) == pytest.approx(expected)


def _cell_quad(shape, point, width):
    # split at the location, where the laplace and triangular densities have their corner
    edges = sorted({point - width / 2, point + width / 2} | {shape.location})
    edges = [edge for edge in edges if point - width / 2 <= edge <= point + width / 2]
    total = sum(
        sp_integrate.quad(shape.pdf, lo, hi, epsabs=0.0, epsrel=1e-12, limit=200)[0]
        for lo, hi in zip(edges, edges[1:])
    )
    return total / width


@pytest.mark.parametrize(
    "kind,location,scale",
    [("uniform", 0.2, 1.3), ("triangular", -0.4, 0.8), ("laplace", 0.5, 0.15)],
)
def test_cell_average(kind, location, scale):
    shape = dens.CsumShape(kind, location, scale)
    width = 1 / 64
    x = np.array([location - 2.0, location - 0.3, location, location + 0.41, location + 3.0])
    expected = [_cell_quad(shape, point, width) for point in x]
    np.testing.assert_allclose(shape.cell_average(x, width), expected, rtol=1e-9, atol=1e-12)


def test_gaussian_is_sampled_pointwise():
    shape = dens.CsumShape("gaussian", 0.0, 0.5)
    x = np.linspace(-1.0, 1.0, 9)
    assert shape.samples(x, 0.25).tolist() == shape.pdf(x).tolist()


def test_unit_uniform_cells_are_exact(unit_uniform):
    # jumps on cell boundaries: every cell is either inside or outside the support
    values = dens.component_error_values(unit_uniform, 0, 0.0)
    assert set(values.tolist()) == {0.0, 1.0}
    assert int(np.sum(values)) == 1024


@pytest.mark.parametrize(
    "name",
    [
        "gaussian-pair",
        "laplace-gaussian",
        "uniform-triangular",
        "mixed-triple",
        "triangular-triple",
        "two-uniforms",
    ],
)
def test_mixture_error_pdf_conserves_mass(families, name):
    family = families[name]
    median = median_assignment(family)
    candidates = [median, median.translated(2.0), median.translated(-2.0)]
    candidates += [pert.candidate for pert in perturbation_grid(family, step=0.7, half_width=2.0)]
    for candidate in candidates:
        p = dens.mixture_error_pdf(family, candidate)
        assert integrate(p) == pytest.approx(1.0, abs=1e-9), str(candidate)


def test_mixture_error_pdf_with_a_jump_on_a_sample():
    # the unit uniform's jumps at +-0.5 land on samples, which carry half the height
    family = dens.CsumFamily([(1.0, dens.CsumShape("uniform", 0.0, 1.0))], Grid(-4.0, 4.0, 8193))
    p = dens.mixture_error_pdf(family, dens.ShiftAssignment([0.0]))
    assert integrate(p) == pytest.approx(1.0, abs=1e-12)
    assert float(p(0.5)) == pytest.approx(0.5, abs=1e-12)
    assert float(p(-0.5)) == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("name", ["gaussian-pair", "mixed-triple", "two-uniforms"])
def test_mixture_error_pdf_translation_equivariance(families, name):
    family = families[name]
    median = median_assignment(family)
    p = dens.mixture_error_pdf(family, median)
    # a common shift of 0.5 (128 samples) moves the whole error by -0.5
    moved = dens.mixture_error_pdf(family, median.translated(0.5))
    np.testing.assert_allclose(moved.values, shift_resample(p, 0.5).values, rtol=1e-9, atol=1e-12)
    for spec in ("shannon", "renyi:0.5", "renyi:2", "ip:3"):
        assert risks.evaluate(spec, moved) == pytest.approx(risks.evaluate(spec, p), abs=1e-9)
