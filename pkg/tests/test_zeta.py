import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import cat_log_derivative, cat_zeta1, horseshoe_zeta1_series
from reslab import (
    DivergentRegion,
    HorseshoeSuspension,
    MissingPrimitiveData,
    PeriodicOrbitData,
    ZetaFunction,
    abscissa_estimate,
    orbit_data,
    product_form_zeta1,
    ruelle_zeta,
    zeta1,
    zeta1_log_derivative,
)
from reslab.exceptions import InsufficientData
from reslab.systems import MorseSmale, horseshoe_lines

EMPTY = PeriodicOrbitData((), 10.0)
HORSESHOE = orbit_data(HorseshoeSuspension(4.0, 0.25))


def test_cat_zeta_closed_form(cat_data):
    assert zeta1(cat_data, math.pi).value == pytest.approx(2.0, abs=1e-12)
    assert abs(zeta1(cat_data, 0.0).value) < 1e-10
    for lam in (1 + 2j, -3 + 0.5j, 2j):
        assert zeta1(cat_data, lam, method="series").value == pytest.approx(cat_zeta1(lam), abs=1e-12)


def test_cat_log_derivative(cat_data):
    ev = zeta1_log_derivative(cat_data, 3j)
    assert ev.value == pytest.approx(cat_log_derivative(3j), abs=1e-12)
    assert ev.value.imag == pytest.approx(-0.0523957, abs=1e-7)


def test_horseshoe_log_derivative(horseshoe_data):
    ev = zeta1_log_derivative(horseshoe_data, 5j)
    assert ev.value.imag == pytest.approx(-6.0023e-3, abs=1e-6)
    assert abs(ev.value.real) < 1e-15


def test_empty_data():
    assert zeta1(EMPTY, 1 + 1j).value == 1.0
    assert zeta1_log_derivative(EMPTY, 2j).value == 0.0
    assert ruelle_zeta(PeriodicOrbitData((), 1.0, primitive_period_counts=()), 1.0).value == 1.0


def test_product_form_examples():
    assert product_form_zeta1([(1, 1.0)], math.pi) == pytest.approx(2.0)
    assert product_form_zeta1([], 3 + 1j) == 1.0


def test_product_form_matches_series_for_horseshoe(horseshoe_spec, horseshoe_data):
    lines, _ = horseshoe_lines(horseshoe_spec, 20)
    for lam in (4j, 1 + 4j, -2 + 3j):
        series = zeta1(horseshoe_data, lam, method="series").value
        assert product_form_zeta1(lines, lam) == pytest.approx(series, abs=1e-9)
        assert series == pytest.approx(horseshoe_zeta1_series(4.0, 0.25, 2.0, lam), abs=1e-12)


def test_ruelle_zeta_cat_product(cat_data):
    # primitive counts 1, 2, 5 at periods 1, 2, 3
    expected = (1 - math.exp(-1)) * (1 - math.exp(-2)) ** 2 * (1 - math.exp(-3)) ** 5
    ev = ruelle_zeta(cat_data, 1.0, horizon=3)
    assert ev.value == pytest.approx(expected, rel=1e-12)
    assert ev.value.real == pytest.approx(0.366100, abs=1e-6)
    assert ev.heuristic


def test_ruelle_zeta_tends_to_one(horseshoe_data):
    assert ruelle_zeta(horseshoe_data, 60.0).value == pytest.approx(1.0, abs=1e-20)


def test_ruelle_zeta_needs_primitive_data():
    with pytest.raises(MissingPrimitiveData):
        ruelle_zeta(EMPTY, 1.0)


def test_ruelle_zeta_divergent_region(cat_data):
    with pytest.raises(DivergentRegion):
        ruelle_zeta(cat_data, 3j)


def test_series_divergence_guard(horseshoe_data):
    with pytest.raises(DivergentRegion):
        zeta1(horseshoe_data, -2j, method="series")


def test_abscissa_estimates(cat_data, horseshoe_data, saddle_orbit):
    assert abscissa_estimate(cat_data) == pytest.approx(0.0, abs=0.01)
    assert abscissa_estimate(horseshoe_data) == pytest.approx(-math.log(2), abs=0.02)
    ms = orbit_data(MorseSmale((saddle_orbit,), ()), horizon=40)
    assert abscissa_estimate(ms) == pytest.approx(-0.7, abs=0.02)
    with pytest.raises(InsufficientData):
        abscissa_estimate(EMPTY)


def test_auto_method_uses_product_below_abscissa(horseshoe_data):
    ev = zeta1(horseshoe_data, -1.5j)
    assert ev.method == "product"
    assert ev.value == pytest.approx(product_form_zeta1(horseshoe_data.lines, -1.5j))


def test_zeta_function_vectorised(horseshoe_data):
    z = ZetaFunction(horseshoe_data)
    pts = np.array([0.3 - 1j, 2 + 0.5j])
    vals = z(pts)
    assert vals.shape == (2,)
    for p, v in zip(pts, vals):
        assert v == pytest.approx(zeta1(horseshoe_data, p).value, rel=1e-12)
    assert z.spacing_hint == pytest.approx(2 * math.pi)


lam_upper = st.complex_numbers(min_magnitude=0, max_magnitude=12, allow_nan=False, allow_infinity=False).filter(
    lambda z: 1 <= z.imag <= 5 and abs(z.real) <= 10)


@settings(max_examples=40, deadline=None)
@given(lam_upper)
def test_conjugation_symmetry(lam):
    data = HORSESHOE
    a = zeta1(data, -lam.conjugate()).value
    b = zeta1(data, lam).value.conjugate()
    assert a == pytest.approx(b, abs=1e-13)


@pytest.mark.parametrize("which", ["cat", "horseshoe"])
def test_tail_bound_honesty(which, cat_data, horseshoe_data):
    data = cat_data if which == "cat" else horseshoe_data
    checked = 0
    for re in np.linspace(-10, 10, 5):
        for im in np.linspace(0.05, 1.0, 5):
            lam = complex(re, im)
            short = zeta1(data, lam, horizon=15, method="series")
            full = zeta1(data, lam, horizon=30, method="series")
            if short.heuristic:
                continue
            checked += 1
            assert abs(full.value - short.value) <= short.tail_bound
    assert checked > 0
