import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reslab import (
    AnalyticFunction,
    ContourTooClose,
    FixedPointDatum,
    IncompleteSource,
    LocalizationMismatch,
    MapResonanceSet,
    MorseSmale,
    NoConvergence,
    NonIntegerResidue,
    PrimitiveOrbit,
    Provenance,
    Resonance,
    WindowSpec,
    ZeroMapResonance,
    ZetaFunction,
    count_zeros_argument_principle,
    exact_fixed_point_lattice,
    exact_morse_smale_closed_orbit,
    exact_suspension_lattice,
    locate_resonances,
    morse_smale_union,
    orbit_data,
    refine_newton,
    system_lattice,
)
from reslab.resonances import (
    circle_count,
    count_zeros_detailed,
    merge_resonances,
    resonances_from_csv,
    resonances_to_csv,
)

TWO_PI = 2 * math.pi


def values(res):
    return sorted((round(r.value.real, 9), round(r.value.imag, 9), r.multiplicity) for r in res)


# --- exact lattices -----------------------------------------------------------------

def test_suspension_lattice_examples():
    res = exact_suspension_lattice(MapResonanceSet(((1.0, 1),)), 1.0, WindowSpec(-7, 7, -1, 1))
    assert values(res) == values([Resonance(-TWO_PI), Resonance(0), Resonance(TWO_PI)])
    res = exact_suspension_lattice(MapResonanceSet(((0.5, 1),)), 1.0, WindowSpec(-1, 1, -1, 0))
    assert len(res) == 1 and res[0].value == pytest.approx(-1j * math.log(2))
    assert exact_suspension_lattice(MapResonanceSet(((1.0, 1),)), 1.0, WindowSpec(1, 5, -1, 1)) == []


def test_suspension_lattice_rejects_zero():
    with pytest.raises(ZeroMapResonance):
        exact_suspension_lattice(MapResonanceSet(((0.0, 1),)), 1.0, WindowSpec(-1, 1, -1, 1))


def test_suspension_lattice_negative_rate_is_shifted():
    res = exact_suspension_lattice(MapResonanceSet(((-0.5, 1),)), 1.0, WindowSpec(-4, 4, -1, 0))
    assert values(res) == values([Resonance(-math.pi - 1j * math.log(2)), Resonance(math.pi - 1j * math.log(2))])


def test_closed_orbit_lattice_examples(saddle_orbit):
    res = exact_morse_smale_closed_orbit(saddle_orbit, WindowSpec(-1, 1, -2, 0.5))
    assert values(res) == values([Resonance(-0.7j), Resonance(-1.4j)])
    twisted = PrimitiveOrbit("g", 1.0, (math.exp(0.7),), 1, stable_orientable=False)
    res = exact_morse_smale_closed_orbit(twisted, WindowSpec(-4, 4, -1, 0.5))
    assert values(res) == values([Resonance(math.pi - 0.7j), Resonance(-math.pi - 0.7j)])
    assert exact_morse_smale_closed_orbit(saddle_orbit, WindowSpec(-4, 4, 0.1, 1)) == []


def test_fixed_point_lattice_examples():
    fp = FixedPointDatum("p", (-1, 2), 1)
    res = exact_fixed_point_lattice(fp, WindowSpec(-1, 1, -3.5, 0.5))
    assert values(res) == values([Resonance(-1j), Resonance(-2j), Resonance(-3j, 2)])
    assert exact_fixed_point_lattice(fp, WindowSpec(-1, 1, -0.5, 0.5)) == []
    weighted = FixedPointDatum("p", (-1, 2), 1, (0.5,))
    assert values(exact_fixed_point_lattice(weighted, WindowSpec(-1, 1, -2, 0.5))) == values([Resonance(-1.5j)])


def test_fixed_point_multiplicity_is_representation_count():
    fp = FixedPointDatum("p", (-1, 2), 1)
    res = {round(-r.value.imag): r.multiplicity for r in exact_fixed_point_lattice(fp, WindowSpec(-1, 1, -40.5, 0))}
    for a in range(1, 41):
        reps = sum(1 for k1 in range(1, a + 1) for k2 in range(0, a) if k1 + 2 * k2 == a)
        assert res[a] == reps


def test_morse_smale_union_examples(saddle_orbit):
    fp = FixedPointDatum("p", (-1, 2), 1)
    res = morse_smale_union(MorseSmale((saddle_orbit,), (fp,)), WindowSpec(-1, 1, -2, 0.5))
    assert values(res) == values([Resonance(-0.7j), Resonance(-1j), Resonance(-1.4j), Resonance(-2j)])
    assert morse_smale_union(MorseSmale((), ()), WindowSpec(-1, 1, -2, 0.5)) == []
    doubled = morse_smale_union(MorseSmale((saddle_orbit, saddle_orbit), ()), WindowSpec(-1, 1, -2, 0.5))
    assert [r.multiplicity for r in doubled] == [2, 2]


def test_lattice_conjugation_symmetry(horseshoe_spec):
    res = system_lattice(horseshoe_spec).in_window(WindowSpec(-20, 20, -6, 1))
    assert values(res) == values([Resonance(-r.value.conjugate(), r.multiplicity) for r in res])


def test_merge_adds_multiplicities():
    merged = merge_resonances([Resonance(1.0), Resonance(1.0 + 1e-12), Resonance(2.0, 3)])
    assert [(r.value, r.multiplicity) for r in merged] == [(1.0, 2), (2.0, 3)]


# --- argument principle ---------------------------------------------------------------

@pytest.mark.parametrize("window, expected", [
    (WindowSpec(-1, 1, -0.5, 0.5), 1),
    (WindowSpec(1, 5, -0.5, 0.5), 0),
    (WindowSpec(-7, 7, -0.5, 0.5), 3),
])
def test_count_zeros_cat(cat_data, window, expected):
    assert count_zeros_argument_principle(ZetaFunction(cat_data), window) == expected


def test_window_additivity(horseshoe_data):
    z = ZetaFunction(horseshoe_data)
    whole = count_zeros_argument_principle(z, WindowSpec(-10, 10, -3, -0.2))
    parts = [WindowSpec(-10, -1.1, -3, -0.2), WindowSpec(-1.1, 2.3, -3, -0.2), WindowSpec(2.3, 10, -3, -0.2)]
    assert whole == sum(count_zeros_argument_principle(z, w) for w in parts) == 9


def test_edge_through_zero_is_pushed_outward(cat_data):
    z = ZetaFunction(cat_data)
    with pytest.raises(ContourTooClose):
        count_zeros_detailed(z, WindowSpec(0.0, 1.0, -0.5, 0.5), max_attempts=0)
    res = count_zeros_detailed(z, WindowSpec(0.0, 1.0, -0.5, 0.5))
    assert res.count == 1
    assert res.window.re_min < 0.0


def test_non_integer_residue_guard():
    # a pole is not a zero of an entire function: sqrt-type log derivative gives a half winding
    f = AnalyticFunction(lambda z: np.sqrt(z), lambda z: 0.5 / np.asarray(z), spacing_hint=1.0)
    with pytest.raises(NonIntegerResidue):
        count_zeros_argument_principle(f, WindowSpec(-1, 1, -1, 1))


def test_polynomial_counts():
    roots = [0.1 + 0.2j, -0.5 - 0.3j, -0.5 - 0.3j, 2.0 + 2.0j]
    f = AnalyticFunction(lambda z: np.prod([np.asarray(z) - r for r in roots], axis=0),
                         lambda z: sum(1 / (np.asarray(z) - r) for r in roots))
    assert count_zeros_argument_principle(f, WindowSpec(-1, 1, -1, 1)) == 3
    assert circle_count(f, -0.5 - 0.3j, 1e-3) == 2


# --- Newton ---------------------------------------------------------------------------

def test_refine_newton_examples(cat_data, horseshoe_data):
    r = refine_newton(ZetaFunction(cat_data), 0.3 + 0.1j, 1e-10)
    assert abs(r.value) < 1e-10 and r.multiplicity == 1 and r.provenance is Provenance.LOCATED
    r = refine_newton(ZetaFunction(horseshoe_data), -2.0j, 1e-10)
    assert r.value == pytest.approx(-1j * math.log(8), abs=1e-10)
    assert r.multiplicity == 2


def test_refine_newton_no_convergence(cat_data):
    with pytest.raises(NoConvergence):
        refine_newton(ZetaFunction(cat_data), 3.0 + 0.2j, 1e-10, max_radius=0.5)
    flat = AnalyticFunction(lambda z: np.exp(z), lambda z: np.ones_like(np.asarray(z)))
    with pytest.raises(NoConvergence):
        refine_newton(flat, 0.0, 1e-10)


# --- localisation -----------------------------------------------------------------------

def test_locate_cat(cat_data):
    res = locate_resonances(cat_data, WindowSpec(-7, 7, -0.5, 0.5))
    assert [r.multiplicity for r in res] == [1, 1, 1]
    for r, n in zip(res, (-1, 0, 1)):
        assert abs(r.value - n * TWO_PI) < 1e-8


def test_locate_horseshoe(horseshoe_data):
    res = locate_resonances(horseshoe_data, WindowSpec(-1, 1, -2.5, -0.3))
    got = sorted((r.value.imag, r.multiplicity) for r in res)
    assert got[0][0] == pytest.approx(-math.log(8), abs=1e-8) and got[0][1] == 2
    assert got[1][0] == pytest.approx(-math.log(2), abs=1e-8) and got[1][1] == 1


def test_locate_empty_window(cat_data):
    assert locate_resonances(cat_data, WindowSpec(1, 5, -0.5, 0.5)) == []


def test_locate_morse_smale_matches_lattice():
    twisted = PrimitiveOrbit("g", 1.0, (math.exp(0.7), 0.3), 1, stable_orientable=False)
    data = orbit_data(MorseSmale((twisted,), ()))
    window = WindowSpec(-4, 4, -2.5, 0.5)
    located = locate_resonances(data, window)
    exact = system_lattice(MorseSmale((twisted,), ())).in_window(window)
    assert sum(r.multiplicity for r in located) == sum(r.multiplicity for r in exact)
    for a, b in zip(sorted(located, key=lambda r: (r.value.real, r.value.imag)),
                    sorted(exact, key=lambda r: (r.value.real, r.value.imag))):
        assert abs(a.value - b.value) < 1e-8 and a.multiplicity == b.multiplicity


def test_locate_below_product_floor_is_incomplete(horseshoe_data):
    with pytest.raises(IncompleteSource):
        locate_resonances(horseshoe_data, WindowSpec(-1, 1, -80, -0.3))


@settings(max_examples=15, deadline=None)
@given(st.floats(-30, 30), st.floats(0.5, 6.0))
def test_located_equals_exact_on_random_windows(centre, half):
    from reslab import HorseshoeSuspension
    spec = HorseshoeSuspension(4.0, 0.25)
    window = WindowSpec(centre - half, centre + half, -2.5, -0.3)
    exact = system_lattice(spec).in_window(window)
    try:
        located = locate_resonances(orbit_data(spec), window)
    except (ContourTooClose, LocalizationMismatch):
        # a lattice point on the requested boundary; the outward push may pick it up
        return
    assert sum(r.multiplicity for r in located) >= sum(r.multiplicity for r in exact)
    for e in exact:
        assert min(abs(e.value - r.value) for r in located) < 1e-8


# --- CSV --------------------------------------------------------------------------------

def test_csv_round_trip():
    res = [Resonance(-TWO_PI + 1e-17j, 1, Provenance.LOCATED), Resonance(-2.0794415416798357j, 2)]
    text = resonances_to_csv(res)
    assert text.splitlines()[0] == "re,im,multiplicity,provenance"
    assert resonances_from_csv(text) == res


# --- segment quadrature -------------------------------------------------------------------

def test_integrate_segment_against_antiderivatives():
    from reslab.contour import integrate_segment
    val, err = integrate_segment(np.exp, -1 - 2j, 3 + 1j, epsabs=1e-13)
    assert abs(val - (np.exp(3 + 1j) - np.exp(-1 - 2j))) < 1e-12
    # 1/z around the unit square picks up 2 pi i
    corners = [1 - 1j, 1 + 1j, -1 + 1j, -1 - 1j]
    total = sum(integrate_segment(lambda z: 1 / z, a, b, epsabs=1e-12)[0]
                for a, b in zip(corners, corners[1:] + corners[:1]))
    assert abs(total - 2j * math.pi) < 1e-11
    # a nearly singular integrand still converges by subdivision
    val, _ = integrate_segment(lambda z: 1 / (z - 0.5 - 1e-3j), 0, 1, epsabs=1e-10)
    assert abs(val - (np.log(0.5 - 1e-3j) - np.log(-0.5 - 1e-3j))) < 1e-9
