import math

import numpy as np
import pytest

from knotcsi import csint, presets
from knotcsi.errors import InconsistentDiagram, InputError, ResolutionBudgetExceeded
from knotcsi.geom import project_crossings
from knotcsi.oracle import GaussCode, Visit, a2, conway, directional_writhe, gauss_code

Z = (0.0, 0.0, 1.0)
TREFOIL_TEXT = "+1O,+2U,+3O,+1U,+2O,+3U"


def code_of(name, direction=Z):
    return gauss_code(project_crossings(presets.preset(name), np.asarray(direction)))


def last_undercrossing(comps):
    # any crossing first met from below makes progress towards a descending diagram
    seen, pick = set(), None
    for comp in comps:
        for c, over, _ in comp:
            if c not in seen:
                seen.add(c)
                if not over:
                    pick = c
    return pick


# --- Gauss codes --------------------------------------------------------------------

def test_hopf_code_visits_each_crossing_once_per_component():
    code = code_of("hopf")
    assert len(code.components) == 2
    for comp in code.components:
        assert sorted(v.crossing for v in comp) == sorted(code.crossings)
        assert len(comp) == 2


def test_planar_circle_code_is_empty():
    assert code_of("circle").components == ((),)


def test_trefoil_code_alternates():
    (comp,) = code_of("trefoil").components
    assert len(comp) == 6 and len({v.crossing for v in comp}) == 3
    assert all(a.over != b.over for a, b in zip(comp, comp[1:] + comp[:1]))
    assert len({v.sign for v in comp}) == 1


def test_text_round_trip():
    code = code_of("figure_eight")
    assert GaussCode.from_text(code.to_text()) == code
    assert GaussCode.from_text(TREFOIL_TEXT).to_text() == TREFOIL_TEXT


@pytest.mark.parametrize("text", ["+1O,+1O", "+1O,-1U", "+1O", "+1O,+2U,+2O"])
def test_inconsistent_codes_are_rejected(text):
    with pytest.raises(InconsistentDiagram):
        GaussCode.from_text(text)


def test_bad_token():
    with pytest.raises(InputError):
        GaussCode.from_text("+1X,+1U")
    with pytest.raises(InconsistentDiagram):
        GaussCode(((Visit(1, True, 2), Visit(1, False, 2)),))


# --- Conway polynomial ---------------------------------------------------------------

@pytest.mark.parametrize("name,coeffs", [
    ("circle", (1,)),
    ("trefoil", (1, 0, 1)),
    ("trefoil_alt", (1, 0, 1)),
    ("figure_eight", (1, 0, -1)),
    ("kinked_trefoil", (1, 0, 1)),
    ("hopf", (0, 1)),
    ("torus_2_4", (0, 2, 0, 1)),
    ("split_circles", ()),
])
def test_conway_of_presets(name, coeffs):
    assert conway(code_of(name)).coeffs == coeffs


def test_hand_written_trefoil():
    assert conway(GaussCode.from_text(TREFOIL_TEXT)).coeffs == (1, 0, 1)


def test_unlink_of_three_nested_kinks_is_trivial():
    text = "+1O,+1U,-2U,-2O,+3O,+3U"
    assert conway(GaussCode.from_text(text)).coeffs == (1,)


@pytest.mark.parametrize("name,expected", [("circle", 0), ("trefoil", 1), ("figure_eight", -1)])
def test_a2(name, expected):
    assert a2(code_of(name)) == expected


def test_a2_needs_a_knot():
    with pytest.raises(InputError):
        a2(code_of("hopf"))


@pytest.mark.parametrize("name", ["trefoil", "figure_eight", "torus_2_4", "hopf"])
def test_conway_ignores_rotation_and_relabeling(name):
    code = code_of(name)
    ref = conway(code)
    rng = np.random.default_rng(0)
    for _ in range(5):
        shifts = [int(rng.integers(0, 10)) for _ in code.components]
        ids = sorted(code.crossings)
        mapping = dict(zip(ids, (int(x) + 100 for x in rng.permutation(len(ids)))))
        assert conway(code.rotated(shifts).relabeled(mapping)) == ref


@pytest.mark.parametrize("name", ["trefoil", "figure_eight"])
def test_mirror_keeps_a2(name):
    code = code_of(name)
    assert a2(code.mirror()) == a2(code)


@pytest.mark.parametrize("name", ["trefoil", "figure_eight", "torus_2_4", "kinked_trefoil"])
def test_resolution_order_does_not_matter(name):
    code = code_of(name)
    assert conway(code, pick=last_undercrossing) == conway(code)


def test_other_projection_gives_the_same_polynomial():
    d = np.array([0.3, -0.2, 1.0])
    d /= np.linalg.norm(d)
    assert conway(code_of("figure_eight", d)) == conway(code_of("figure_eight"))


def test_budget():
    with pytest.raises(ResolutionBudgetExceeded):
        conway(code_of("figure_eight"), budget=1)


def test_alexander_second_derivative_at_one_is_a2():
    # Delta(t) = nabla(t^1/2 - t^-1/2), so Delta''(1)/2 equals the z^2 coefficient
    for name in ("trefoil", "figure_eight", "circle"):
        p = conway(code_of(name))
        h = 1e-3
        second = (p.alexander(1 + h) - 2 * p.alexander(1.0) + p.alexander(1 - h)) / h ** 2
        assert abs(second / 2 - p.coefficient(2)) < 1e-5


# --- directional writhe ----------------------------------------------------------------

def test_planar_circle_writhe_is_exactly_zero():
    e = directional_writhe(presets.preset("circle"), 200)
    assert e.value == 0.0 and e.std_error == 0.0


def test_too_few_directions():
    with pytest.raises(InputError):
        directional_writhe(presets.preset("trefoil"), 99)


def test_directional_writhe_tracks_the_integral(golden):
    e = directional_writhe(presets.preset("trefoil"), 2000, seed=3)
    assert abs(e.value - golden["trefoil_writhe_integral"]) < 0.02 + 3 * e.std_error


def test_doubling_directions_is_stable():
    K = presets.preset("figure_eight")
    a = directional_writhe(K, 1000, seed=5)
    b = directional_writhe(K, 2000, seed=6)
    assert abs(a.value - b.value) < 2 * math.hypot(a.std_error, b.std_error)


def test_almost_horizontal_trefoil_counts_crossings():
    K = presets.preset("flat_trefoil")
    vertical = directional_writhe(K, directions=[Z]).value
    assert vertical == -3
    assert abs(csint.writhe_integral(K).value - vertical) < 0.05
