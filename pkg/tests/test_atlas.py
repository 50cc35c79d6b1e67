"""Chart transitions, lattice relabelling, holonomy, and atlas serialization."""
import numpy as np
import pytest

from bsq.atlas import (
    ActionAngleChart,
    ChartAtlas,
    ChartTransition,
    LatticeLabel,
    atlas_from_json,
    atlas_to_json,
    bs_label_of_actions,
    compose_transitions,
    holonomy_of_loop,
    identity_transition,
    is_globally_labelable,
    map_actions,
    map_angles,
    relabel,
)

SHEAR = ((1, 1), (0, 1))


def box(chart_id, half, dim=2):
    return ActionAngleChart(chart_id, (-half,) * dim, (half,) * dim)


def test_map_actions_identity():
    t = identity_transition(0, 2)
    assert np.allclose(map_actions(t, (0.3, -1.2)), (0.3, -1.2))


def test_map_actions_shear():
    t = ChartTransition(0, 1, SHEAR)
    assert np.allclose(map_actions(t, (0.0, 1.0)), (1.0, 1.0))


def test_map_actions_pure_offset():
    t = ChartTransition(0, 1, SHEAR, offset=(1, 0))
    assert np.allclose(map_actions(t, (0.0, 0.0), planck_h=1.0), (1.0, 0.0))


def test_map_angles_identity():
    t = identity_transition(0, 2)
    assert np.allclose(map_angles(t, (0.25, 0.75)), (0.25, 0.75))


def test_map_angles_shear():
    t = ChartTransition(0, 1, SHEAR)
    assert t.angle_matrix == ((1, 0), (-1, 1))
    assert np.allclose(map_angles(t, (0.5, 0.5)), (0.5, 0.0))


def test_map_angles_mod_one_wrap():
    t = ChartTransition(0, 1, SHEAR)
    assert np.allclose(map_angles(t, (0.2, 0.1)), (0.2, 0.9))


def test_relabel_identity():
    t = identity_transition(0, 2)
    assert relabel(t, LatticeLabel(0, (3, -2))).n == (3, -2)


def test_relabel_shear():
    t = ChartTransition(0, 1, SHEAR)
    assert relabel(t, LatticeLabel(0, (0, 1))).n == (1, 1)


def test_relabel_twice_matches_composed_square():
    t01 = ChartTransition(0, 1, SHEAR)
    t12 = ChartTransition(1, 2, SHEAR)
    twice = relabel(t12, relabel(t01, LatticeLabel(0, (0, 1))))
    squared = compose_transitions([t01, t12])
    assert squared.matrix == ((1, 2), (0, 1))
    assert relabel(squared, LatticeLabel(0, (0, 1))) == twice
    assert twice.n == (2, 1)


def test_relabel_chart_mismatch():
    t = ChartTransition(0, 1, SHEAR)
    with pytest.raises(ValueError):
        relabel(t, LatticeLabel(1, (0, 0)))


def test_compose_round_trip_is_identity():
    t = ChartTransition(0, 1, SHEAR, offset=(2, -1))
    assert compose_transitions([t, t.inverse()]).is_identity()


def test_compose_empty_path_identity():
    assert compose_transitions([], chart=0, dim=2).is_identity()
    with pytest.raises(ValueError):
        compose_transitions([])


def test_compose_rejects_broken_chain():
    t01 = ChartTransition(0, 1, SHEAR)
    t21 = ChartTransition(2, 1, SHEAR)
    with pytest.raises(ValueError):
        compose_transitions([t01, t21])


def test_non_unimodular_matrix_rejected():
    with pytest.raises(ValueError):
        ChartTransition(0, 1, ((2, 0), (0, 1)))


def test_oriented_atlas_rejects_reflections():
    flip = ChartTransition(0, 1, ((0, 1), (1, 0)))  # det -1
    charts = [box(0, 5.0), box(1, 5.0)]
    ChartAtlas(charts, [flip])  # fine when unoriented
    with pytest.raises(ValueError):
        ChartAtlas(charts, [flip], oriented=True)


def _random_unimodular(rng, dim=2, bound=3):
    while True:
        m = rng.integers(-bound, bound + 1, size=(dim, dim))
        det = round(float(np.linalg.det(m)))
        if det in (1, -1):
            return tuple(tuple(int(x) for x in row) for row in m)


def test_relabel_functorial_over_random_paths():
    rng = np.random.default_rng(7)
    for _ in range(200):
        length = rng.integers(1, 5)
        path = []
        for i in range(length):
            path.append(
                ChartTransition(
                    i, i + 1, _random_unimodular(rng), tuple(rng.integers(-3, 4, size=2))
                )
            )
        label = LatticeLabel(0, tuple(rng.integers(-10, 11, size=2)))
        stepwise = label
        for t in path:
            stepwise = relabel(t, stepwise)
        assert relabel(compose_transitions(path), label) == stepwise
        composed = compose_transitions(path)
        assert composed.det in (1, -1)
        # exact inverse round trip
        assert relabel(composed.inverse(), relabel(composed, label)) == label


def test_actions_and_labels_commute_at_lattice_points():
    rng = np.random.default_rng(11)
    h = 0.25
    for _ in range(100):
        t = ChartTransition(0, 1, _random_unimodular(rng), tuple(rng.integers(-2, 3, size=2)))
        n = tuple(rng.integers(-8, 9, size=2))
        mapped = map_actions(t, np.array(n) * h, planck_h=h)
        assert np.allclose(mapped, np.array(relabel(t, LatticeLabel(0, n)).n) * h)


def _annulus_atlas(matrix, offset=(0, 0), oriented=False, half=20.0):
    """Three charts covering an annulus; going once around composes to `matrix`."""
    charts = [box(0, half), box(1, half), box(2, half)]
    ident = ((1, 0), (0, 1))
    transitions = [
        ChartTransition(0, 1, ident),
        ChartTransition(1, 2, ident),
        ChartTransition(2, 0, matrix, offset),
    ]
    return ChartAtlas(charts, transitions, planck_h=1.0, oriented=oriented)


def test_holonomy_trivial_loop():
    atlas = ChartAtlas([box(0, 5.0)], ())
    assert holonomy_of_loop(atlas, [0]).is_identity()


def test_holonomy_back_and_forth_identity():
    atlas = _annulus_atlas(SHEAR)
    assert holonomy_of_loop(atlas, [0, 1, 0]).is_identity()


def test_holonomy_shear_loop():
    atlas = _annulus_atlas(SHEAR)
    hol = holonomy_of_loop(atlas, [0, 1, 2, 0])
    assert hol.matrix == SHEAR


def test_holonomy_concatenated_inverse_loops():
    atlas = _annulus_atlas(SHEAR)
    once = [0, 1, 2, 0]
    forward = holonomy_of_loop(atlas, once)
    with_inverse = compose_transitions([forward, forward.inverse()])
    assert with_inverse.is_identity()
    # loop then its reverse, as one chart walk
    assert holonomy_of_loop(atlas, [0, 1, 2, 0, 2, 1, 0]).is_identity()
    # going around twice squares the shear
    assert holonomy_of_loop(atlas, [0, 1, 2, 0, 1, 2, 0]).matrix == ((1, 2), (0, 1))


def test_bs_label_detection():
    atlas = ChartAtlas([box(0, 5.0)], (), planck_h=1.0)
    assert bs_label_of_actions(atlas, 0, (3.0, -2.0)) == (3, -2)
    assert bs_label_of_actions(atlas, 0, (1.5, 0.0)) is None


def test_bs_label_fractional_planck():
    atlas = ChartAtlas([box(0, 5.0)], (), planck_h=0.25)
    assert bs_label_of_actions(atlas, 0, (0.75, 0.5)) == (3, 2)


def test_bs_label_outside_box():
    atlas = ChartAtlas([box(0, 2.0)], (), planck_h=1.0)
    assert bs_label_of_actions(atlas, 0, (4.0, 0.0)) is None


def test_global_labelable_single_chart():
    atlas = ChartAtlas([box(0, 5.0)], ())
    ok, witness = is_globally_labelable(atlas)
    assert ok and witness is None


def test_global_labelable_identity_gluing():
    atlas = _annulus_atlas(((1, 0), (0, 1)))
    ok, witness = is_globally_labelable(atlas)
    assert ok and witness is None


def test_monodromy_atlas_is_not_globally_labelable():
    atlas = _annulus_atlas(SHEAR)
    ok, witness = is_globally_labelable(atlas)
    assert not ok
    assert witness[0] == witness[-1]
    assert not holonomy_of_loop(atlas, witness).is_identity()


def test_atlas_json_round_trip():
    atlas = _annulus_atlas(SHEAR, offset=(1, -2))
    text = atlas_to_json(atlas)
    rebuilt = atlas_from_json(text)
    assert atlas_to_json(rebuilt) == text
    assert rebuilt.planck_h == atlas.planck_h
    assert rebuilt.transitions.keys() == atlas.transitions.keys()
    for key in atlas.transitions:
        assert rebuilt.transitions[key] == atlas.transitions[key]


def test_atlas_rejects_conflicting_inverse():
    charts = [box(0, 5.0), box(1, 5.0)]
    t = ChartTransition(0, 1, SHEAR)
    wrong_back = ChartTransition(1, 0, SHEAR)  # not the inverse of t
    with pytest.raises(ValueError):
        ChartAtlas(charts, [t, wrong_back])
