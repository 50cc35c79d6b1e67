"""Exact observable algebra: derivatives, Hamiltonian fields, Poisson brackets."""
import math

import numpy as np
import pytest

from bsq.observables import Observable, hamiltonian_vf, poisson


def test_action_linear_field():
    f = Observable.action(2, 0)  # j1
    dtheta_dt, dj_dt = hamiltonian_vf(f)
    assert dtheta_dt[0] == Observable.constant(2, 1.0)
    assert dtheta_dt[1].is_zero()
    assert all(comp.is_zero() for comp in dj_dt)


def test_angle_surrogate_field():
    # f = cos(2 pi theta_1): dj1/dt = 2 pi sin(2 pi theta_1), angles frozen
    f = Observable.cos_angle(2, (1, 0))
    dtheta_dt, dj_dt = hamiltonian_vf(f)
    assert all(comp.is_zero() for comp in dtheta_dt)
    expected = Observable.sin_angle(2, (1, 0), coeff=2.0 * math.pi)
    diff = dj_dt[0] - expected
    assert all(abs(c) < 1e-14 for c in diff.terms.values())
    assert dj_dt[1].is_zero()


def test_constant_gives_zero_field():
    dtheta_dt, dj_dt = hamiltonian_vf(Observable.constant(2, 4.2))
    assert all(c.is_zero() for c in dtheta_dt + dj_dt)


def test_field_components_match_finite_differences():
    rng = np.random.default_rng(3)
    f = (
        Observable.action(2, 0, power=2, coeff=0.7)
        + Observable.cos_angle(2, (1, -2), coeff=0.4)
        + Observable.action(2, 1) * Observable.sin_angle(2, (0, 1), coeff=1.3)
    )
    dtheta_dt, dj_dt = hamiltonian_vf(f)
    eps = 1e-6
    for _ in range(20):
        j = rng.uniform(-2, 2, size=2)
        th = rng.uniform(0, 1, size=2)
        for i in range(2):
            jp, jm = j.copy(), j.copy()
            jp[i] += eps
            jm[i] -= eps
            df_dj = (f(jp, th) - f(jm, th)) / (2 * eps)
            assert abs(dtheta_dt[i](j, th) - df_dj) < 1e-7
            tp, tm = th.copy(), th.copy()
            tp[i] += eps
            tm[i] -= eps
            df_dth = (f(j, tp) - f(j, tm)) / (2 * eps)
            assert abs(dj_dt[i](j, th) + df_dth) < 1e-6


def test_poisson_of_commuting_actions():
    assert poisson(Observable.action(2, 0), Observable.action(2, 1)).is_zero()


def test_poisson_with_function_of_itself():
    j1 = Observable.action(2, 0)
    assert poisson(j1, j1 * j1).is_zero()


def test_poisson_action_angle_fixture():
    # the sign fixture: {j1, cos 2 pi theta_1} = 2 pi sin 2 pi theta_1
    j1 = Observable.action(2, 0)
    g = Observable.cos_angle(2, (1, 0))
    bracket = poisson(j1, g)
    expected = Observable.sin_angle(2, (1, 0), coeff=2.0 * math.pi)
    diff = bracket - expected
    assert all(abs(c) < 1e-14 for c in diff.terms.values())


def test_poisson_matches_finite_difference_bracket():
    """Desk oracle pinning the global bracket sign on a sample of points."""
    rng = np.random.default_rng(5)
    f = Observable.action(2, 0) + 0.3 * Observable.action(2, 1, power=2)
    g = Observable.cos_angle(2, (1, 0)) + Observable.action(2, 0) * Observable.sin_angle(
        2, (0, 1), coeff=0.5
    )
    bracket = poisson(f, g)
    eps = 1e-6

    def fd_bracket(j, th):
        total = 0.0
        for i in range(2):
            jp, jm = j.copy(), j.copy()
            jp[i] += eps
            jm[i] -= eps
            tp, tm = th.copy(), th.copy()
            tp[i] += eps
            tm[i] -= eps
            df_dth = (f(j, tp) - f(j, tm)) / (2 * eps)
            dg_dj = (g(jp, th) - g(jm, th)) / (2 * eps)
            df_dj = (f(jp, th) - f(jm, th)) / (2 * eps)
            dg_dth = (g(j, tp) - g(j, tm)) / (2 * eps)
            total += df_dth * dg_dj - df_dj * dg_dth
        return total

    for _ in range(10):
        j = rng.uniform(-1.5, 1.5, size=2)
        th = rng.uniform(0, 1, size=2)
        assert abs(bracket(j, th) - fd_bracket(j, th)) < 1e-5


def test_antisymmetry_and_leibniz():
    rng = np.random.default_rng(9)
    f = Observable.action(2, 0) * Observable.cos_angle(2, (0, 1))
    g = Observable.action(2, 1, power=2)
    k = Observable.sin_angle(2, (1, 1))
    anti = poisson(f, g) + poisson(g, f)
    assert all(abs(c) < 1e-13 for c in anti.terms.values())
    leibniz = poisson(f, g * k) - (poisson(f, g) * k + g * poisson(f, k))
    for _ in range(5):
        j = rng.uniform(-1, 1, size=2)
        th = rng.uniform(0, 1, size=2)
        assert abs(leibniz(j, th)) < 1e-12


def test_real_valuedness_enforced():
    with pytest.raises(ValueError):
        Observable(1, [(1.0, (0,), (1,))])  # bare e^{2 pi i theta} is not real
    Observable(1, [(0.5, (0,), (1,)), (0.5, (0,), (-1,))])  # cosine is


def test_canonical_merge_and_zero_pruning():
    f = Observable(1, [(1.0, (1,), (0,)), (-1.0, (1,), (0,))])
    assert f.is_zero()
    g = Observable(1, [(0.5, (1,), (0,)), (0.5, (1,), (0,))])
    assert g.terms == {((1,), (0,)): 1.0}


def test_action_only_and_angle_only_predicates():
    assert Observable.action(2, 0).is_action_only()
    assert not Observable.action(2, 0).is_angle_only()
    assert Observable.cos_angle(2, (1, 0)).is_angle_only()
    mixed = Observable.action(2, 0) * Observable.cos_angle(2, (0, 1))
    assert not mixed.is_action_only() and not mixed.is_angle_only()


def test_evaluation_on_meshes_broadcasts():
    f = Observable.action(1, 0) + Observable.cos_angle(1, (1,))
    j = np.linspace(-1, 1, 5).reshape(5, 1)
    th = np.linspace(0, 1, 4, endpoint=False).reshape(1, 4)
    vals = f([j], [th])
    assert vals.shape == (5, 4)
    assert np.allclose(vals, j + np.cos(2 * math.pi * th))
