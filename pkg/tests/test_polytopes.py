import numpy as np
import pytest

from quadchase.polytopes import (EmptyPolytopeError, Polytope,
                                 backward_reachable, contains_polytope,
                                 pre_set)

from oracles import grid_pre_membership


def unit_box(n):
    return Polytope.box([-1.0] * n, [1.0] * n)


def test_box_membership():
    P = unit_box(2)
    assert P.contains([0.5, -0.5])
    assert not P.contains([1.5, 0.0])
    assert P.violation([2.0, 0.0]) == pytest.approx(1.0)


def test_rejects_zero_rows():
    with pytest.raises(ValueError):
        Polytope(np.zeros((1, 2)), np.ones(1))


def test_chebyshev_of_box():
    c, r = unit_box(3).chebyshev()
    np.testing.assert_allclose(c, np.zeros(3), atol=1e-9)
    assert r == pytest.approx(1.0)


def test_empty_detection():
    P = Polytope(np.array([[1.0, 0.0], [-1.0, 0.0]]), np.array([1.0, -2.0]))
    assert P.is_empty()
    assert not unit_box(2).is_empty()


def test_support_and_interval():
    P = Polytope.box([-1.0, -2.0], [3.0, 4.0])
    assert P.support([1.0, 0.0]) == pytest.approx(3.0)
    assert P.interval([0.0, 1.0]) == (pytest.approx(-2.0), pytest.approx(4.0))
    # diagonal direction picks the corner
    assert P.support([1.0, 1.0]) == pytest.approx(7.0)


def test_slice_of_box_is_row_selection():
    P = Polytope.box([-1.0, -2.0, -3.0], [1.0, 2.0, 3.0])
    S = P.slice_coords([1])
    assert S.interval([1.0]) == (pytest.approx(-2.0), pytest.approx(2.0))


def test_slice_of_coupled_polytope():
    # simplex x + y + z <= 1, coords nonnegative; projecting out z gives
    # x + y <= 1 in the positive quadrant
    A = np.array([[1.0, 1.0, 1.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0],
                  [0.0, 0.0, -1.0]])
    P = Polytope(A, np.array([1.0, 0.0, 0.0, 0.0]))
    S = P.slice_coords([0, 1])
    assert S.contains([0.5, 0.49])
    assert not S.contains([0.6, 0.6])
    assert S.support([1.0, 1.0]) == pytest.approx(1.0)


def test_pruning_drops_redundant_rows():
    A = np.array([[1.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0],
                  [1.0, 0.0]])
    b = np.array([1.0, 2.0, 1.0, 1.0, 1.0, 5.0])
    P = Polytope(A, b).pruned()
    assert P.nrows == 4
    c, r = P.chebyshev()
    assert r == pytest.approx(1.0)


def test_sampling_stays_inside_and_is_deterministic():
    P = Polytope.box([-1.0, 0.0], [2.0, 3.0])
    s1 = P.sample(np.random.default_rng(42), 100)
    s2 = P.sample(np.random.default_rng(42), 100)
    np.testing.assert_array_equal(s1, s2)
    assert all(P.contains(x) for x in s1)
    spread = s1.max(axis=0) - s1.min(axis=0)
    assert np.all(spread > 1.0)


def test_csv_roundtrip(tmp_path):
    P = Polytope.box([-1.0, -2.0], [0.5, 4.0])
    path = tmp_path / "poly.csv"
    P.to_csv(path)
    Q = Polytope.from_csv(path)
    np.testing.assert_allclose(Q.A, P.A)
    np.testing.assert_allclose(Q.b, P.b)


# --------------------------------------------------------------------------
# Pre sets


DI_A = np.array([[1.0, 0.1], [0.0, 1.0]])
DI_B = np.array([[0.005], [0.1]])
DI_G = np.zeros(2)


def test_pre_contains_states_with_reachable_successor():
    X = Polytope.box([-5.0, -5.0], [5.0, 5.0])
    U = Polytope.box([-1.0], [1.0])
    pre = pre_set(X, DI_A, DI_B, DI_G, U, X=X)
    # a state whose drift successor stays inside must be a member
    assert pre.contains([0.0, 0.0])
    assert pre.contains([4.0, 2.0])


def test_pre_matches_grid_enumeration():
    target = Polytope.box([-0.5, -0.4], [0.5, 0.4])
    U = Polytope.box([-1.0], [1.0])
    pre = pre_set(target, DI_A, DI_B, DI_G, U)
    rng = np.random.default_rng(8)
    checked = 0
    for _ in range(400):
        x = rng.uniform(-1.0, 1.0, size=2)
        truth = grid_pre_membership(x, DI_A, DI_B, DI_G, target.A, target.b,
                                    -1.0, 1.0)
        margin = np.max(np.abs(pre.A @ x - pre.b))
        if margin < 1e-6:
            continue  # boundary: grid resolution cannot arbitrate
        assert pre.contains(x) == truth
        checked += 1
    assert checked > 350


def test_backward_reachable_monotone():
    # control-invariant target (velocity cap small enough that corner states
    # can stay put), so the reach sets are nested as the horizon grows
    target = Polytope.box([-0.5, -0.05], [0.5, 0.05])
    X = Polytope.box([-5.0, -5.0], [5.0, 5.0])
    U = Polytope.box([-1.0], [1.0])
    prev = target
    for n in range(1, 5):
        cur = backward_reachable(target, DI_A, DI_B, DI_G, U, X, n)
        assert contains_polytope(cur, prev, tol=1e-6)
        prev = cur


def test_backward_reachable_empty_raises():
    # target outside the admissible states can never be reached
    target = Polytope.box([10.0, 10.0], [11.0, 11.0])
    X = Polytope.box([-1.0, -1.0], [1.0, 1.0])
    U = Polytope.box([-0.1], [0.1])
    with pytest.raises(EmptyPolytopeError):
        backward_reachable(target, DI_A, DI_B, DI_G, U, X, 1)
