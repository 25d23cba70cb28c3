import numpy as np
import pytest

from quadchase.dynamics import (ALT_IDX, NX, XPITCH_IDX, YROLL_IDX,
                                InvalidParameterError, QuadInput, QuadParams,
                                QuadState, build_continuous,
                                check_decoupling, controllability_rank,
                                discretize, step, subsystem)

from oracles import rk4_integrate

PARAMS = QuadParams()


@pytest.fixture(scope="module")
def cont():
    return build_continuous(PARAMS)


@pytest.fixture(scope="module")
def disc(cont):
    return discretize(cont, 0.05)


def test_gravity_coupling_entry(cont):
    assert cont.A[1][2] == pytest.approx(9.81)
    assert cont.A[5][6] == pytest.approx(-9.81)


def test_affine_term_is_gravity_only(cont):
    expected = np.zeros(NX)
    expected[9] = -PARAMS.g
    np.testing.assert_array_equal(cont.G, expected)


def test_pitch_row_matches_params(cont):
    row = np.zeros(NX)
    row[2], row[3] = -35.0, -7.0
    np.testing.assert_array_equal(cont.A[3], row)


def test_input_matrix_signs(cont):
    assert cont.B[3, 0] == pytest.approx(-PARAMS.a_p)
    assert cont.B[7, 1] == pytest.approx(-PARAMS.a_r)
    assert cont.B[9, 2] == pytest.approx(1.0 / PARAMS.m)
    assert np.count_nonzero(cont.B) == 3


def test_invalid_params_rejected():
    with pytest.raises(InvalidParameterError):
        build_continuous(QuadParams(m=-1.0))
    with pytest.raises(InvalidParameterError):
        build_continuous(QuadParams(b_p0=0.0))
    with pytest.raises(InvalidParameterError):
        build_continuous(QuadParams(a_r=0.0))


def test_double_integrator_closed_form():
    from quadchase.dynamics import ContinuousModel
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    B = np.array([[0.0], [1.0]])
    model = ContinuousModel(A=A, B=B, G=np.zeros(2), params=PARAMS)
    d = discretize(model, 0.1)
    np.testing.assert_allclose(d.A_T, [[1.0, 0.1], [0.0, 1.0]], atol=1e-14)
    np.testing.assert_allclose(d.B_T[:, 0], [0.005, 0.1], atol=1e-14)


def test_altitude_gravity_drift(cont):
    d = discretize(cont, 0.1)
    assert d.G_T[8] == pytest.approx(-0.04905, abs=1e-12)
    assert d.G_T[9] == pytest.approx(-0.981, abs=1e-12)


def test_discretize_rejects_bad_dt(cont):
    with pytest.raises(InvalidParameterError):
        discretize(cont, 0.0)
    with pytest.raises(InvalidParameterError):
        discretize(cont, 11.0)


def test_zoh_matches_fine_integration(cont, disc):
    rng = np.random.default_rng(7)
    xs = rng.uniform(-1, 1, size=(NX, 100))
    us = rng.uniform(-1, 1, size=(3, 100))
    for j in range(100):
        ref = rk4_integrate(cont.A, cont.B, cont.G, xs[:, j], us[:, j], 0.05)
        got = disc.step_array(xs[:, j], us[:, j])
        assert np.linalg.norm(got - ref) <= 1e-8


def test_semigroup_property(cont):
    d1 = discretize(cont, 0.05)
    d2 = discretize(cont, 0.10)
    np.testing.assert_allclose(d2.A_T, d1.A_T @ d1.A_T, atol=1e-10)
    np.testing.assert_allclose(d2.B_T, d1.A_T @ d1.B_T + d1.B_T, atol=1e-10)
    np.testing.assert_allclose(d2.G_T, d1.A_T @ d1.G_T + d1.G_T, atol=1e-10)


def test_hover_is_equilibrium(disc):
    x = QuadState(x=1.0, y=-2.0, z=0.5)
    u = QuadInput(0.0, 0.0, PARAMS.hover_thrust)
    nxt = step(disc, x, u)
    np.testing.assert_allclose(nxt.to_array(), x.to_array(), atol=1e-12)


def test_free_fall_from_rest(disc):
    x = QuadState(z=1.0)
    nxt = step(disc, x, QuadInput())
    assert nxt.z == pytest.approx(1.0 - 0.5 * PARAMS.g * disc.dt ** 2, abs=1e-12)
    assert nxt.z_dot == pytest.approx(-PARAMS.g * disc.dt, abs=1e-12)


def test_step_matches_matrix_arithmetic(disc):
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = rng.normal(size=NX)
        u = rng.normal(size=3)
        manual = np.zeros(NX)
        for i in range(NX):
            manual[i] = sum(disc.A_T[i, j] * x[j] for j in range(NX))
            manual[i] += sum(disc.B_T[i, j] * u[j] for j in range(3))
            manual[i] += disc.G_T[i]
        np.testing.assert_allclose(disc.step_array(x, u), manual, atol=1e-12)


def test_blocks_stay_decoupled(disc):
    assert check_decoupling(disc)


def test_lateral_subsystems_controllable(disc):
    for idx, col in [(XPITCH_IDX, 0), (YROLL_IDX, 1)]:
        A, B, _ = subsystem(disc, idx, col)
        assert controllability_rank(A, B) == 4
    A, B, _ = subsystem(disc, ALT_IDX, 2)
    assert controllability_rank(A, B) == 2


def test_state_roundtrip():
    v = np.arange(10.0)
    s = QuadState.from_array(v)
    np.testing.assert_array_equal(s.to_array(), v)
    assert s.theta == 2.0 and s.y == 4.0 and s.z == 8.0


def test_matrix_csv_dump(cont, disc, tmp_path):
    from quadchase.dynamics import dump_model_csv
    dump_model_csv(cont, tmp_path / "cont")
    dump_model_csv(disc, tmp_path / "disc")
    A = np.loadtxt(tmp_path / "cont" / "A.csv", delimiter=",")
    np.testing.assert_array_equal(A, cont.A)
    A_T = np.loadtxt(tmp_path / "disc" / "A_T.csv", delimiter=",")
    np.testing.assert_allclose(A_T, disc.A_T)
    G_T = np.loadtxt(tmp_path / "disc" / "G_T.csv", delimiter=",")
    np.testing.assert_allclose(G_T, disc.G_T)
