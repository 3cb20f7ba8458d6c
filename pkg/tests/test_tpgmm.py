import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tpgmm_aug.errors import DimensionError, NumericError
from tpgmm_aug.frames import TIME_BASED, TRAJECTORY_BASED, Frame, euler_to_rotation
from tpgmm_aug.gmm import EmConfig, em_fit, gmr
from tpgmm_aug.tpgmm import (Demonstration, Situation, TpGmm, displacements, fit, instantiate,
                             project_demo, reproduce_demo, reproduce_time_based,
                             reproduce_trajectory_based)

from conftest import random_model, random_situation, random_spd
from oracles import naive_fusion, penalised_objective


def _time_demo(rng, sit, T=40):
    t = np.linspace(0, 1, T)
    x = np.column_stack([np.sin(3 * t), t ** 2]) + 0.01 * rng.normal(size=(T, 2))
    return Demonstration(t, x, sit)


def test_identity_frames_leave_data_unchanged(rng):
    d = _time_demo(rng, Situation((Frame.identity(2), Frame.identity(2))))
    for view in project_demo(d):
        assert np.array_equal(view, d.data)


def test_time_column_untouched(rng):
    d = _time_demo(rng, random_situation(2, 3, rng))
    for view in project_demo(d):
        assert np.array_equal(view[:, 0], d.inputs[:, 0])


def test_projection_hand_example():
    sit = Situation((Frame(euler_to_rotation([np.pi / 2]), [1.0, 0.0]),))
    d = Demonstration([0.0, 1.0], [[1.0, 1.0], [1.0, 1.0]], sit)
    (view,) = project_demo(d)
    assert np.allclose(view[0], [0.0, 1.0, 0.0], atol=1e-15)


def test_trajectory_projection_rotates_displacements(rng):
    sit = random_situation(3, 2, rng)
    x = np.cumsum(rng.normal(size=(30, 3)), axis=0)
    d = Demonstration.from_positions(x, sit)
    for f, view in zip(sit, project_demo(d)):
        assert np.allclose(view[:, :3], (x - f.translation) @ f.rotation, atol=1e-12)
        assert np.allclose(view[:, 3:], displacements(x) @ f.rotation, atol=1e-12)


def test_displacements_repeat_last_row():
    x = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 2.0]])
    assert np.array_equal(displacements(x), [[1.0, 0.0], [0.0, 2.0], [0.0, 2.0]])


def test_trajectory_demo_checks_displacements(rng):
    sit = random_situation(2, 1, rng)
    x = rng.normal(size=(5, 2))
    with pytest.raises(ValueError):
        Demonstration(x, np.zeros((5, 2)), sit, TRAJECTORY_BASED)


def test_demo_shape_checks(rng):
    sit = random_situation(2, 1, rng)
    with pytest.raises(DimensionError):
        Demonstration(np.zeros(5), np.zeros((5, 3)), sit)
    with pytest.raises(DimensionError):
        Demonstration(np.zeros(5), np.zeros((4, 2)), sit)


def test_single_identity_frame_reduces_to_plain_gmm(rng):
    demos = [_time_demo(rng, Situation((Frame.identity(2),))) for _ in range(3)]
    model = fit(demos, 4)
    plain = em_fit(np.vstack([d.data for d in demos]), 4)
    assert np.allclose(model.weights, plain.weights, atol=1e-8)
    assert np.allclose(model.means[0], plain.means, atol=1e-8)
    assert np.allclose(model.covs[0], plain.covs, atol=1e-8)


def test_joint_objective_monotone_on_two_frames(rng):
    demos = [_time_demo(rng, random_situation(2, 2, rng)) for _ in range(3)]
    views = [np.vstack([project_demo(d)[n] for d in demos]) for n in range(2)]
    prev = -np.inf
    for i in range(1, 12):
        model, hist = fit(demos, 3, EmConfig(max_iters=i, tol=1e-300), return_history=True)
        F = penalised_objective(views, model.weights, model.means, model.covs, 1e-6)
        assert F == pytest.approx(hist[-1], abs=1e-9)
        assert F >= prev - 1e-8
        prev = F


def test_responsibilities_normalised(rng):
    from tpgmm_aug.gmm import _e_step
    demos = [_time_demo(rng, random_situation(2, 2, rng)) for _ in range(2)]
    m = fit(demos, 3)
    Xs = np.stack([np.vstack([project_demo(d)[n] for d in demos]) for n in range(2)])
    resp, _ = _e_step(Xs, m.weights, np.array(m.means), np.array(m.covs), 1e-6)
    assert np.allclose(resp.sum(axis=1), 1.0, atol=1e-12)


def test_fit_rejects_mixed_modes(rng):
    sit = random_situation(2, 1, rng)
    a = _time_demo(rng, sit)
    b = Demonstration.from_positions(rng.normal(size=(40, 2)), sit)
    with pytest.raises(ValueError):
        fit([a, b], 2)


# -- fusion -------------------------------------------------------------------

def test_single_identity_frame_fusion_is_identity(rng):
    m = random_model(TIME_BASED, 2, 1, 3, rng)
    g = instantiate(m, Situation((Frame.identity(2),)))
    assert np.allclose(g.means, m.means[0], atol=1e-12)
    assert np.allclose(g.covs, m.covs[0], atol=1e-12)


def test_equal_gaussians_halve_covariance(rng):
    S = random_spd(3, rng)
    mu = rng.normal(size=3)
    m = TpGmm(TIME_BASED, [1.0], np.stack([[mu], [mu]]), np.stack([[S], [S]]), 1)
    g = instantiate(m, Situation((Frame.identity(2), Frame.identity(2))))
    assert np.allclose(g.means[0], mu, atol=1e-12)
    assert np.allclose(g.covs[0], S / 2, atol=1e-12)


@pytest.mark.parametrize("mode", [TIME_BASED, TRAJECTORY_BASED])
def test_fusion_matches_naive_oracle(mode, rng):
    for _ in range(20):
        p, N, K = int(rng.integers(2, 4)), int(rng.integers(1, 4)), int(rng.integers(1, 6))
        m = random_model(mode, p, N, K, rng)
        sit = random_situation(p, N, rng)
        g = instantiate(m, sit)
        means, covs = naive_fusion(m.means, m.covs, [(f.rotation, f.translation) for f in sit], mode)
        assert np.max(np.abs(g.means - means)) < 1e-10
        assert np.max(np.abs(g.covs - covs)) < 1e-10


def test_fusion_checks_situation(rng):
    m = random_model(TIME_BASED, 2, 2, 2, rng)
    with pytest.raises(DimensionError):
        instantiate(m, random_situation(2, 3, rng))
    with pytest.raises(DimensionError):
        instantiate(m, random_situation(3, 2, rng))


def test_fusion_reports_indefinite_input(rng):
    m = random_model(TIME_BASED, 2, 1, 1, rng)
    bad = np.array(m.covs)
    bad[0, 0] = -np.eye(3)
    with pytest.raises(NumericError):
        instantiate(TpGmm(TIME_BASED, m.weights, m.means, bad, 1), Situation((Frame.identity(2),)))


# -- reproduction ---------------------------------------------------------------

def test_decoupled_model_gives_constant_trajectory():
    S = np.diag([0.1, 0.2, 0.3])
    m = TpGmm(TIME_BASED, [1.0], [[[0.5, 1.0, 2.0]]], [[S]], 1)
    traj = reproduce_time_based(m, Situation((Frame.identity(2),)), np.linspace(0, 1, 11))
    assert traj.shape == (11, 2)
    assert np.allclose(traj, [1.0, 2.0], atol=1e-15)


def test_time_rows_match_single_gmr_calls(rng):
    m = random_model(TIME_BASED, 2, 2, 4, rng)
    sit = random_situation(2, 2, rng)
    times = np.linspace(-1, 1, 30)
    traj = reproduce_time_based(m, sit, times)
    g = instantiate(m, sit)
    for t, row in zip(times, traj):
        assert np.allclose(row, gmr(g, [t]).mean, atol=1e-12, rtol=0)


def _field_model(delta):
    p = len(delta)
    mu = np.r_[np.zeros(p), delta]
    S = np.diag(np.r_[np.ones(p), 1e-3 * np.ones(p)])
    return TpGmm(TRAJECTORY_BASED, [1.0], [[mu]], [[S]], p)


def test_zero_field_stays_at_start():
    m = _field_model(np.zeros(3))
    traj = reproduce_trajectory_based(m, Situation((Frame.identity(3),)), [1.0, 2.0, 3.0], 10)
    assert np.array_equal(traj, np.tile([1.0, 2.0, 3.0], (11, 1)))


def test_constant_field_accumulates_linearly():
    delta = np.array([0.1, -0.2])
    m = _field_model(delta)
    start = np.array([1.0, 1.0])
    traj = reproduce_trajectory_based(m, Situation((Frame.identity(2),)), start, 20)
    assert np.allclose(traj, start + np.arange(21)[:, None] * delta, atol=1e-12)


def test_trajectory_is_cumulative_sum_of_gmr(rng):
    m = random_model(TRAJECTORY_BASED, 2, 2, 3, rng)
    sit = random_situation(2, 2, rng)
    start = rng.normal(size=2)
    traj = reproduce_trajectory_based(m, sit, start, 15)
    g = instantiate(m, sit)
    x = start.copy()
    for t in range(15):
        x = x + gmr(g, x).mean
        assert np.allclose(traj[t + 1], x, atol=1e-12)


def test_reproduce_mode_mismatch(rng):
    m = random_model(TIME_BASED, 2, 1, 1, rng)
    with pytest.raises(ValueError):
        reproduce_trajectory_based(m, random_situation(2, 1, rng), [0.0, 0.0], 3)


def test_reproduce_demo_shapes(rng):
    m = random_model(TRAJECTORY_BASED, 3, 2, 2, rng)
    sit = random_situation(3, 2, rng)
    d = Demonstration.from_positions(np.cumsum(rng.normal(size=(12, 3)), axis=0), sit)
    rep = reproduce_demo(m, d)
    assert rep.shape == (12, 3)
    assert np.array_equal(rep[0], d.inputs[0])


@given(st.integers(0, 2**31), st.sampled_from([2, 3]), st.integers(1, 3), st.integers(1, 4))
def test_time_reproduction_equivariant(seed, p, N, K):
    rng = np.random.default_rng(seed)
    m = random_model(TIME_BASED, p, N, K, rng)
    sit = random_situation(p, N, rng)
    G = Frame(euler_to_rotation(rng.uniform(-np.pi, np.pi, 1 if p == 2 else 3)), rng.normal(size=p))
    moved = Situation(tuple(Frame(G.rotation @ f.rotation, G.rotation @ f.translation + G.translation)
                            for f in sit))
    t = np.linspace(-1, 1, 15)
    a = reproduce_time_based(m, sit, t) @ G.rotation.T + G.translation
    b = reproduce_time_based(m, moved, t)
    assert np.allclose(a, b, atol=1e-8, rtol=0)
