import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import lot_for
from parkset.clothoid import ClothoidCoeffs, ClothoidConfig, clothoid_eval, fit_coeffs, rollout_parking_path
from parkset.environment import Rect, build_free_space, circle_centers_in_free_space
from parkset.errors import ConfigError, InvalidInputError, SingularFitError, UnrepresentableHeadingError
from parkset.model import Pose, VehicleParams, kinematic_step, steering_from_curvature
from parkset.reachable import build_grid

P = VehicleParams()
CFG = ClothoidConfig()


def _residuals(pose, cfg):
    c = fit_coeffs(pose, cfg)
    lv = cfg.towing_distance_Lv
    f0, th0, _ = clothoid_eval(c, pose.x)
    f1, th1, _ = clothoid_eval(c, -lv)
    return f0 - pose.y, math.tan(th0) - math.tan(pose.psi), f1, math.tan(th1)


def python_rollout(start, params, fs, cfg, ts):
    """Reference rollout written directly against the model functions."""
    pose = start
    states = [pose.as_tuple()]
    collided = not circle_centers_in_free_space(pose, params, fs)
    steps = 0
    while pose.x > 0:
        if steps >= cfg.max_steps:
            return np.array(states), False, not collided
        try:
            c = fit_coeffs(pose, cfg)
        except (SingularFitError, UnrepresentableHeadingError):
            return np.array(states), False, not collided
        _, _, kappa = clothoid_eval(c, pose.x)
        delta = steering_from_curvature(kappa, params.wheelbase_l)
        delta = min(max(delta, -params.max_steer), params.max_steer)
        pose = kinematic_step(pose, -cfg.reverse_speed, delta, ts, params.wheelbase_l)
        states.append(pose.as_tuple())
        steps += 1
        if not circle_centers_in_free_space(pose, params, fs):
            collided = True
    reached = abs(pose.y) <= cfg.eps_y and abs(pose.psi) <= cfg.eps_psi
    return np.array(states), reached, not collided


def test_eval_examples():
    assert clothoid_eval(ClothoidCoeffs(0, 0, 0, 0), 5) == (0, 0, 0)
    assert clothoid_eval(ClothoidCoeffs(1, 0, 0, 0), 3) == (1, 0, 0)
    f, th, k = clothoid_eval(ClothoidCoeffs(0, 0.1, 0.02, -0.001), 2)
    assert f == pytest.approx(0.272, abs=1e-12)
    assert math.tan(th) == pytest.approx(0.168, abs=1e-12)
    assert k == pytest.approx(0.028, abs=1e-12)


def test_fit_aligned_is_zero():
    c = fit_coeffs(Pose(5, 0, 0), CFG)
    assert (c.c0, c.c1, c.c2, c.c3) == (0, 0, 0, 0)


@pytest.mark.parametrize("pose", [Pose(6, 2, 0), Pose(4, -1.5, 0.3)])
def test_fit_boundary_conditions(pose):
    assert max(abs(r) for r in _residuals(pose, CFG)) < 1e-9


def test_fit_matches_linear_solve():
    pose, lv = Pose(6, 2, 0.4), 1.0
    x0, x1 = pose.x, -lv
    a = np.array([
        [1, x0, x0**2, x0**3],
        [0, 1, 2 * x0, 3 * x0**2],
        [1, x1, x1**2, x1**3],
        [0, 1, 2 * x1, 3 * x1**2],
    ])
    sol = np.linalg.solve(a, [pose.y, math.tan(pose.psi), 0, 0])
    c = fit_coeffs(pose, CFG)
    assert [c.c0, c.c1, c.c2, c.c3] == pytest.approx(sol, abs=1e-10)


def test_fit_errors():
    with pytest.raises(SingularFitError):
        fit_coeffs(Pose(-1.0, 0, 0), CFG)
    with pytest.raises(UnrepresentableHeadingError):
        fit_coeffs(Pose(3, 0, math.pi / 2), CFG)


@pytest.mark.parametrize("kw", [{"towing_distance_Lv": 0}, {"eps_y": -1}, {"max_steps": 2.5}, {"reverse_speed": math.nan}])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        ClothoidConfig(**kw)


@settings(max_examples=200)
@given(st.floats(0.01, 20), st.floats(-6, 6), st.floats(-1.5, 1.5))
def test_fit_residuals_property(x, y, psi):
    assert max(abs(r) for r in _residuals(Pose(x, y, psi), CFG)) < 1e-9 * max(1.0, abs(math.tan(psi)))


def test_straight_reverse():
    fs = build_free_space(lot_for(7.0), P)
    lp = rollout_parking_path(Pose(5, 0, 0), P, fs, CFG, 0.01)
    assert lp.reached_goal and lp.collision_free
    assert lp.end.y == 0 and lp.end.psi == 0
    assert lp.end.x <= 0


def test_infeasible_start_misses_goal():
    fs = build_free_space(lot_for(7.0), P)
    lp = rollout_parking_path(Pose(5, 5.9, 1.4), P, fs, CFG, 0.01)
    assert not lp.reached_goal


def test_rollout_rejects_start_behind_goal():
    fs = build_free_space(lot_for(7.0), P)
    with pytest.raises(InvalidInputError):
        rollout_parking_path(Pose(-0.5, 0, 0), P, fs, CFG, 0.01)


def test_example_start_matches_grid_membership(small_sweep):
    lot, fs, _, _ = small_sweep
    start = Pose(6.8175, 3, -0.5)
    lp = rollout_parking_path(start, P, fs, CFG, 0.01)
    # membership of the nearest default-grid point is decided by the same rollout
    grid = build_grid(lot, P, (28, 121, 63))
    idx = tuple(int(np.argmin(abs(v - t))) for v, t in zip((grid.xs(), grid.ys(), grid.psis()), start.as_tuple()))
    near = grid.pose(idx)
    assert abs(near.x - start.x) < 1e-12 and abs(near.y - start.y) < 1e-9
    assert abs(near.psi - start.psi) < 0.01
    assert lp.reached_goal == rollout_parking_path(near, P, fs, CFG, 0.01).reached_goal


@pytest.mark.parametrize("zone", ["none", "bottom"])
@pytest.mark.parametrize("start", [(7.5, 2.0, -0.6), (8.5, -3.0, 0.9), (6.9, 0.4, 0.1), (9.4, 5.0, -1.2)])
def test_numba_rollout_matches_python_oracle(zone, start):
    fs = build_free_space(lot_for(7.0, zone), P)
    lp = rollout_parking_path(Pose(*start), P, fs, CFG, 0.01)
    st_ref, reached, cfree = python_rollout(Pose(*start), P, fs, CFG, 0.01)
    assert lp.states.shape == st_ref.shape
    assert np.max(np.abs(lp.states - st_ref)) < 1e-9
    assert lp.reached_goal == reached
    assert lp.collision_free == cfree


def test_replay_is_bit_exact():
    fs = build_free_space(lot_for(7.0), P)
    lp = rollout_parking_path(Pose(8.0, 2.5, -0.7), P, fs, CFG, 0.01)
    pose = lp.start
    for k in range(len(lp) - 1):
        pose = kinematic_step(pose, -lp.speed, float(lp.steer_profile[k]), lp.ts, P.wheelbase_l)
        assert np.max(np.abs(np.array(pose.as_tuple()) - lp.states[k + 1])) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(st.floats(6.82, 9.49), st.floats(-5.5, 5.5), st.floats(-1.5, 1.5))
def test_mirror_symmetry(x, y, psi):
    fs = build_free_space(lot_for(7.0), P)
    a = rollout_parking_path(Pose(x, y, psi), P, fs, CFG, 0.01)
    b = rollout_parking_path(Pose(x, -y, -psi), P, fs, CFG, 0.01)
    assert a.reached_goal == b.reached_goal
    assert a.collision_free == b.collision_free
    mirrored = a.states * np.array([1, -1, -1])
    assert b.states.shape == a.states.shape
    assert np.array_equal(b.states, mirrored)


@settings(max_examples=40, deadline=None)
@given(st.floats(6.82, 9.49), st.floats(-5.5, 5.5), st.floats(-1.5, 1.5))
def test_reached_goal_is_literal(x, y, psi):
    fs = build_free_space(lot_for(7.0), P)
    lp = rollout_parking_path(Pose(x, y, psi), P, fs, CFG, 0.01)
    if lp.reached_goal:
        assert abs(lp.end.y) <= CFG.eps_y and abs(lp.end.psi) <= CFG.eps_psi
        assert lp.end.x <= 0


def test_sticky_collision_differs_from_literal_reset():
    # the corner obstacle is brushed mid-maneuver, then the path is free again
    lot = lot_for(7.0).with_obstacles(Rect(5.0, 3.2, 5.6, 3.6))
    fs = build_free_space(lot, P)
    found = False
    for y in np.linspace(0.5, 5.0, 40):
        for psi in np.linspace(-1.4, 0.2, 30):
            start = Pose(8.5, float(y), float(psi))
            if not circle_centers_in_free_space(start, P, fs):
                continue
            a = rollout_parking_path(start, P, fs, CFG, 0.01, sticky_collision=True)
            b = rollout_parking_path(start, P, fs, CFG, 0.01, sticky_collision=False)
            assert a.collision_free <= b.collision_free
            if b.collision_free and not a.collision_free:
                found = True
    assert found
