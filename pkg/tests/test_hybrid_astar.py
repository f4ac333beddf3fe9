import math

import numpy as np
import pytest

from conftest import lot_for, start_for
from parkset.environment import FreeSpace, Rect, build_free_space, poses_in_free_space
from parkset.errors import ConfigError, InvalidInputError, NoPathError
from parkset.hybrid_astar import GlobalPath, SearchConfig, plan_global
from parkset.model import Pose, VehicleParams, kinematic_step, wrap_angle

P = VehicleParams()
OPEN = FreeSpace(Rect(-5, -10, 25, 10), (), P.footprint_radius)


def _check_path(gp: GlobalPath, start: Pose, target: Pose, fs: FreeSpace, cfg: SearchConfig):
    st = gp.states
    assert np.array_equal(st[0], start.as_tuple())
    assert poses_in_free_space(st[:, 0], st[:, 1], st[:, 2], P, fs).all()
    end = gp.end
    assert math.hypot(end.x - target.x, end.y - target.y) <= cfg.goal_tol_xy
    assert abs(wrap_angle(end.psi - target.psi)) <= cfg.goal_tol_psi
    assert len(gp.gear) == len(gp.steering) == len(st) - 1
    # unit arc cost bounds the cost below by the straight distance actually covered
    assert gp.cost >= gp.length >= math.hypot(start.x - end.x, start.y - end.y) - 1e-12
    # stored states replay the recorded controls exactly
    p = start
    for k in range(len(gp.gear)):
        p = kinematic_step(p, float(gp.gear[k]), float(gp.steering[k]), float(gp.step_length[k]), P.wheelbase_l)
        assert np.array_equal(p.as_tuple(), st[k + 1])


def test_start_equals_target():
    s = Pose(8, 2, -1.0)
    gp = plan_global(s, s, OPEN, P)
    assert len(gp.gear) == 0 and gp.gear_shift_count == 0 and gp.length == 0
    assert gp.end == s


def test_straight_ahead():
    cfg = SearchConfig()
    start, target = Pose(12, 5, math.pi), Pose(8, 5, math.pi)
    gp = plan_global(start, target, OPEN, P, cfg)
    _check_path(gp, start, target, OPEN, cfg)
    assert gp.gear_shift_count == 0
    assert abs(gp.length - 4.0) <= 0.05 * 4.0 + cfg.goal_tol_xy


def test_reverse_only_when_needed():
    cfg = SearchConfig()
    start, target = Pose(12, 5, math.pi), Pose(15, 5, math.pi)
    gp = plan_global(start, target, OPEN, P, cfg)
    _check_path(gp, start, target, OPEN, cfg)
    assert set(gp.gear.tolist()) == {-1}


@pytest.mark.parametrize("zone", ["none", "bottom", "top"])
def test_corridor_paths(zone):
    lot = lot_for(7.0, zone)
    fs = build_free_space(lot, P)
    cfg = SearchConfig()
    start = start_for(7.0)
    target = {"none": Pose(7.9, -0.5, 0.6), "bottom": Pose(7.9, 2.0, -0.6), "top": Pose(7.5, -1.0, 0.3)}[zone]
    gp = plan_global(start, target, fs, P, cfg)
    _check_path(gp, start, target, fs, cfg)
    segs = gp.segments()
    assert sum(len(g) - 1 for _, g, _ in segs) == len(gp.gear)
    assert len(segs) == gp.gear_shift_count + 1


def test_deterministic():
    fs = build_free_space(lot_for(7.0, "bottom"), P)
    a = plan_global(start_for(7.0), Pose(7.9, 2.0, -0.6), fs, P)
    b = plan_global(start_for(7.0), Pose(7.9, 2.0, -0.6), fs, P)
    assert np.array_equal(a.states, b.states) and np.array_equal(a.gear, b.gear)


def test_rejects_colliding_endpoints():
    fs = build_free_space(lot_for(7.0), P)
    with pytest.raises(InvalidInputError):
        plan_global(Pose(11.5, 0, 0), start_for(7.0), fs, P)
    with pytest.raises(InvalidInputError):
        plan_global(start_for(7.0), Pose(11.5, 0, 0), fs, P)


def test_no_path_reports_stats():
    # a wall splits the corridor; the target is unreachable
    lot = lot_for(7.0).with_obstacles(Rect(-2.281, -0.2, 11.655, 0.2))
    fs = build_free_space(lot, P)
    with pytest.raises(NoPathError) as ei:
        plan_global(Pose(6.0, 3.0, 0.0), Pose(6.0, -3.0, 0.0), fs, P, SearchConfig(max_expansions=3000))
    assert ei.value.stats["expansions"] > 0


def test_clearance_falls_back_to_plain_space():
    # the target's front circle sits inside the clearance margin of the zone
    R = P.footprint_radius
    lot = lot_for(7.0, "bottom")
    fs = build_free_space(lot, P)
    top = lot.obstacle_zones[0].ymax
    start = start_for(7.0)
    target = Pose(10.0, top + R + 0.05 + P.front_offset, -math.pi / 2)
    padded = FreeSpace(fs.workspace, fs.obstacles, R + 0.15)
    xyz = [np.array([v]) for v in target.as_tuple()]
    assert not poses_in_free_space(*xyz, P, padded)[0]
    assert poses_in_free_space(*xyz, P, fs)[0]
    gp = plan_global(start, target, fs, P)
    _check_path(gp, start, target, fs, SearchConfig())


@pytest.mark.parametrize(
    "kw",
    [{"xy_cell": 0}, {"psi_bins": 0}, {"reverse_penalty": 0.5}, {"steer_fraction": 1.5}, {"clearance": -1}, {"sub_step": 1.0}],
)
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        SearchConfig(**kw)
