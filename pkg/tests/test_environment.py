import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import lot_for
from parkset.environment import (
    FreeSpace,
    ParkingLot,
    Rect,
    build_free_space,
    circle_centers_in_free_space,
    poses_in_free_space,
)
from parkset.errors import InvalidInputError
from parkset.model import Pose, VehicleParams, footprint_circles

P = VehicleParams()
R = P.footprint_radius


def _disc_hits_rect(cx, cy, r, rect):
    # open disc overlaps the closed rectangle
    dx = max(rect.xmin - cx, 0.0, cx - rect.xmax)
    dy = max(rect.ymin - cy, 0.0, cy - rect.ymax)
    return dx * dx + dy * dy < r * r


def _disc_inside_rect(cx, cy, r, rect):
    return rect.xmin <= cx - r and cx + r <= rect.xmax and rect.ymin <= cy - r and cy + r <= rect.ymax


def test_no_obstacles_is_eroded_workspace():
    lot = ParkingLot()
    fs = build_free_space(lot, P)
    ws = lot.workspace(P)
    assert fs.radius == pytest.approx(1.4360, abs=1e-4)
    assert fs.inner_bounds == pytest.approx((ws.xmin + R, ws.xmax - R, ws.ymin + R, ws.ymax - R))
    assert fs.contains(ws.xmin + R, 0.0)
    assert not fs.contains(ws.xmin + R - 1e-9, 0.0)


def test_workspace_frame():
    lot = ParkingLot()
    ws = lot.workspace(P)
    assert lot.slot_mouth_x(P) == pytest.approx(4.655)
    assert ws.xmax == pytest.approx(11.655)
    assert ws.xmin == pytest.approx(-0.845 - R)
    assert (ws.ymin, ws.ymax) == (-6.0, 6.0)


def test_goal_pose_is_free():
    fs = build_free_space(ParkingLot(), P)
    assert circle_centers_in_free_space(Pose(0, 0, 0), P, fs)


def test_obstacle_center_not_free():
    z = Rect(6.0, -1.0, 8.0, 1.0)
    fs = build_free_space(ParkingLot(obstacle_zones=(z,)), P)
    assert not fs.contains(7.0, 0.0)
    assert not FreeSpace(fs.workspace, (z,), 1e-6).contains(7.0, 0.0)


def test_face_distance_boundary():
    z = Rect(6.0, -1.0, 8.0, 1.0)
    fs = build_free_space(ParkingLot(obstacle_zones=(z,)), P)
    assert fs.contains(8.0 + R + 1e-9, 0.0)
    assert not fs.contains(8.0 + R - 1e-9, 0.0)
    assert fs.contains(8.0 + R, 0.0)  # closed set


def test_rounded_corner_dilation():
    z = Rect(6.0, -1.0, 8.0, 1.0)
    fs = build_free_space(ParkingLot(obstacle_zones=(z,)), P)
    # diagonal from the corner: free beyond R, though inside the bounding box of the dilation
    d = (R + 1e-6) / math.sqrt(2)
    assert fs.contains(8.0 + d, 1.0 + d)
    assert not fs.contains(8.0 + 0.99 * d, 1.0 + 0.99 * d)


def test_lot_validation():
    with pytest.raises(InvalidInputError):
        ParkingLot(corridor_width_lcw=0.0)
    with pytest.raises(InvalidInputError):
        Rect(1, 1, 1, 2)
    with pytest.raises(InvalidInputError):
        ParkingLot(slot_width_lsw=1.5).validate_against(P)
    with pytest.raises(InvalidInputError):
        ParkingLot(obstacle_zones=(Rect(0, 0, 20, 1),)).validate_against(P)


def test_full_cover_warns():
    lot = ParkingLot(obstacle_zones=(Rect(-2.281, -6, 11.655, 6),))
    with pytest.warns(RuntimeWarning):
        build_free_space(lot, P)


@pytest.mark.parametrize("zone", ["bottom", "top"])
def test_line_sweep_transitions(zone):
    lot = lot_for(7.0, zone)
    fs = build_free_space(lot, P)
    obst = lot.obstacle_zones[0]
    ws = lot.workspace(P)
    for y in np.linspace(-5.5, 5.5, 1000):
        pose = Pose(8.0, float(y), -math.pi / 2)
        circles = footprint_circles(pose, P)
        expect = all(
            obst.distance(c.center_x, c.center_y) >= R
            and ws.xmin + R <= c.center_x <= ws.xmax - R
            and ws.ymin + R <= c.center_y <= ws.ymax - R
            for c in circles
        )
        assert circle_centers_in_free_space(pose, P, fs) == expect


@settings(max_examples=300, deadline=None)
@given(st.floats(-2.5, 12.0), st.floats(-6.5, 6.5), st.floats(-math.pi, math.pi))
def test_equivalent_to_disc_oracle(x, y, psi):
    lot = lot_for(7.0, "bottom")
    fs = build_free_space(lot, P)
    ws = lot.workspace(P)
    pose = Pose(x, y, psi)
    ok = True
    for c in footprint_circles(pose, P):
        ok &= _disc_inside_rect(c.center_x, c.center_y, R, ws)
        ok &= not any(_disc_hits_rect(c.center_x, c.center_y, R, o) for o in lot.obstacle_zones)
    assert circle_centers_in_free_space(pose, P, fs) == ok


def test_vectorized_matches_scalar():
    lot = lot_for(6.0, "top")
    fs = build_free_space(lot, P)
    rng = np.random.default_rng(3)
    xs = rng.uniform(-2, 11, 2000)
    ys = rng.uniform(-6, 6, 2000)
    ps = rng.uniform(-math.pi, math.pi, 2000)
    vec = poses_in_free_space(xs, ys, ps, P, fs)
    ref = [circle_centers_in_free_space(Pose(*t), P, fs) for t in zip(xs, ys, ps)]
    assert vec.tolist() == ref


def test_monotone_in_radius_and_obstacles():
    rng = np.random.default_rng(5)
    base = build_free_space(lot_for(7.0), P)
    more = build_free_space(lot_for(7.0, "bottom"), P)
    big = FreeSpace(base.workspace, base.obstacles, R + 0.3)
    for px, py in rng.uniform((-2, -6), (12, 6), (3000, 2)):
        if more.contains(px, py):
            assert base.contains(px, py)
        if big.contains(px, py):
            assert base.contains(px, py)
