"""Parking-lot geometry, R-inflated free space and the two-circle collision test.

Frame: the goal pose (vehicle parked, rear axle center) is the origin with
heading 0, so the car faces +x and reverses into the slot along -x. The slot
spans ``x in [-l_r, l_sl - l_r]``, the corridor starts at the slot mouth
``x = l_sl - l_r`` and is ``l_cw`` deep, and it runs ``l_cl`` long in y,
centered on the slot.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .model import Pose, VehicleParams, footprint_circles


@dataclass(frozen=True)
class Rect:
    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self) -> None:
        vals = (self.xmin, self.ymin, self.xmax, self.ymax)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidInputError("rectangle corners must be finite")
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise InvalidInputError(f"rectangle {vals} has no area")

    def distance(self, px: float, py: float) -> float:
        """Euclidean distance from a point to the closed rectangle (0 inside)."""
        dx = max(self.xmin - px, 0.0, px - self.xmax)
        dy = max(self.ymin - py, 0.0, py - self.ymax)
        return math.hypot(dx, dy)

    def as_list(self) -> list[float]:
        return [self.xmin, self.ymin, self.xmax, self.ymax]


@dataclass(frozen=True)
class ParkingLot:
    corridor_length_lcl: float = 12.0
    corridor_width_lcw: float = 7.0
    slot_length_lsl: float = 5.5
    slot_width_lsw: float = 2.9
    obstacle_zones: tuple[Rect, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        for name in ("corridor_length_lcl", "corridor_width_lcw", "slot_length_lsl", "slot_width_lsw"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InvalidInputError(f"{name} must be a positive finite number, got {v!r}")
        object.__setattr__(self, "obstacle_zones", tuple(self.obstacle_zones))

    def slot_mouth_x(self, params: VehicleParams) -> float:
        return self.slot_length_lsl - params.rear_overhang_lr

    def far_wall_x(self, params: VehicleParams) -> float:
        return self.slot_mouth_x(params) + self.corridor_width_lcw

    def workspace(self, params: VehicleParams) -> Rect:
        """Bounding box of the drivable area.

        The rear edge sits one footprint radius behind the slot's back line so
        that the parked goal pose, whose rear circle overhangs the bumper, is
        admissible.
        """
        back = -params.rear_overhang_lr - params.footprint_radius
        half = self.corridor_length_lcl / 2.0
        return Rect(back, -half, self.far_wall_x(params), half)

    def validate_against(self, params: VehicleParams) -> None:
        if self.slot_width_lsw <= params.width_vw:
            raise InvalidInputError("slot_width_lsw must exceed the vehicle width")
        ws = self.workspace(params)
        for i, z in enumerate(self.obstacle_zones):
            if z.xmin < ws.xmin or z.xmax > ws.xmax or z.ymin < ws.ymin or z.ymax > ws.ymax:
                raise InvalidInputError(f"obstacle_zones[{i}] lies outside the workspace {ws.as_list()}")

    def with_obstacles(self, *zones: Rect) -> "ParkingLot":
        return ParkingLot(
            self.corridor_length_lcl,
            self.corridor_width_lcw,
            self.slot_length_lsl,
            self.slot_width_lsw,
            self.obstacle_zones + tuple(zones),
        )


@dataclass(frozen=True)
class FreeSpace:
    """Closed set of admissible footprint-circle centers.

    A point is free iff it lies in the workspace shrunk by ``radius`` and at
    least ``radius`` away from every obstacle rectangle (exact rounded-corner
    dilation).
    """

    workspace: Rect
    obstacles: tuple[Rect, ...]
    radius: float

    @property
    def inner_bounds(self) -> tuple[float, float, float, float]:
        r = self.radius
        w = self.workspace
        return (w.xmin + r, w.xmax - r, w.ymin + r, w.ymax - r)

    def contains(self, px: float, py: float) -> bool:
        x_lo, x_hi, y_lo, y_hi = self.inner_bounds
        if not (x_lo <= px <= x_hi and y_lo <= py <= y_hi):
            return False
        return all(o.distance(px, py) >= self.radius for o in self.obstacles)

    def contains_many(self, px: np.ndarray, py: np.ndarray) -> np.ndarray:
        x_lo, x_hi, y_lo, y_hi = self.inner_bounds
        ok = (px >= x_lo) & (px <= x_hi) & (py >= y_lo) & (py <= y_hi)
        for o in self.obstacles:
            dx = np.maximum(np.maximum(o.xmin - px, 0.0), px - o.xmax)
            dy = np.maximum(np.maximum(o.ymin - py, 0.0), py - o.ymax)
            ok &= np.hypot(dx, dy) >= self.radius
        return ok

    def kernel_args(self) -> tuple[np.ndarray, np.ndarray]:
        """(bounds[4], obstacles[K, 4]) float64 arrays for the compiled kernels."""
        bounds = np.array(self.inner_bounds, dtype=np.float64)
        obs = np.array([o.as_list() for o in self.obstacles], dtype=np.float64).reshape(-1, 4)
        return bounds, obs


def build_free_space(lot: ParkingLot, params: VehicleParams) -> FreeSpace:
    lot.validate_against(params)
    fs = FreeSpace(lot.workspace(params), lot.obstacle_zones, params.footprint_radius)
    if not _has_free_point(fs):
        warnings.warn("inflated obstacles leave no free space in the corridor", RuntimeWarning, stacklevel=2)
    return fs


def _has_free_point(fs: FreeSpace, step: float = 0.05) -> bool:
    x_lo, x_hi, y_lo, y_hi = fs.inner_bounds
    if x_lo > x_hi or y_lo > y_hi:
        return False
    xs = np.arange(x_lo, x_hi + step / 2, step)
    ys = np.arange(y_lo, y_hi + step / 2, step)
    gx, gy = np.meshgrid(xs, ys)
    return bool(fs.contains_many(gx.ravel(), gy.ravel()).any())


def circle_centers_in_free_space(pose: Pose, params: VehicleParams, fs: FreeSpace) -> bool:
    rear, front = footprint_circles(pose, params)
    return fs.contains(rear.center_x, rear.center_y) and fs.contains(front.center_x, front.center_y)


def poses_in_free_space(xs: np.ndarray, ys: np.ndarray, psis: np.ndarray, params: VehicleParams, fs: FreeSpace) -> np.ndarray:
    """Vectorized :func:`circle_centers_in_free_space` over pose arrays."""
    c, s = np.cos(psis), np.sin(psis)
    ro, fo = params.rear_offset, params.front_offset
    return fs.contains_many(xs + ro * c, ys + ro * s) & fs.contains_many(xs + fo * c, ys + fo * s)
