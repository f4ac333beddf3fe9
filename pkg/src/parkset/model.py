"""Vehicle geometry and the discrete kinematic bicycle model.

The pose reference point is the center of the rear axle. All headings are
kept in (-pi, pi].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidInputError


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]. In-range values are returned bit-exact."""
    if -math.pi < a <= math.pi:
        return a
    w = math.fmod(a + math.pi, 2.0 * math.pi)
    if w <= 0.0:
        w += 2.0 * math.pi
    return w - math.pi


def _finite(*vals: float) -> bool:
    return all(math.isfinite(v) for v in vals)


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    psi: float

    def __post_init__(self) -> None:
        if not _finite(self.x, self.y, self.psi):
            raise InvalidInputError(f"non-finite pose {self.x, self.y, self.psi}")
        object.__setattr__(self, "psi", wrap_angle(float(self.psi)))

    @property
    def xy(self) -> tuple[float, float]:
        return (self.x, self.y)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.psi)


@dataclass(frozen=True)
class VehicleParams:
    """Table-1 passenger car by default; steering limits are assumed values."""

    length_vl: float = 4.325
    width_vw: float = 1.890
    wheelbase_l: float = 2.630
    rear_overhang_lr: float = 0.845
    max_steer: float = 0.6
    max_steer_rate: float = 0.5

    def __post_init__(self) -> None:
        for name in ("length_vl", "width_vw", "wheelbase_l", "rear_overhang_lr", "max_steer_rate"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InvalidInputError(f"{name} must be a positive finite number, got {v!r}")
        if self.wheelbase_l >= self.length_vl:
            raise InvalidInputError("wheelbase_l must be shorter than length_vl")
        if self.rear_overhang_lr >= self.length_vl:
            raise InvalidInputError("rear_overhang_lr must be shorter than length_vl")
        if not (0.0 < self.max_steer < math.pi / 2):
            raise InvalidInputError("max_steer must lie in (0, pi/2)")

    @property
    def rear_offset(self) -> float:
        """Signed distance from the rear axle to the rear footprint circle."""
        return self.length_vl / 4.0 - self.rear_overhang_lr

    @property
    def front_offset(self) -> float:
        return 3.0 * self.length_vl / 4.0 - self.rear_overhang_lr

    @property
    def footprint_radius(self) -> float:
        return math.hypot(self.length_vl / 4.0, self.width_vw / 2.0)

    @property
    def min_turn_radius(self) -> float:
        return self.wheelbase_l / math.tan(self.max_steer)

    def corners(self, pose: Pose) -> list[tuple[float, float]]:
        """Corners of the body rectangle at ``pose``."""
        c, s = math.cos(pose.psi), math.sin(pose.psi)
        back = -self.rear_overhang_lr
        front = self.length_vl - self.rear_overhang_lr
        half = self.width_vw / 2.0
        out = []
        for lon, lat in ((back, -half), (back, half), (front, half), (front, -half)):
            out.append((pose.x + lon * c - lat * s, pose.y + lon * s + lat * c))
        return out


@dataclass(frozen=True)
class Circle:
    center_x: float
    center_y: float
    radius: float

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise InvalidInputError("circle radius must be positive")

    def contains(self, px: float, py: float, tol: float = 0.0) -> bool:
        return math.hypot(px - self.center_x, py - self.center_y) <= self.radius + tol


def kinematic_step(pose: Pose, v: float, delta: float, ts: float, wheelbase: float) -> Pose:
    """Advance ``pose`` by one zero-order-hold sample of the bicycle model."""
    if not _finite(v, delta, ts, wheelbase):
        raise InvalidInputError("non-finite input to kinematic_step")
    if ts <= 0 or wheelbase <= 0:
        raise InvalidInputError("ts and wheelbase must be positive")
    if abs(delta) >= math.pi / 2:
        raise InvalidInputError(f"steering angle {delta} outside (-pi/2, pi/2)")
    x = pose.x + ts * v * math.cos(pose.psi)
    y = pose.y + ts * v * math.sin(pose.psi)
    psi = pose.psi + ts * (v / wheelbase) * math.tan(delta)
    return Pose(x, y, psi)


def steering_from_curvature(kappa: float, wheelbase: float) -> float:
    if not _finite(kappa, wheelbase):
        raise InvalidInputError("non-finite curvature or wheelbase")
    if wheelbase <= 0:
        raise InvalidInputError("wheelbase must be positive")
    return math.atan(kappa * wheelbase)


def curvature_from_steering(delta: float, wheelbase: float) -> float:
    return math.tan(delta) / wheelbase


def footprint_circles(pose: Pose, params: VehicleParams) -> tuple[Circle, Circle]:
    """Rear and front circles covering the vehicle body."""
    c, s = math.cos(pose.psi), math.sin(pose.psi)
    r = params.footprint_radius
    ro, fo = params.rear_offset, params.front_offset
    rear = Circle(pose.x + ro * c, pose.y + ro * s, r)
    front = Circle(pose.x + fo * c, pose.y + fo * s, r)
    return rear, front
