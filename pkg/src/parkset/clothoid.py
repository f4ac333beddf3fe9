"""Approximated-clothoid reverse parking path.

The local path is a cubic ``f(x) = c0 + c1 x + c2 x^2 + c3 x^3`` fitted from
the current pose to a virtual towed point at ``x = -towing_distance`` where it
joins the slot axis with zero slope. The fit is redone at every sample and
the commanded curvature (with arc length approximated by x) is turned into a
steering angle that drives the kinematic model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .environment import FreeSpace
from .errors import ConfigError, InvalidInputError, SingularFitError, UnrepresentableHeadingError
from .model import Pose, VehicleParams


@dataclass(frozen=True)
class ClothoidCoeffs:
    c0: float
    c1: float
    c2: float
    c3: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(c) for c in (self.c0, self.c1, self.c2, self.c3)):
            raise InvalidInputError("clothoid coefficients must be finite")


@dataclass(frozen=True)
class ClothoidConfig:
    towing_distance_Lv: float = 1.0
    reverse_speed: float = 0.5
    eps_y: float = 0.05
    eps_psi: float = 0.02
    max_steps: int = 10_000

    def __post_init__(self) -> None:
        for name in ("towing_distance_Lv", "reverse_speed", "eps_y", "eps_psi", "max_steps"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be positive, got {v!r}")
        if int(self.max_steps) != self.max_steps:
            raise ConfigError("max_steps must be an integer")
        object.__setattr__(self, "max_steps", int(self.max_steps))


@dataclass(frozen=True, eq=False)
class LocalPath:
    """Rollout of one reverse maneuver.

    ``states`` is an (N, 3) array of (x, y, psi); ``steer_profile[k]`` is the
    steering command computed at ``states[k]`` and applied to reach
    ``states[k + 1]``.
    """

    states: np.ndarray
    steer_profile: np.ndarray
    reached_goal: bool
    collision_free: bool
    speed: float
    ts: float
    max_unclamped_steer_step: float = 0.0

    def __len__(self) -> int:
        return len(self.states)

    @property
    def start(self) -> Pose:
        return Pose(*self.states[0])

    @property
    def end(self) -> Pose:
        return Pose(*self.states[-1])

    def poses(self) -> list[Pose]:
        return [Pose(*row) for row in self.states]


def clothoid_eval(c: ClothoidCoeffs, x: float) -> tuple[float, float, float]:
    """Lateral position, tangent angle and approximated curvature at ``x``."""
    f = c.c0 + c.c1 * x + c.c2 * x**2 + c.c3 * x**3
    theta = math.atan(c.c1 + 2.0 * c.c2 * x + 3.0 * c.c3 * x**2)
    kappa = 2.0 * c.c2 + 6.0 * c.c3 * x
    return f, theta, kappa


def fit_coeffs(pose: Pose, cfg: ClothoidConfig) -> ClothoidCoeffs:
    """Cubic through the pose (position and slope) and the towed point (-Lv, 0, 0)."""
    if not abs(pose.psi) < math.pi / 2:
        raise UnrepresentableHeadingError(f"heading {pose.psi} has no finite slope")
    lv = cfg.towing_distance_Lv
    u = pose.x + lv
    if u <= K.SINGULAR_TOL:
        raise SingularFitError(f"x + Lv = {u} leaves no room for the fit")
    t = math.tan(pose.psi)
    # f = a*(x+Lv)^2 + b*(x+Lv)^3 satisfies both conditions at -Lv
    a = (3.0 * pose.y - t * u) / u**2
    b = (t * u - 2.0 * pose.y) / u**3
    return ClothoidCoeffs(
        c0=lv**2 * a + lv**3 * b,
        c1=2.0 * lv * a + 3.0 * lv**2 * b,
        c2=a + 3.0 * lv * b,
        c3=b,
    )


def rollout_parking_path(
    start: Pose,
    params: VehicleParams,
    fs: FreeSpace,
    cfg: ClothoidConfig,
    ts: float,
    *,
    sticky_collision: bool = True,
) -> LocalPath:
    """Roll the receding-horizon clothoid maneuver from ``start`` to the goal line.

    ``sticky_collision=False`` reproduces the literal pseudocode where a
    later free pose clears earlier collisions.
    """
    if ts <= 0:
        raise ConfigError("ts must be positive")
    if not start.x > 0:
        raise InvalidInputError("rollout start must lie in front of the goal line (x > 0)")
    bounds, obs = fs.kernel_args()
    states = np.empty((cfg.max_steps + 1, 3), dtype=np.float64)
    steer = np.empty(cfg.max_steps + 1, dtype=np.float64)
    n, reached, cfree, max_dd, _ = K.rollout(
        start.x, start.y, start.psi,
        params.wheelbase_l, params.max_steer,
        cfg.towing_distance_Lv, cfg.reverse_speed, ts, cfg.eps_y, cfg.eps_psi, cfg.max_steps,
        params.rear_offset, params.front_offset, bounds, obs, fs.radius,
        sticky_collision, True, states, steer,
    )
    return LocalPath(
        states=states[:n].copy(),
        steer_profile=steer[:n].copy(),
        reached_goal=bool(reached),
        collision_free=bool(cfree),
        speed=cfg.reverse_speed,
        ts=ts,
        max_unclamped_steer_step=float(max_dd),
    )
