"""Closed-loop path tracking: feedforward + feedback steering, a proportional
velocity law with first-order powertrain lag, and bounded plant disturbances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .clothoid import LocalPath
from .environment import FreeSpace, circle_centers_in_free_space
from .errors import ConfigError, InvalidInputError, TrackingFailureError
from .hybrid_astar import GlobalPath
from .model import Pose, VehicleParams, kinematic_step, steering_from_curvature, wrap_angle


@dataclass(frozen=True)
class LongitudinalConfig:
    nu: float = 1.0
    tau: float = 0.2
    v_max: float = 0.5
    kp: float = 2.0
    kd: float = 0.1
    v_min: float = 0.1  # creep speed so each segment finishes in finite time
    stop_tol: float = 0.02  # remaining arc length at which a segment is done

    def validate(self, ts: float) -> None:
        if not 0.0 < self.nu * ts < 2.0:
            raise ConfigError("nu must lie in (0, 2/ts)")
        if not self.tau > 0 or not self.v_max > 0:
            raise ConfigError("tau and v_max must be positive")
        if ts >= self.tau:
            raise ConfigError("sample time must be shorter than the powertrain time constant")
        if not (0 <= self.v_min <= self.v_max) or not self.stop_tol > 0:
            raise ConfigError("need 0 <= v_min <= v_max and stop_tol > 0")


@dataclass(frozen=True)
class LateralGains:
    k_y: float = 1.5
    k_psi: float = 5.0
    k_d: float = 0.0

    def __post_init__(self) -> None:
        if not all(g >= 0 for g in (self.k_y, self.k_psi, self.k_d)):
            raise ConfigError("lateral gains must be non-negative")


@dataclass(frozen=True)
class DisturbanceConfig:
    bound_xy: float = 0.005
    bound_psi: float = 0.002
    seed: int = 0

    def __post_init__(self) -> None:
        if not (self.bound_xy >= 0 and self.bound_psi >= 0):
            raise ConfigError("disturbance bounds must be non-negative")


@dataclass(frozen=True)
class TrackingMetrics:
    rmse_lateral: float
    rmse_heading: float
    max_err_lateral: float
    max_err_heading: float
    gear_shift_count: int
    collisions: int = 0
    final_pose: tuple[float, float, float] = (0.0, 0.0, 0.0)
    duration: float = 0.0
    max_steer_step: float = 0.0


CSV_COLUMNS = ("t", "x", "y", "psi", "v", "delta", "e_y", "e_psi", "gear")


@dataclass(eq=False)
class Trajectory:
    columns: dict[str, np.ndarray] = field(default_factory=dict)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def __len__(self) -> int:
        return len(self.columns["t"]) if self.columns else 0

    def to_csv(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            data = np.column_stack([self.columns[c] for c in CSV_COLUMNS])
            for row in data:
                fh.write(",".join("%.9g" % v for v in row) + "\n")


# --- reference path ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Segment:
    """Constant-gear reference piece with per-sample curvature and arc length.

    ``steer_ff`` is the feedforward steering: the reference steering averaged
    over a centered arc-length window, so curvature jumps are entered early
    and left late at a rate the steering actuator can follow. A window
    leaves linear curvature ramps (the clothoid part) unchanged.
    """

    gear: int
    states: np.ndarray
    kappa: np.ndarray
    s: np.ndarray
    steer_ff: np.ndarray

    @classmethod
    def build(cls, gear: int, states: np.ndarray, kappa: np.ndarray, wheelbase: float, window: float = 0.0) -> "Segment":
        states = np.asarray(states, float)
        kappa = np.asarray(kappa, float)
        d = np.hypot(np.diff(states[:, 0]), np.diff(states[:, 1]))
        s = np.concatenate([[0.0], np.cumsum(d)])
        return cls(int(gear), states, kappa, s, _window_average(s, np.arctan(kappa * wheelbase), window))

    @property
    def length(self) -> float:
        return float(self.s[-1])


def _window_average(s: np.ndarray, f: np.ndarray, window: float) -> np.ndarray:
    """Centered moving average of the piecewise-linear f(s), ends held constant."""
    if window <= 0 or len(s) < 2 or s[-1] <= 0:
        return f.copy()
    h = 0.5 * window
    # integral of f with constant extension past both ends
    F = np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(s))])

    def integral(q: np.ndarray) -> np.ndarray:
        inside = np.interp(np.clip(q, s[0], s[-1]), s, F)
        return inside + np.minimum(q - s[0], 0.0) * f[0] + np.maximum(q - s[-1], 0.0) * f[-1]

    return (integral(s + h) - integral(s - h)) / window


def feedforward_window(params: VehicleParams, long_cfg: "LongitudinalConfig") -> float:
    """Arc length over which a full lock-to-lock swing stays within the steering rate at v_max."""
    return 2.0 * params.max_steer * long_cfg.v_max / params.max_steer_rate


def reference_segments(
    params: VehicleParams,
    global_path: GlobalPath | None,
    local_path: LocalPath | None,
    window: float = 0.0,
) -> list[Segment]:
    """Split the concatenated path into constant-gear segments.

    A reverse Hybrid-A* tail and the clothoid maneuver merge into one segment.
    ``window`` is the feedforward averaging length (see :class:`Segment`).
    """
    pieces: list[tuple[int, np.ndarray, np.ndarray]] = []
    l = params.wheelbase_l
    if global_path is not None and len(global_path.gear):
        for gear, states, steer in global_path.segments():
            k = np.tan(np.append(steer, steer[-1])) / l
            pieces.append((gear, states, k))
    if local_path is not None and len(local_path) > 1:
        pieces.append((-1, local_path.states, np.tan(local_path.steer_profile) / l))
    merged: list[tuple[int, np.ndarray, np.ndarray]] = []
    for gear, st, k in pieces:
        if merged and merged[-1][0] == gear:
            g0, st0, k0 = merged[-1]
            merged[-1] = (gear, np.vstack([st0, st[1:]]), np.concatenate([k0[:-1], k]))
        else:
            merged.append((gear, st, k))
    return [Segment.build(g, st, k, l, window) for g, st, k in merged]


def _project(seg: Segment, x: float, y: float, hint: int, window: int) -> tuple[int, float, float, float, float, float]:
    """Closest point on the polyline near ``hint``.

    Returns (index, s, x_ref, y_ref, psi_ref, kappa_ref).
    """
    n = len(seg.states)
    lo = max(0, hint - 2)
    hi = min(n, hint + window)
    pts = seg.states[lo:hi]
    i = lo + int(np.argmin((pts[:, 0] - x) ** 2 + (pts[:, 1] - y) ** 2))
    best = None
    for a in (i - 1, i):
        if a < 0 or a + 1 >= n:
            continue
        p0, p1 = seg.states[a], seg.states[a + 1]
        dx, dy = p1[0] - p0[0], p1[1] - p0[1]
        L2 = dx * dx + dy * dy
        u = 0.0 if L2 == 0 else min(max(((x - p0[0]) * dx + (y - p0[1]) * dy) / L2, 0.0), 1.0)
        px, py = p0[0] + u * dx, p0[1] + u * dy
        d2 = (x - px) ** 2 + (y - py) ** 2
        if best is None or d2 < best[0]:
            psi = p0[2] + u * wrap_angle(p1[2] - p0[2])
            kap = seg.kappa[a] + u * (seg.kappa[a + 1] - seg.kappa[a])
            s = seg.s[a] + u * (seg.s[a + 1] - seg.s[a])
            best = (d2, a, s, px, py, wrap_angle(psi), kap)
    if best is None:
        p = seg.states[i]
        return i, float(seg.s[i]), p[0], p[1], p[2], float(seg.kappa[i])
    _, a, s, px, py, psi, kap = best
    return a, s, px, py, psi, kap


# --- controllers ---------------------------------------------------------


def longitudinal_command(progress_x: float, cfg: LongitudinalConfig) -> float:
    """Desired speed from the remaining distance, saturated at ``v_max``."""
    return min(max(-cfg.nu * progress_x, -cfg.v_max), cfg.v_max)


def powertrain_step(accel: float, accel_cmd: float, ts: float, tau: float) -> float:
    if ts >= tau:
        raise ConfigError("powertrain update needs ts < tau")
    return (1.0 - ts / tau) * accel + (ts / tau) * accel_cmd


def lateral_errors(ref: Pose, actual: Pose) -> tuple[float, float]:
    """(offset of ``actual`` left of the reference, wrapped heading error psi - psi_ref)."""
    dx, dy = actual.x - ref.x, actual.y - ref.y
    d = -math.sin(ref.psi) * dx + math.cos(ref.psi) * dy
    return d, wrap_angle(actual.psi - ref.psi)


def steering_command(
    ref: tuple[Pose, float],
    actual: Pose,
    gains: LateralGains,
    params: VehicleParams,
    prev_delta: float,
    ts: float,
    gear: int = 1,
    speed: float = 0.0,
) -> float:
    """Feedforward curvature steering plus error feedback, clamped and rate-limited.

    Feedback errors are taken so that positive gains correct in both gears:
    ``e_y`` is the path's offset to the left of the vehicle, ``e_psi`` is
    ``gear * (psi_ref - psi)`` (the heading loop changes sign in reverse),
    and ``de_y`` is the kinematic rate of ``e_y``.
    """
    ref_pose, kappa = ref
    target = _steering_target(ref_pose, steering_from_curvature(kappa, params.wheelbase_l), actual, gains, params, gear, speed)
    return _rate_limit(target, prev_delta, params, ts)


def _rate_limit(target: float, prev_delta: float, params: VehicleParams, ts: float) -> float:
    dmax = params.max_steer_rate * ts
    return min(max(target, prev_delta - dmax), prev_delta + dmax)


def _steering_target(ref_pose: Pose, delta_ff: float, actual: Pose, gains: LateralGains, params: VehicleParams, gear: int, speed: float) -> float:
    d, h = lateral_errors(ref_pose, actual)
    e_y = -d
    e_psi = -gear * h
    de_y = -speed * math.sin(h)
    raw = delta_ff + gains.k_y * e_y + gains.k_psi * e_psi + gains.k_d * de_y
    return min(max(raw, -params.max_steer), params.max_steer)


# --- simulation ----------------------------------------------------------


def simulate_tracking(
    segments: list[Segment],
    params: VehicleParams,
    fs: FreeSpace,
    long_cfg: LongitudinalConfig = LongitudinalConfig(),
    gains: LateralGains = LateralGains(),
    dist: DisturbanceConfig = DisturbanceConfig(),
    ts: float = 0.01,
    *,
    initial_delta: float = 0.0,
    max_time: float = 300.0,
    settle_timeout: float = 4.0,
) -> tuple[Trajectory, TrackingMetrics]:
    if not segments or all(len(s.states) < 2 for s in segments):
        raise InvalidInputError("reference path is empty")
    long_cfg.validate(ts)
    rng = np.random.default_rng(dist.seed)
    b = np.array([dist.bound_xy, dist.bound_xy, dist.bound_psi])

    x0, y0, psi0 = segments[0].states[0]
    pose = Pose(x0, y0, psi0)
    v = 0.0
    acc = 0.0
    delta = initial_delta
    prev_err_v = 0.0
    t = 0.0
    rec = {c: [] for c in CSV_COLUMNS}
    collisions = 0
    far_steps = 0
    max_dd = 0.0
    seg_i = 0
    hint = 0
    window = 400

    def record(e_y: float, e_psi: float, gear: int) -> None:
        for name, val in zip(CSV_COLUMNS, (t, pose.x, pose.y, pose.psi, v, delta, e_y, e_psi, gear)):
            rec[name].append(float(val))

    def trajectory() -> Trajectory:
        return Trajectory({c: np.array(vals, dtype=float) for c, vals in rec.items()})

    # the car pauses at the start of every segment until the wheels have
    # turned to the new command (steering at standstill)
    settling = True
    settle_t = 0.0
    n_steps = int(max_time / ts)
    for _ in range(n_steps):
        seg = segments[seg_i]
        idx, s_ref, xr, yr, psir, kr = _project(seg, pose.x, pose.y, hint, window)
        hint = idx
        ref = Pose(xr, yr, psir)
        d, h = lateral_errors(ref, pose)
        record(d, h, seg.gear)
        if not circle_centers_in_free_space(pose, params, fs):
            collisions += 1
        far_steps = far_steps + 1 if abs(d) > 1.0 else 0
        if far_steps >= 100:
            raise TrackingFailureError("lateral error above 1 m for 100 steps", trajectory())

        remaining = seg.length - s_ref
        d_ff = float(np.interp(s_ref, seg.s, seg.steer_ff))
        if settling:
            target = _steering_target(ref, d_ff, pose, gains, params, seg.gear, 0.0)
            settle_t += ts
            if (abs(target - delta) <= 1e-3 and abs(v) <= 0.01) or settle_t >= settle_timeout:
                settling = False
        if remaining <= long_cfg.stop_tol and not settling:
            if seg_i + 1 < len(segments):
                seg_i += 1
                hint = 0
                settling = True
                settle_t = 0.0
                continue
            if abs(v) <= 0.01:
                break
            v_des = 0.0
        elif settling:
            v_des = 0.0
        else:
            mag = max(abs(longitudinal_command(remaining, long_cfg)), long_cfg.v_min)
            v_des = seg.gear * mag
        err_v = v_des - v
        acc_cmd = long_cfg.kp * err_v + long_cfg.kd * (err_v - prev_err_v) / ts
        prev_err_v = err_v
        acc = powertrain_step(acc, acc_cmd, ts, long_cfg.tau)

        new_delta = _rate_limit(_steering_target(ref, d_ff, pose, gains, params, seg.gear, v), delta, params, ts)
        max_dd = max(max_dd, abs(new_delta - delta))
        delta = new_delta

        pose = kinematic_step(pose, v, delta, ts, params.wheelbase_l)
        if b.any():
            w = rng.uniform(-b, b)
            pose = Pose(pose.x + w[0], pose.y + w[1], pose.psi + w[2])
        v = v + ts * acc
        t = t + ts
    else:
        raise TrackingFailureError(f"tracking did not finish within {max_time} s", trajectory())

    traj = trajectory()
    e_y = traj["e_y"]
    e_psi = traj["e_psi"]
    gears = traj["gear"]
    shifts = int(np.count_nonzero(gears[1:] != gears[:-1]))
    metrics = TrackingMetrics(
        rmse_lateral=float(np.sqrt(np.mean(e_y**2))),
        rmse_heading=float(np.sqrt(np.mean(e_psi**2))),
        max_err_lateral=float(np.max(np.abs(e_y))),
        max_err_heading=float(np.max(np.abs(e_psi))),
        gear_shift_count=shifts,
        collisions=collisions,
        final_pose=pose.as_tuple(),
        duration=t,
        max_steer_step=max_dd,
    )
    return traj, metrics
