"""Compiled inner loops for the clothoid rollout and the grid sweep.

Arithmetic mirrors ``model.kinematic_step`` operation for operation so a
rollout replays through the pure-Python model to rounding level.
"""

from __future__ import annotations

import math

import numba as nb
import numpy as np

HALF_PI = math.pi / 2.0
SINGULAR_TOL = 1e-9

# termination codes
GOAL_LINE = 0
MAX_STEPS = 1
SINGULAR = 2
BAD_HEADING = 3


@nb.njit(cache=True)
def wrap(a):
    if -math.pi < a <= math.pi:
        return a
    w = np.fmod(a + math.pi, 2.0 * math.pi)
    if w <= 0.0:
        w += 2.0 * math.pi
    return w - math.pi


@nb.njit(cache=True)
def point_free(px, py, bounds, obs, radius):
    if not (bounds[0] <= px <= bounds[1] and bounds[2] <= py <= bounds[3]):
        return False
    for k in range(obs.shape[0]):
        dx = max(obs[k, 0] - px, 0.0, px - obs[k, 2])
        dy = max(obs[k, 1] - py, 0.0, py - obs[k, 3])
        if math.hypot(dx, dy) < radius:
            return False
    return True


@nb.njit(cache=True)
def pose_free(x, y, c, s, rear_off, front_off, bounds, obs, radius):
    return point_free(x + rear_off * c, y + rear_off * s, bounds, obs, radius) and point_free(
        x + front_off * c, y + front_off * s, bounds, obs, radius
    )


@nb.njit(cache=True)
def clothoid_curvature(x, y, psi, towing):
    """Curvature at ``x`` of the cubic through (x, y, tan psi) and (-towing, 0, 0).

    Closed form of 2*c2 + 6*c3*x for the clamped fit; returns nan when the
    fit is singular or the heading is unrepresentable.
    """
    if not abs(psi) < HALF_PI:
        return np.nan
    u = x + towing
    if u <= SINGULAR_TOL:
        return np.nan
    t = math.tan(psi)
    return (4.0 * t * u - 6.0 * y) / (u * u)


@nb.njit(cache=True)
def rollout(
    x,
    y,
    psi,
    wheelbase,
    max_steer,
    towing,
    speed,
    ts,
    eps_y,
    eps_psi,
    max_steps,
    rear_off,
    front_off,
    bounds,
    obs,
    radius,
    sticky,
    record,
    states,
    steer,
):
    """Single-reverse-maneuver rollout from one start pose.

    Returns (n_states, reached, collision_free, max_unclamped_dsteer, code).
    When ``record`` is true, ``states[:n]`` and ``steer[:n]`` are filled;
    ``steer[k]`` is the command computed at ``states[k]``.
    """
    v = -speed
    c = math.cos(psi)
    s = math.sin(psi)
    free = pose_free(x, y, c, s, rear_off, front_off, bounds, obs, radius)
    collided = not free
    last_free = free
    max_dd = 0.0
    prev_raw = np.nan
    n = 0
    code = GOAL_LINE
    if record:
        states[0, 0] = x
        states[0, 1] = y
        states[0, 2] = psi
    while x > 0.0:
        if n >= max_steps:
            code = MAX_STEPS
            break
        kappa = clothoid_curvature(x, y, psi, towing)
        if kappa != kappa:
            code = SINGULAR if abs(psi) < HALF_PI else BAD_HEADING
            break
        raw = math.atan(kappa * wheelbase)
        if prev_raw == prev_raw:
            dd = abs(raw - prev_raw)
            if dd > max_dd:
                max_dd = dd
        prev_raw = raw
        delta = min(max(raw, -max_steer), max_steer)
        if record:
            steer[n] = delta
        x = x + ts * v * c
        y = y + ts * v * s
        psi = wrap(psi + ts * (v / wheelbase) * math.tan(delta))
        c = math.cos(psi)
        s = math.sin(psi)
        n += 1
        if record:
            states[n, 0] = x
            states[n, 1] = y
            states[n, 2] = psi
        if sticky:
            if not collided and not pose_free(x, y, c, s, rear_off, front_off, bounds, obs, radius):
                collided = True
        else:
            last_free = pose_free(x, y, c, s, rear_off, front_off, bounds, obs, radius)
    if record:
        # command at the terminal state (held if the fit is no longer defined)
        kappa = clothoid_curvature(x, y, psi, towing)
        if kappa == kappa:
            steer[n] = min(max(math.atan(kappa * wheelbase), -max_steer), max_steer)
        elif n > 0:
            steer[n] = steer[n - 1]
        else:
            steer[n] = 0.0
    reached = code == GOAL_LINE and abs(y) <= eps_y and abs(psi) <= eps_psi
    if sticky:
        cfree = not collided
    else:
        cfree = last_free
    return n + 1, reached, cfree, max_dd, code


@nb.njit(cache=True, parallel=True)
def sweep(
    xs,
    ys,
    psis,
    wheelbase,
    max_steer,
    towing,
    speed,
    ts,
    eps_y,
    eps_psi,
    max_steps,
    rear_off,
    front_off,
    bounds,
    obs,
    radius,
    sticky,
):
    nx, ny, npsi = xs.shape[0], ys.shape[0], psis.shape[0]
    total = nx * ny * npsi
    reach = np.zeros(total, dtype=np.bool_)
    cfree = np.zeros(total, dtype=np.bool_)
    dsteer = np.zeros(total, dtype=np.float64)
    dummy_states = np.empty((1, 3), dtype=np.float64)
    dummy_steer = np.empty(1, dtype=np.float64)
    for flat in nb.prange(total):
        i = flat // (ny * npsi)
        rem = flat - i * ny * npsi
        j = rem // npsi
        k = rem - j * npsi
        _, r, f, dd, _ = rollout(
            xs[i], ys[j], psis[k], wheelbase, max_steer, towing, speed, ts, eps_y, eps_psi,
            max_steps, rear_off, front_off, bounds, obs, radius, sticky, False,
            dummy_states, dummy_steer,
        )
        reach[flat] = r
        cfree[flat] = r and f
        dsteer[flat] = dd
    return reach, cfree, dsteer
