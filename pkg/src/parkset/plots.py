"""SVG figures. Output is byte-stable: no timestamps and a fixed id salt."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

from .environment import ParkingLot  # noqa: E402
from .model import VehicleParams  # noqa: E402
from .reachable import ReachableSet  # noqa: E402

_RC = {"svg.hashsalt": "parkset", "svg.fonttype": "path", "path.simplify": False}


def _save(fig, path: Path) -> Path:
    path = Path(path)
    with matplotlib.rc_context(_RC):
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return path


def _draw_lot(ax, lot: ParkingLot, params: VehicleParams) -> None:
    ws = lot.workspace(params)
    mouth = lot.slot_mouth_x(params)
    ax.add_patch(Rectangle((ws.xmin, ws.ymin), ws.xmax - ws.xmin, ws.ymax - ws.ymin, fill=False, lw=1.0, ec="k"))
    half = lot.slot_width_lsw / 2
    back = -params.rear_overhang_lr
    ax.plot([mouth, back, back, mouth], [half, half, -half, -half], "k--", lw=0.8)
    for z in lot.obstacle_zones:
        ax.add_patch(Rectangle((z.xmin, z.ymin), z.xmax - z.xmin, z.ymax - z.ymin, fc="0.6", ec="k", alpha=0.6))
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")


def reachable_sets_2d(path: Path, s_r: ReachableSet, s_cfr: ReachableSet, lot: ParkingLot, params: VehicleParams) -> Path:
    fig, ax = plt.subplots(figsize=(7, 6))
    _draw_lot(ax, lot, params)
    pr = s_r.member_poses()
    pc = s_cfr.member_poses()
    if len(pr):
        ax.scatter(pr[:, 0], pr[:, 1], s=3, c="tab:red", label=f"S_r ({len(pr)})")
    if len(pc):
        ax.scatter(pc[:, 0], pc[:, 1], s=3, c="tab:green", label=f"S_cfr ({len(pc)})")
    ax.legend(loc="upper left", fontsize=8)
    ax.set_title("reachable sets, x-y projection")
    return _save(fig, path)


def reachable_sets_3d(path: Path, s_r: ReachableSet, s_cfr: ReachableSet) -> Path:
    fig = plt.figure(figsize=(7, 6))
    ax = fig.add_subplot(projection="3d")
    for s, colour, label in ((s_r, "tab:red", "S_r"), (s_cfr, "tab:green", "S_cfr")):
        p = s.member_poses()
        if len(p):
            ax.scatter(p[:, 0], p[:, 1], p[:, 2], s=2, c=colour, label=label)
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_zlabel("psi [rad]")
    ax.legend(fontsize=8)
    return _save(fig, path)


def plan_figure(path: Path, lot: ParkingLot, params: VehicleParams, s_cfr: ReachableSet, global_xy: np.ndarray, local_xy: np.ndarray, inter) -> Path:
    fig, ax = plt.subplots(figsize=(7, 6))
    _draw_lot(ax, lot, params)
    pc = s_cfr.member_poses()
    if len(pc):
        ax.scatter(pc[:, 0], pc[:, 1], s=2, c="tab:green", alpha=0.4, label="S_cfr")
    if len(global_xy):
        ax.plot(global_xy[:, 0], global_xy[:, 1], c="tab:blue", lw=1.5, label="Hybrid-A*")
    if len(local_xy):
        ax.plot(local_xy[:, 0], local_xy[:, 1], c="tab:orange", lw=1.5, label="clothoid")
    ax.plot([inter.x], [inter.y], "k*", ms=9, label="intermediate")
    ax.legend(loc="upper left", fontsize=8)
    return _save(fig, path)


def tracking_figure(path: Path, lot: ParkingLot, params: VehicleParams, ref_xy: np.ndarray, traj: dict) -> Path:
    fig, ax = plt.subplots(figsize=(7, 6))
    _draw_lot(ax, lot, params)
    ax.plot(ref_xy[:, 0], ref_xy[:, 1], "k--", lw=1.0, label="reference")
    ax.plot(traj["x"], traj["y"], c="tab:blue", lw=1.2, label="vehicle")
    ax.legend(loc="upper left", fontsize=8)
    return _save(fig, path)


def steering_figure(path: Path, traj: dict, max_steer: float) -> Path:
    fig, (a1, a2) = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    a1.plot(traj["t"], traj["delta"], c="tab:blue")
    a1.axhline(max_steer, c="0.5", lw=0.6, ls=":")
    a1.axhline(-max_steer, c="0.5", lw=0.6, ls=":")
    a1.set_ylabel("steering [rad]")
    a2.plot(traj["t"], traj["v"], c="tab:green")
    a2.set_ylabel("speed [m/s]")
    a2.set_xlabel("t [s]")
    return _save(fig, path)
