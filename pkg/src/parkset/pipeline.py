"""Scenario -> reachable sets -> intermediate pose -> paths -> tracking, with file artifacts."""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np

from . import plots
from .clothoid import LocalPath, rollout_parking_path
from .environment import FreeSpace, build_free_space, circle_centers_in_free_space, poses_in_free_space
from .errors import NoFeasibleIntermediateError, NoPathError, TrackingFailureError
from .hybrid_astar import GlobalPath, plan_global
from .model import Pose
from .reachable import ReachableSet, build_grid, cached_reachable_sets
from .scenario import Scenario
from .selection import ranked_intermediates
from .tracking import CSV_COLUMNS, feedforward_window, reference_segments, simulate_tracking

log = logging.getLogger(__name__)

MODES = ("reachset", "plan", "simulate")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_EMPTY_SET = 2
EXIT_NO_PATH = 3
EXIT_TRACKING = 4

GOAL = Pose(0.0, 0.0, 0.0)

# published tracking figures, reported next to ours
PAPER_TARGETS = {
    7.0: {"rmse_lateral": 0.02, "rmse_heading": 0.006, "max_err_lateral": 0.26, "max_err_heading": 0.05},
    6.0: {"rmse_lateral": 0.06, "rmse_heading": 0.01, "max_err_lateral": 0.3, "max_err_heading": 0.17},
}


@dataclass
class PlanResult:
    intermediate: Pose
    intermediate_index: tuple[int, int, int]
    cost: float
    candidate_rank: int
    global_path: GlobalPath
    local_path: LocalPath
    local_from: str  # "astar_end" or "grid_pose"

    @property
    def gears(self) -> np.ndarray:
        return np.concatenate([self.global_path.gear, -np.ones(len(self.local_path) - 1, dtype=int)])

    @property
    def gear_shift_count(self) -> int:
        g = self.gears
        return int(np.count_nonzero(g[1:] != g[:-1])) if len(g) > 1 else 0

    def collision_free(self, params, fs: FreeSpace) -> bool:
        st = np.vstack([self.global_path.states, self.local_path.states])
        return bool(poses_in_free_space(st[:, 0], st[:, 1], st[:, 2], params, fs).all())


@dataclass
class RunResult:
    status: int
    message: str = ""
    artifacts: dict[str, str] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)


def _version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:  # pragma: no cover
        return "0+unknown"


def _relative(p: str, root: Path) -> str:
    try:
        return str(Path(p).resolve().relative_to(root.resolve()))
    except ValueError:
        return str(p)


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"not serializable: {type(o)}")


def _write_path_csv(path: Path, states: np.ndarray, gear: np.ndarray, steer: np.ndarray) -> None:
    # per-state rows; the command applied from a state is on its row, the last row repeats
    n = len(states)
    g = np.append(gear, gear[-1] if len(gear) else 0)[:n]
    d = np.append(steer, steer[-1] if len(steer) else 0.0)[:n]
    with open(path, "w", newline="\n") as fh:
        fh.write("x,y,psi,gear,delta\n")
        for (x, y, p), gi, di in zip(states, g, d):
            fh.write("%.9g,%.9g,%.9g,%d,%.9g\n" % (x, y, p, gi, di))


def plan_paths(scn: Scenario, fs: FreeSpace, s_cfr: ReachableSet) -> PlanResult:
    """Pick the best intermediate pose that Hybrid-A* can reach and build both paths.

    Candidates are tried in cost order (at most ``scn.top_k``). The clothoid
    maneuver is rolled from where Hybrid-A* actually stopped; if that misses
    the goal or collides it is rolled from the grid pose itself, which is a
    member of S_cfr and therefore succeeds.
    """
    params = scn.vehicle
    candidates = ranked_intermediates(s_cfr, scn.start_pose, GOAL, scn.weights, limit=scn.top_k)
    failures = []
    for rank, (idx, inter, j) in enumerate(candidates):
        try:
            gp = plan_global(scn.start_pose, inter, fs, params, scn.search)
        except NoPathError as e:
            log.info("candidate %d %s: %s", rank, inter.as_tuple(), e)
            failures.append(e.stats)
            continue
        lp = rollout_parking_path(gp.end, params, fs, scn.clothoid, scn.ts, sticky_collision=scn.sticky_collision)
        source = "astar_end"
        if not (lp.reached_goal and lp.collision_free):
            lp = rollout_parking_path(inter, params, fs, scn.clothoid, scn.ts, sticky_collision=scn.sticky_collision)
            source = "grid_pose"
        return PlanResult(inter, idx, j, rank, gp, lp, source)
    raise NoPathError(f"Hybrid-A* failed for the {len(candidates)} best intermediate poses", {"attempts": failures})


def run_pipeline(scn: Scenario, mode: str, out_dir: Path, cache_dir: Path | None = None) -> RunResult:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cache_dir = Path(cache_dir) if cache_dir is not None else out
    params, lot = scn.vehicle, scn.lot
    res = RunResult(EXIT_OK)
    art = res.artifacts

    def finish() -> RunResult:
        meta = {
            "schema": "parkset.run/1",
            "mode": mode,
            "status": res.status,
            "message": res.message,
            "scenario_sha256": scn.digest(),
            "scenario": scn.to_dict(),
            "version": _version(),
            "artifacts": {k: _relative(v, out) for k, v in sorted(art.items())},
        }
        _write_json(out / "run_meta.json", meta)
        art["run_meta"] = str(out / "run_meta.json")
        return res

    # --- reachable sets
    fs = build_free_space(lot, params)
    spec = build_grid(lot, params, scn.grid_counts)
    s_r, s_cfr, cache_path, hit = cached_reachable_sets(
        cache_dir, lot, params, fs, scn.clothoid, spec, scn.ts, sticky_collision=scn.sticky_collision
    )
    art["reachset_cache"] = str(cache_path)
    art["reachset_xy_svg"] = str(plots.reachable_sets_2d(out / "reachset_xy.svg", s_r, s_cfr, lot, params))
    art["reachset_3d_svg"] = str(plots.reachable_sets_3d(out / "reachset_3d.svg", s_r, s_cfr))
    res.summary["reachset"] = {
        "grid": list(spec.shape),
        "count_reachable": len(s_r),
        "count_collision_free": len(s_cfr),
        "cache_hit": hit,
    }
    _write_json(out / "reachset.json", res.summary["reachset"])
    art["reachset_json"] = str(out / "reachset.json")
    if len(s_cfr) == 0:
        res.status = EXIT_EMPTY_SET
        res.message = "collision-free reachable set is empty: no intermediate pose can start the reverse maneuver"
        return finish()
    if mode == "reachset":
        return finish()

    # --- plan
    try:
        plan = plan_paths(scn, fs, s_cfr)
    except NoFeasibleIntermediateError as e:  # pragma: no cover - guarded above
        res.status, res.message = EXIT_EMPTY_SET, str(e)
        return finish()
    except NoPathError as e:
        res.status, res.message = EXIT_NO_PATH, str(e)
        res.summary["plan"] = {"error": str(e), "stats": e.stats}
        return finish()
    gp, lp = plan.global_path, plan.local_path
    _write_path_csv(out / "global_path.csv", gp.states, gp.gear, gp.steering)
    _write_path_csv(out / "local_path.csv", lp.states, -np.ones(max(len(lp) - 1, 0), dtype=int), lp.steer_profile[:-1])
    art["global_path_csv"] = str(out / "global_path.csv")
    art["local_path_csv"] = str(out / "local_path.csv")
    art["plan_svg"] = str(plots.plan_figure(out / "plan.svg", lot, params, s_cfr, gp.states, lp.states, plan.intermediate))
    res.summary["plan"] = {
        "intermediate": plan.intermediate.as_tuple(),
        "intermediate_index": list(plan.intermediate_index),
        "cost": plan.cost,
        "candidate_rank": plan.candidate_rank,
        "astar_end": gp.end.as_tuple(),
        "astar_length": gp.length,
        "astar_expansions": gp.expansions,
        "astar_gear_shifts": gp.gear_shift_count,
        "local_from": plan.local_from,
        "local_reached_goal": lp.reached_goal,
        "local_collision_free": lp.collision_free,
        "local_end": lp.end.as_tuple(),
        "gear_shift_count": plan.gear_shift_count,
        "collision_free": plan.collision_free(params, fs),
    }
    _write_json(out / "plan.json", res.summary["plan"])
    art["plan_json"] = str(out / "plan.json")
    if mode == "plan":
        return finish()

    # --- simulate
    segs = reference_segments(params, gp, lp, feedforward_window(params, scn.longitudinal))
    csv_path = out / "trajectory.csv"
    try:
        traj, metrics = simulate_tracking(
            segs, params, fs, scn.longitudinal, scn.gains, scn.disturbance, scn.ts
        )
    except TrackingFailureError as e:
        if e.trajectory is not None and len(e.trajectory):
            e.trajectory.to_csv(csv_path)
            art["trajectory_csv"] = str(csv_path)
        res.status, res.message = EXIT_TRACKING, str(e)
        return finish()
    traj.to_csv(csv_path)
    art["trajectory_csv"] = str(csv_path)
    # figures come from the CSV that was just written
    table = read_trajectory_csv(csv_path)
    ref_xy = np.vstack([s.states for s in segs])
    art["tracking_svg"] = str(plots.tracking_figure(out / "tracking.svg", lot, params, ref_xy, table))
    art["steering_svg"] = str(plots.steering_figure(out / "steering.svg", table, params.max_steer))
    final_ok = circle_centers_in_free_space(Pose(*metrics.final_pose), params, fs)
    m = asdict(metrics)
    m["disturbance_seed"] = scn.disturbance.seed
    m["paper_targets"] = PAPER_TARGETS.get(float(lot.corridor_width_lcw))
    m["final_pose_collision_free"] = final_ok
    res.summary["metrics"] = m
    _write_json(out / "metrics.json", m)
    art["metrics_json"] = str(out / "metrics.json")
    if not final_ok:
        res.status, res.message = EXIT_TRACKING, "final pose is not collision-free"
    return finish()


def read_trajectory_csv(path: Path) -> dict[str, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {c: data[:, i] for i, c in enumerate(CSV_COLUMNS)}

