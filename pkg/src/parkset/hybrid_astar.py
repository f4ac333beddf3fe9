"""Hybrid-A* search from the start pose to the selected intermediate pose.

Nodes are continuous poses; duplicate detection uses an (x, y, psi) cell
grid. Successors are constant-steering arcs driven forward or in reverse and
integrated with the discrete kinematic model at a fixed arc-length sub-step.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .environment import FreeSpace, poses_in_free_space
from .errors import ConfigError, InvalidInputError, NoPathError
from .model import Pose, VehicleParams, kinematic_step, wrap_angle

FORWARD = 1
REVERSE = -1


@dataclass(frozen=True)
class SearchConfig:
    xy_cell: float = 0.2
    psi_bins: int = 72
    step_arc: float = 0.6
    sub_step: float = 0.05
    steer_samples: int = 5
    steer_fraction: float = 1.0  # of max_steer used by the primitives
    reverse_penalty: float = 1.5
    switch_penalty: float = 4.0
    steer_penalty: float = 0.3
    steer_change_penalty: float = 0.3
    heuristic_weight: float = 1.5
    goal_tol_xy: float = 0.1
    goal_tol_psi: float = 0.05
    max_expansions: int = 60_000
    clearance: float = 0.15  # extra circle radius kept during search; dropped if no path exists

    def __post_init__(self) -> None:
        for name in ("xy_cell", "step_arc", "sub_step", "goal_tol_xy", "goal_tol_psi", "heuristic_weight"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be positive, got {v!r}")
        for name in ("psi_bins", "steer_samples", "max_expansions"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ConfigError(f"{name} must be a positive integer")
        for name in ("switch_penalty", "steer_penalty", "steer_change_penalty"):
            if not getattr(self, name) >= 0:
                raise ConfigError(f"{name} must be non-negative")
        if not self.reverse_penalty >= 1.0:
            # arc cost must never fall below arc length
            raise ConfigError("reverse_penalty must be >= 1")
        if not 0 < self.steer_fraction <= 1:
            raise ConfigError("steer_fraction must lie in (0, 1]")
        if not (math.isfinite(self.clearance) and self.clearance >= 0):
            raise ConfigError("clearance must be non-negative")
        if self.sub_step > self.step_arc:
            raise ConfigError("sub_step must not exceed step_arc")


@dataclass(frozen=True, eq=False)
class GlobalPath:
    """Sampled Hybrid-A* path.

    ``states`` is (N, 3); ``gear[k]`` and ``steering[k]`` drive
    ``states[k] -> states[k + 1]`` over ``step_length[k]`` metres of arc.
    """

    states: np.ndarray
    gear: np.ndarray
    steering: np.ndarray
    step_length: np.ndarray
    cost: float = 0.0
    expansions: int = 0

    @property
    def gear_shift_count(self) -> int:
        g = self.gear
        return int(np.count_nonzero(g[1:] != g[:-1])) if len(g) > 1 else 0

    @property
    def length(self) -> float:
        return float(self.step_length.sum())

    @property
    def end(self) -> Pose:
        return Pose(*self.states[-1])

    def segments(self) -> list[tuple[int, np.ndarray, np.ndarray]]:
        """Split into constant-gear pieces: (gear, states, steering per step)."""
        out = []
        if len(self.gear) == 0:
            return out
        start = 0
        for k in range(1, len(self.gear) + 1):
            if k == len(self.gear) or self.gear[k] != self.gear[start]:
                out.append((int(self.gear[start]), self.states[start : k + 1], self.steering[start:k]))
                start = k
        return out


@dataclass
class _Node:
    x: float
    y: float
    psi: float
    g: float
    gear: int
    steer: float
    parent: int
    traj: np.ndarray  # (m, 3) sub-steps after the parent, ending at this node
    at_goal: bool = False


def _primitive_templates(params: VehicleParams, cfg: SearchConfig) -> list[tuple[int, float, np.ndarray]]:
    n_sub = max(1, int(round(cfg.step_arc / cfg.sub_step)))
    if cfg.steer_samples == 1:
        steers = [0.0]
    else:
        top = cfg.steer_fraction * params.max_steer
        steers = list(np.linspace(-top, top, cfg.steer_samples))
    out = []
    for gear in (FORWARD, REVERSE):
        for d in steers:
            p = Pose(0.0, 0.0, 0.0)
            rows = []
            for _ in range(n_sub):
                p = kinematic_step(p, float(gear), float(d), cfg.sub_step, params.wheelbase_l)
                rows.append((p.x, p.y, p.psi))
            out.append((gear, float(d), np.array(rows)))
    return out


def _flood_distance(target: Pose, fs: FreeSpace, params: VehicleParams, cell: float):
    """8-connected grid distance to the target over cells the rear axle may occupy."""
    ws = fs.workspace
    nx = int(math.ceil((ws.xmax - ws.xmin) / cell)) + 1
    ny = int(math.ceil((ws.ymax - ws.ymin) / cell)) + 1
    cx = ws.xmin + cell * np.arange(nx)
    cy = ws.ymin + cell * np.arange(ny)
    gx, gy = np.meshgrid(cx, cy, indexing="ij")
    # the rear circle center is |rear_offset| from the axle, so the axle keeps
    # at least R - |rear_offset| from every obstacle
    slack = cell * math.sqrt(2.0)
    keep = max(0.0, fs.radius - abs(params.rear_offset) - slack)
    x_lo, x_hi, y_lo, y_hi = fs.inner_bounds
    reach = abs(params.rear_offset) + slack
    blocked = (gx < x_lo - reach) | (gx > x_hi + reach) | (gy < y_lo - reach) | (gy > y_hi + reach)
    for o in fs.obstacles:
        dx = np.maximum(np.maximum(o.xmin - gx, 0.0), gx - o.xmax)
        dy = np.maximum(np.maximum(o.ymin - gy, 0.0), gy - o.ymax)
        blocked |= np.hypot(dx, dy) < keep
    dist = np.full((nx, ny), np.inf)
    ti = min(max(int(round((target.x - ws.xmin) / cell)), 0), nx - 1)
    tj = min(max(int(round((target.y - ws.ymin) / cell)), 0), ny - 1)
    dist[ti, tj] = 0.0
    heap = [(0.0, ti, tj)]
    moves = [(di, dj, cell * math.hypot(di, dj)) for di in (-1, 0, 1) for dj in (-1, 0, 1) if di or dj]
    while heap:
        d, i, j = heapq.heappop(heap)
        if d > dist[i, j]:
            continue
        for di, dj, c in moves:
            a, b = i + di, j + dj
            if 0 <= a < nx and 0 <= b < ny and not blocked[a, b]:
                nd = d + c
                if nd < dist[a, b]:
                    dist[a, b] = nd
                    heapq.heappush(heap, (nd, a, b))

    def lookup(x: float, y: float) -> float:
        i = min(max(int(round((x - ws.xmin) / cell)), 0), nx - 1)
        j = min(max(int(round((y - ws.ymin) / cell)), 0), ny - 1)
        # grid distance overestimates by up to one cell near the query point
        return max(0.0, dist[i, j] - slack)

    return lookup


def _goal_hit(traj: np.ndarray, target: Pose, cfg: SearchConfig) -> int:
    """Index of the first sub-step within goal tolerance, or -1."""
    dxy = np.hypot(traj[:, 0] - target.x, traj[:, 1] - target.y)
    dpsi = np.abs(np.mod(traj[:, 2] - target.psi + np.pi, 2 * np.pi) - np.pi)
    hit = np.flatnonzero((dxy <= cfg.goal_tol_xy) & (dpsi <= cfg.goal_tol_psi))
    return int(hit[0]) if hit.size else -1


def plan_global(start: Pose, target: Pose, fs: FreeSpace, params: VehicleParams, cfg: SearchConfig = SearchConfig()) -> GlobalPath:
    for name, p in (("start", start), ("target", target)):
        if not poses_in_free_space(np.array([p.x]), np.array([p.y]), np.array([p.psi]), params, fs)[0]:
            raise InvalidInputError(f"{name} pose {p.as_tuple()} is not collision-free")

    if math.hypot(start.x - target.x, start.y - target.y) <= cfg.goal_tol_xy and abs(
        wrap_angle(start.psi - target.psi)
    ) <= cfg.goal_tol_psi:
        return GlobalPath(np.array([start.as_tuple()]), np.zeros(0, dtype=int), np.zeros(0), np.zeros(0))

    if cfg.clearance > 0:
        padded = FreeSpace(fs.workspace, fs.obstacles, fs.radius + cfg.clearance)
        ends_ok = poses_in_free_space(
            np.array([start.x, target.x]), np.array([start.y, target.y]), np.array([start.psi, target.psi]), params, padded
        )
        if ends_ok.all():
            try:
                return _search(start, target, padded, params, cfg)
            except NoPathError:
                pass
    return _search(start, target, fs, params, cfg)


def _search(start: Pose, target: Pose, fs: FreeSpace, params: VehicleParams, cfg: SearchConfig) -> GlobalPath:
    templates = _primitive_templates(params, cfg)
    flood = _flood_distance(target, fs, params, cfg.xy_cell)
    r_min = params.wheelbase_l / math.tan(cfg.steer_fraction * params.max_steer)
    psi_res = 2 * math.pi / cfg.psi_bins
    ws = fs.workspace

    def cell_of(x: float, y: float, psi: float) -> tuple[int, int, int]:
        return (
            int(math.floor((x - ws.xmin) / cfg.xy_cell)),
            int(math.floor((y - ws.ymin) / cfg.xy_cell)),
            int(math.floor((psi + math.pi) / psi_res)) % cfg.psi_bins,
        )

    def heuristic(x: float, y: float, psi: float) -> float:
        euclid = math.hypot(x - target.x, y - target.y)
        turn = r_min * abs(wrap_angle(psi - target.psi))
        return max(euclid, flood(x, y), turn)

    nodes = [_Node(start.x, start.y, start.psi, 0.0, 0, 0.0, -1, np.zeros((0, 3)))]
    open_heap = [(cfg.heuristic_weight * heuristic(start.x, start.y, start.psi), 0, 0)]
    seq = 1
    best_g: dict[tuple[int, int, int], float] = {cell_of(start.x, start.y, start.psi): 0.0}
    closed: set[tuple[int, int, int]] = set()
    expansions = 0

    while open_heap:
        _, _, ni = heapq.heappop(open_heap)
        node = nodes[ni]
        if node.at_goal:
            return _reconstruct(nodes, ni, params, cfg, expansions)
        key = cell_of(node.x, node.y, node.psi)
        if key in closed:
            continue
        closed.add(key)
        expansions += 1
        if expansions > cfg.max_expansions:
            break
        c, s = math.cos(node.psi), math.sin(node.psi)
        for gear, steer, tpl in templates:
            traj = np.empty_like(tpl)
            traj[:, 0] = node.x + c * tpl[:, 0] - s * tpl[:, 1]
            traj[:, 1] = node.y + s * tpl[:, 0] + c * tpl[:, 1]
            traj[:, 2] = np.mod(node.psi + tpl[:, 2] + np.pi, 2 * np.pi) - np.pi
            hit = _goal_hit(traj, target, cfg)
            if hit >= 0:
                traj = traj[: hit + 1]
            ok = poses_in_free_space(traj[:, 0], traj[:, 1], traj[:, 2], params, fs)
            if not ok.all():
                continue
            arc = len(traj) * cfg.sub_step
            step_cost = arc * ((cfg.reverse_penalty if gear == REVERSE else 1.0) + cfg.steer_penalty * abs(steer) / params.max_steer)
            if node.parent >= 0:
                if gear != node.gear:
                    step_cost += cfg.switch_penalty
                step_cost += cfg.steer_change_penalty * abs(steer - node.steer) / params.max_steer
            g = node.g + step_cost
            ex, ey, epsi = traj[-1]
            if hit >= 0:
                nodes.append(_Node(ex, ey, epsi, g, gear, steer, ni, traj, at_goal=True))
                heapq.heappush(open_heap, (g, seq, len(nodes) - 1))
                seq += 1
                continue
            k2 = cell_of(ex, ey, epsi)
            if k2 in closed or best_g.get(k2, math.inf) <= g:
                continue
            best_g[k2] = g
            nodes.append(_Node(ex, ey, epsi, g, gear, steer, ni, traj))
            heapq.heappush(open_heap, (g + cfg.heuristic_weight * heuristic(ex, ey, epsi), seq, len(nodes) - 1))
            seq += 1

    raise NoPathError(
        f"hybrid A* found no path after {expansions} expansions",
        {"expansions": expansions, "open": len(open_heap), "generated": len(nodes)},
    )


def _reconstruct(nodes: list[_Node], ni: int, params: VehicleParams, cfg: SearchConfig, expansions: int) -> GlobalPath:
    chain = []
    while ni >= 0:
        chain.append(nodes[ni])
        ni = nodes[ni].parent
    chain.reverse()
    root = chain[0]
    # re-integrate from the root with the recorded controls so the stored
    # states are an exact replay of the kinematic model
    p = Pose(root.x, root.y, root.psi)
    states = [p.as_tuple()]
    gear, steering = [], []
    for node in chain[1:]:
        for _ in range(len(node.traj)):
            p = kinematic_step(p, float(node.gear), node.steer, cfg.sub_step, params.wheelbase_l)
            states.append(p.as_tuple())
            gear.append(node.gear)
            steering.append(node.steer)
    return GlobalPath(
        states=np.array(states),
        gear=np.array(gear, dtype=int),
        steering=np.array(steering),
        step_length=np.full(len(gear), cfg.sub_step),
        cost=chain[-1].g,
        expansions=expansions,
    )
