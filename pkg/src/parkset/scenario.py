"""Scenario files: a versioned JSON document bundling every configuration block.

Minimal document::

    {"schema": "parkset.scenario/1",
     "lot": {"corridor_width_lcw": 7.0},
     "vehicle": {},
     "start_pose": {"x": 8.155, "y": 4.5, "psi": -1.5708}}

Everything left out is filled from the dataclass defaults, and
:meth:`Scenario.to_dict` echoes the fully resolved document.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from .clothoid import ClothoidConfig
from .environment import ParkingLot, Rect, build_free_space, circle_centers_in_free_space
from .errors import InfeasibleCorridorError, ParksetError, ScenarioError
from .hybrid_astar import SearchConfig
from .model import Pose, VehicleParams
from .reachable import DEFAULT_COUNTS, build_grid
from .selection import CostWeights
from .tracking import DisturbanceConfig, LateralGains, LongitudinalConfig

SCHEMA = "parkset.scenario/1"

_BLOCKS = {
    "vehicle": VehicleParams,
    "clothoid": ClothoidConfig,
    "weights": CostWeights,
    "search": SearchConfig,
    "longitudinal": LongitudinalConfig,
    "gains": LateralGains,
    "disturbance": DisturbanceConfig,
}
_TOP_KEYS = {"schema", "name", "lot", "start_pose", "grid_counts", "ts", "sticky_collision", "top_k", *_BLOCKS}


@dataclass(frozen=True)
class Scenario:
    lot: ParkingLot
    vehicle: VehicleParams
    start_pose: Pose
    clothoid: ClothoidConfig = ClothoidConfig()
    grid_counts: tuple[int, int, int] = DEFAULT_COUNTS
    weights: CostWeights = CostWeights()
    search: SearchConfig = SearchConfig()
    longitudinal: LongitudinalConfig = LongitudinalConfig()
    gains: LateralGains = LateralGains()
    disturbance: DisturbanceConfig = DisturbanceConfig()
    ts: float = 0.01
    sticky_collision: bool = True
    top_k: int = 5  # intermediate candidates tried when Hybrid-A* fails
    name: str = field(default="", compare=False)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"schema": SCHEMA, "name": self.name}
        lot = dataclasses.asdict(self.lot)
        lot["obstacle_zones"] = [z.as_list() for z in self.lot.obstacle_zones]
        out["lot"] = lot
        out["start_pose"] = {"x": self.start_pose.x, "y": self.start_pose.y, "psi": self.start_pose.psi}
        for key in _BLOCKS:
            out[key] = dataclasses.asdict(getattr(self, key))
        out["grid_counts"] = list(self.grid_counts)
        out["ts"] = self.ts
        out["sticky_collision"] = self.sticky_collision
        out["top_k"] = self.top_k
        return out

    def digest(self) -> str:
        """sha256 of the canonical resolved document (the name is excluded)."""
        doc = self.to_dict()
        doc.pop("name")
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()

    def with_overrides(self, seed: int | None = None, grid: tuple[int, int, int] | None = None) -> "Scenario":
        scn = self
        if seed is not None:
            scn = dataclasses.replace(scn, disturbance=dataclasses.replace(scn.disturbance, seed=int(seed)))
        if grid is not None:
            scn = dataclasses.replace(scn, grid_counts=_grid_counts(list(grid), "grid_counts"))
            _check_physical(scn)
        return scn


def _number(v: Any, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"expected a number, got {v!r}", where)
    if not math.isfinite(v):
        raise ScenarioError("must be finite", where)
    return v


def _block(cls, raw: Any, where: str):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ScenarioError("expected an object", where)
    names = {f.name for f in dataclasses.fields(cls)}
    for k in raw:
        if k not in names:
            raise ScenarioError(f"unknown field (expected one of {sorted(names)})", f"{where}.{k}")
    kwargs = {}
    for k, v in raw.items():
        ftype = next(f.type for f in dataclasses.fields(cls) if f.name == k)
        if ftype in ("int", int):
            if isinstance(v, bool) or not isinstance(v, int):
                raise ScenarioError(f"expected an integer, got {v!r}", f"{where}.{k}")
            kwargs[k] = v
        else:
            kwargs[k] = _number(v, f"{where}.{k}")
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as e:
        raise ScenarioError(str(e), _blame(where, str(e), names)) from e


def _blame(where: str, msg: str, names) -> str:
    for n in sorted(names, key=len, reverse=True):
        if n in msg:
            return f"{where}.{n}"
    return where


def _lot(raw: Any) -> ParkingLot:
    if not isinstance(raw, dict):
        raise ScenarioError("expected an object", "lot")
    raw = dict(raw)
    zones_raw = raw.pop("obstacle_zones", [])
    if not isinstance(zones_raw, list):
        raise ScenarioError("expected a list of [xmin, ymin, xmax, ymax]", "lot.obstacle_zones")
    zones = []
    for i, z in enumerate(zones_raw):
        where = f"lot.obstacle_zones[{i}]"
        if not isinstance(z, list) or len(z) != 4:
            raise ScenarioError("expected [xmin, ymin, xmax, ymax]", where)
        try:
            zones.append(Rect(*(_number(v, where) for v in z)))
        except ScenarioError:
            raise
        except ValueError as e:
            raise ScenarioError(str(e), where) from e
    base = _block(ParkingLot, raw, "lot")
    return dataclasses.replace(base, obstacle_zones=tuple(zones))


def _pose(raw: Any) -> Pose:
    if isinstance(raw, list) and len(raw) == 3:
        raw = dict(zip(("x", "y", "psi"), raw))
    if not isinstance(raw, dict) or set(raw) != {"x", "y", "psi"}:
        raise ScenarioError("expected {x, y, psi} or [x, y, psi]", "start_pose")
    return Pose(*(_number(raw[k], f"start_pose.{k}") for k in ("x", "y", "psi")))


def _grid_counts(raw: Any, where: str) -> tuple[int, int, int]:
    if not isinstance(raw, list) or len(raw) != 3:
        raise ScenarioError("expected [n_x, n_y, n_psi]", where)
    for i, v in enumerate(raw):
        if isinstance(v, bool) or not isinstance(v, int) or v < 2:
            raise ScenarioError("grid counts must be integers >= 2", f"{where}[{i}]")
    return (int(raw[0]), int(raw[1]), int(raw[2]))


def _check_physical(scn: Scenario) -> None:
    try:
        build_grid(scn.lot, scn.vehicle, scn.grid_counts)
    except InfeasibleCorridorError as e:
        raise ScenarioError(str(e), "lot.corridor_width_lcw") from e
    try:
        fs = build_free_space(scn.lot, scn.vehicle)
    except ParksetError as e:
        m = re.search(r"obstacle_zones\[\d+\]", str(e))
        raise ScenarioError(str(e), f"lot.{m.group(0)}" if m else "lot") from e
    if not circle_centers_in_free_space(scn.start_pose, scn.vehicle, fs):
        raise ScenarioError("start pose is not collision-free", "start_pose")
    try:
        scn.longitudinal.validate(scn.ts)
    except ValueError as e:
        raise ScenarioError(str(e), "longitudinal") from e


def parse_scenario(doc: Any, name: str = "") -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("top level must be an object")
    if doc.get("schema") != SCHEMA:
        raise ScenarioError(f"expected {SCHEMA!r}, got {doc.get('schema')!r}", "schema")
    for k in doc:
        if k not in _TOP_KEYS:
            raise ScenarioError("unknown field", k)
    for k in ("lot", "vehicle", "start_pose"):
        if k not in doc:
            raise ScenarioError("required field missing", k)
    kwargs: dict[str, Any] = {
        "lot": _lot(doc["lot"]),
        "start_pose": _pose(doc["start_pose"]),
        "name": str(doc.get("name") or name),
    }
    for key, cls in _BLOCKS.items():
        kwargs[key] = _block(cls, doc.get(key), key)
    if "grid_counts" in doc:
        kwargs["grid_counts"] = _grid_counts(doc["grid_counts"], "grid_counts")
    if "ts" in doc:
        ts = _number(doc["ts"], "ts")
        if ts <= 0:
            raise ScenarioError("must be positive", "ts")
        kwargs["ts"] = float(ts)
    if "sticky_collision" in doc:
        if not isinstance(doc["sticky_collision"], bool):
            raise ScenarioError("expected true or false", "sticky_collision")
        kwargs["sticky_collision"] = doc["sticky_collision"]
    if "top_k" in doc:
        k = doc["top_k"]
        if isinstance(k, bool) or not isinstance(k, int) or k < 1:
            raise ScenarioError("expected a positive integer", "top_k")
        kwargs["top_k"] = k
    scn = Scenario(**kwargs)
    _check_physical(scn)
    return scn


def bundled_scenarios() -> list[str]:
    root = resources.files("parkset") / "scenarios"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".json"))


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("parkset") / "scenarios" / name))


def load_scenario(path: str | Path) -> Scenario:
    """Read and validate a scenario file.

    A bare file name that does not exist locally is looked up among the
    bundled fixtures.
    """
    p = Path(path)
    if not p.exists() and p.name == str(path) and p.name in bundled_scenarios():
        p = bundled_path(p.name)
    try:
        text = p.read_text()
    except OSError as e:
        raise ScenarioError(f"cannot read {p}: {e.strerror}") from e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from e
    return parse_scenario(doc, name=p.stem)
