"""Grid sweep producing the reachable set and the collision-free reachable set."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels as K
from .clothoid import ClothoidConfig
from .environment import FreeSpace, ParkingLot
from .errors import InfeasibleCorridorError, InvalidInputError
from .model import Pose, VehicleParams

REACHABLE = "reachable"
COLLISION_FREE = "collision_free"

DEFAULT_COUNTS = (28, 121, 63)


def axis_values(lo: float, hi: float, n: int) -> np.ndarray:
    """Endpoint-inclusive uniform samples, exactly mirror-symmetric about the midpoint."""
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    m = n - 1
    t = np.array([(2 * i - m) / m for i in range(n)], dtype=np.float64)
    vals = mid + half * t
    vals[0], vals[-1] = lo, hi
    return vals


@dataclass(frozen=True)
class GridSpec:
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float
    psi_lo: float
    psi_hi: float
    n_x: int
    n_y: int
    n_psi: int

    def __post_init__(self) -> None:
        for lo, hi, name in (
            (self.x_lo, self.x_hi, "x"),
            (self.y_lo, self.y_hi, "y"),
            (self.psi_lo, self.psi_hi, "psi"),
        ):
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise InvalidInputError(f"grid {name} bounds must satisfy lo < hi")
        for name in ("n_x", "n_y", "n_psi"):
            if int(getattr(self, name)) < 2:
                raise InvalidInputError(f"{name} must be at least 2")
            object.__setattr__(self, name, int(getattr(self, name)))

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n_x, self.n_y, self.n_psi)

    @property
    def size(self) -> int:
        return self.n_x * self.n_y * self.n_psi

    def xs(self) -> np.ndarray:
        return axis_values(self.x_lo, self.x_hi, self.n_x)

    def ys(self) -> np.ndarray:
        return axis_values(self.y_lo, self.y_hi, self.n_y)

    def psis(self) -> np.ndarray:
        return axis_values(self.psi_lo, self.psi_hi, self.n_psi)

    def pose(self, idx: tuple[int, int, int]) -> Pose:
        i, j, k = idx
        return Pose(float(self.xs()[i]), float(self.ys()[j]), float(self.psis()[k]))


def build_grid(lot: ParkingLot, params: VehicleParams, counts: tuple[int, int, int] = DEFAULT_COUNTS) -> GridSpec:
    mouth = lot.slot_length_lsl - params.rear_overhang_lr
    x_lo = mouth + params.length_vl / 2.0
    x_hi = mouth + lot.corridor_width_lcw - params.length_vl / 2.0
    if x_lo >= x_hi:
        raise InfeasibleCorridorError(
            f"corridor width {lot.corridor_width_lcw} m is not longer than the vehicle ({params.length_vl} m)"
        )
    half = lot.corridor_length_lcl / 2.0
    n_x, n_y, n_psi = counts
    return GridSpec(x_lo, x_hi, -half, half, -math.pi / 2, math.pi / 2, n_x, n_y, n_psi)


@dataclass(frozen=True, eq=False)
class ReachableSet:
    spec: GridSpec
    mask: np.ndarray  # bool, shape spec.shape
    kind: str

    def __post_init__(self) -> None:
        if self.mask.shape != self.spec.shape or self.mask.dtype != np.bool_:
            raise InvalidInputError("mask must be a boolean array matching the grid shape")
        if self.kind not in (REACHABLE, COLLISION_FREE):
            raise InvalidInputError(f"unknown reachable-set kind {self.kind!r}")

    def __len__(self) -> int:
        return int(self.mask.sum())

    def __contains__(self, idx) -> bool:
        i, j, k = idx
        n_x, n_y, n_psi = self.spec.shape
        return 0 <= i < n_x and 0 <= j < n_y and 0 <= k < n_psi and bool(self.mask[i, j, k])

    def indices(self) -> np.ndarray:
        """Member indices (M, 3), lexicographically sorted."""
        return np.argwhere(self.mask)

    def members(self) -> set[tuple[int, int, int]]:
        return {tuple(int(v) for v in row) for row in self.indices()}

    def member_poses(self) -> np.ndarray:
        """(M, 3) array of member poses, in the order of :meth:`indices`."""
        idx = self.indices()
        return np.column_stack(
            [self.spec.xs()[idx[:, 0]], self.spec.ys()[idx[:, 1]], self.spec.psis()[idx[:, 2]]]
        )

    def issubset(self, other: "ReachableSet") -> bool:
        return bool(np.all(other.mask[self.mask]))


@dataclass(frozen=True, eq=False)
class SweepResult:
    reachable: ReachableSet
    collision_free: ReachableSet
    max_steer_step: np.ndarray  # per grid point, unclamped |d delta| per sample


def compute_reachable_sets(
    spec: GridSpec,
    params: VehicleParams,
    fs: FreeSpace,
    cfg: ClothoidConfig,
    ts: float,
    *,
    sticky_collision: bool = True,
) -> SweepResult:
    bounds, obs = fs.kernel_args()
    reach, cfree, dsteer = K.sweep(
        spec.xs(), spec.ys(), spec.psis(),
        params.wheelbase_l, params.max_steer,
        cfg.towing_distance_Lv, cfg.reverse_speed, ts, cfg.eps_y, cfg.eps_psi, cfg.max_steps,
        params.rear_offset, params.front_offset, bounds, obs, fs.radius, sticky_collision,
    )
    shape = spec.shape
    return SweepResult(
        ReachableSet(spec, reach.reshape(shape), REACHABLE),
        ReachableSet(spec, cfree.reshape(shape), COLLISION_FREE),
        dsteer.reshape(shape),
    )


# --- offline cache -------------------------------------------------------

CACHE_MAGIC = b"PARKSET-RSET\x01\n"


def scenario_key(lot: ParkingLot, params: VehicleParams, cfg: ClothoidConfig, spec: GridSpec, ts: float, sticky: bool = True) -> str:
    payload = {
        "lot": dataclasses.asdict(lot),
        "vehicle": dataclasses.asdict(params),
        "clothoid": dataclasses.asdict(cfg),
        "grid": dataclasses.asdict(spec),
        "ts": ts,
        "sticky_collision": sticky,
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def save_cache(path: Path, key: str, result: SweepResult, echo: dict | None = None) -> Path:
    """Write ``header-length (u32 LE) | JSON header | bitset S_r | bitset S_cfr``.

    Bitsets are row-major over (i_x, i_y, i_psi), most significant bit first.
    """
    spec = result.reachable.spec
    header = {
        "key": key,
        "grid": dataclasses.asdict(spec),
        "count_reachable": len(result.reachable),
        "count_collision_free": len(result.collision_free),
        "config": echo or {},
    }
    hb = json.dumps(header, sort_keys=True).encode()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<I", len(hb)))
        fh.write(hb)
        fh.write(np.packbits(result.reachable.mask.ravel()).tobytes())
        fh.write(np.packbits(result.collision_free.mask.ravel()).tobytes())
    return path


def load_cache(path: Path, expected_key: str | None = None) -> tuple[dict, ReachableSet, ReachableSet]:
    data = Path(path).read_bytes()
    if not data.startswith(CACHE_MAGIC):
        raise InvalidInputError(f"{path} is not a reachable-set cache")
    off = len(CACHE_MAGIC)
    (hlen,) = struct.unpack_from("<I", data, off)
    off += 4
    header = json.loads(data[off : off + hlen])
    off += hlen
    if expected_key is not None and header["key"] != expected_key:
        raise InvalidInputError("cache key does not match the scenario")
    spec = GridSpec(**header["grid"])
    nbytes = (spec.size + 7) // 8
    bits = np.frombuffer(data, dtype=np.uint8, count=2 * nbytes, offset=off)
    r = np.unpackbits(bits[:nbytes], count=spec.size).astype(bool).reshape(spec.shape)
    c = np.unpackbits(bits[nbytes:], count=spec.size).astype(bool).reshape(spec.shape)
    return header, ReachableSet(spec, r, REACHABLE), ReachableSet(spec, c, COLLISION_FREE)


def cache_file(cache_dir: Path, key: str) -> Path:
    return Path(cache_dir) / f"rset-{key[:20]}.bin"


def cached_reachable_sets(
    cache_dir: Path | None,
    lot: ParkingLot,
    params: VehicleParams,
    fs: FreeSpace,
    cfg: ClothoidConfig,
    spec: GridSpec,
    ts: float,
    *,
    sticky_collision: bool = True,
) -> tuple[ReachableSet, ReachableSet, Path | None, bool]:
    """Load the sets from ``cache_dir`` or compute and store them.

    Returns (S_r, S_cfr, cache path, hit).
    """
    key = scenario_key(lot, params, cfg, spec, ts, sticky_collision)
    path = cache_file(cache_dir, key) if cache_dir is not None else None
    if path is not None and path.exists():
        _, s_r, s_cfr = load_cache(path, key)
        return s_r, s_cfr, path, True
    res = compute_reachable_sets(spec, params, fs, cfg, ts, sticky_collision=sticky_collision)
    if path is not None:
        save_cache(path, key, res)
    return res.reachable, res.collision_free, path, False
