import math
from pathlib import Path

import pytest

from parkset.clothoid import ClothoidConfig
from parkset.environment import ParkingLot, Rect, build_free_space
from parkset.model import Pose, VehicleParams
from parkset.reachable import build_grid, compute_reachable_sets

FIXTURES = Path(__file__).parent / "fixtures"

# acceptance verdicts, printed again in the terminal summary
CRITERIA: dict[int, str] = {}


def report(num: int, ok: bool, detail: str) -> str:
    line = f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail}"
    CRITERIA[num] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[num])


def lot_for(cw: float, zone: str = "none") -> ParkingLot:
    far = 4.655 + cw
    zones = {
        "none": (),
        "bottom": (Rect(far - 1.5, -6.0, far, -1.5),),
        "top": (Rect(far - 1.5, 1.5, far, 6.0),),
    }[zone]
    return ParkingLot(corridor_width_lcw=cw, obstacle_zones=zones)


def start_for(cw: float) -> Pose:
    return Pose(4.655 + cw / 2, 4.5, -math.pi / 2)


@pytest.fixture(scope="session")
def params():
    return VehicleParams()


@pytest.fixture(scope="session")
def small_sweep(params):
    """7 m obstacle-free sweep on a coarse grid, shared by the unit tests."""
    lot = lot_for(7.0)
    fs = build_free_space(lot, params)
    spec = build_grid(lot, params, (8, 25, 13))
    res = compute_reachable_sets(spec, params, fs, ClothoidConfig(), 0.01)
    return lot, fs, spec, res
