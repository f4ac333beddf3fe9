"""Reachable-set path planning and tracking for reverse vertical parking."""

import warnings

# numba falls back to its workqueue threading layer when TBB is too old
warnings.filterwarnings("ignore", message="The TBB threading layer")

from .clothoid import ClothoidConfig, LocalPath, fit_coeffs, rollout_parking_path  # noqa: E402
from .environment import FreeSpace, ParkingLot, Rect, build_free_space, circle_centers_in_free_space  # noqa: E402
from .hybrid_astar import GlobalPath, SearchConfig, plan_global  # noqa: E402
from .model import Pose, VehicleParams, footprint_circles, kinematic_step, steering_from_curvature  # noqa: E402
from .reachable import GridSpec, ReachableSet, build_grid, compute_reachable_sets  # noqa: E402
from .scenario import Scenario, load_scenario  # noqa: E402
from .selection import CostWeights, select_intermediate  # noqa: E402
from .tracking import (  # noqa: E402
    DisturbanceConfig,
    LateralGains,
    LongitudinalConfig,
    TrackingMetrics,
    simulate_tracking,
)

__all__ = [
    "ClothoidConfig", "CostWeights", "DisturbanceConfig", "FreeSpace", "GlobalPath", "GridSpec",
    "LateralGains", "LocalPath", "LongitudinalConfig", "ParkingLot", "Pose", "ReachableSet", "Rect",
    "Scenario", "SearchConfig", "TrackingMetrics", "VehicleParams", "build_free_space", "build_grid",
    "circle_centers_in_free_space", "compute_reachable_sets", "fit_coeffs", "footprint_circles",
    "kinematic_step", "load_scenario", "plan_global", "rollout_parking_path", "select_intermediate",
    "simulate_tracking", "steering_from_curvature",
]
