"""Weighted-cost choice of the intermediate pose among collision-free members."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NoFeasibleIntermediateError
from .model import Pose, wrap_angle
from .reachable import ReachableSet


@dataclass(frozen=True)
class CostWeights:
    """Weights for heading change, start distance, goal distance and preferred heading."""

    alpha1: float = 1.0
    alpha2: float = 0.2
    alpha3: float = 0.2
    alpha4: float = 5.0
    psi_pref: float = 0.0

    def __post_init__(self) -> None:
        alphas = self.alphas
        if not all(math.isfinite(a) and a >= 0 for a in alphas):
            raise ConfigError("cost weights must be finite and non-negative")
        if not any(a > 0 for a in alphas):
            raise ConfigError("at least one cost weight must be positive")
        if not math.isfinite(self.psi_pref):
            raise ConfigError("psi_pref must be finite")

    @property
    def alphas(self) -> tuple[float, float, float, float]:
        return (self.alpha1, self.alpha2, self.alpha3, self.alpha4)

    def scaled(self, lam: float) -> "CostWeights":
        return CostWeights(*(lam * a for a in self.alphas), psi_pref=self.psi_pref)


def angle_gap(a: float, b: float) -> float:
    """|a - b| measured the short way round, in [0, pi]."""
    return abs(wrap_angle(a - b))


def cost_terms(start: Pose, inter: Pose, goal: Pose, psi_pref: float) -> tuple[float, float, float, float]:
    return (
        angle_gap(start.psi, inter.psi),
        math.hypot(start.x - inter.x, start.y - inter.y),
        math.hypot(goal.x - inter.x, goal.y - inter.y),
        angle_gap(psi_pref, inter.psi),
    )


def cost(start: Pose, inter: Pose, goal: Pose, w: CostWeights) -> float:
    terms = cost_terms(start, inter, goal, w.psi_pref)
    return sum(a * t for a, t in zip(w.alphas, terms))


def _wrapped_gap(a: np.ndarray | float, b: np.ndarray | float) -> np.ndarray:
    d = np.mod(np.asarray(a) - b + np.pi, 2 * np.pi) - np.pi
    return np.abs(d)


def member_costs(s: ReachableSet, start: Pose, goal: Pose, w: CostWeights) -> tuple[np.ndarray, np.ndarray]:
    """Costs of all members, returned with their indices in lexicographic order."""
    idx = s.indices()
    poses = s.member_poses()
    x, y, psi = poses[:, 0], poses[:, 1], poses[:, 2]
    j = (
        w.alpha1 * _wrapped_gap(start.psi, psi)
        + w.alpha2 * np.hypot(start.x - x, start.y - y)
        + w.alpha3 * np.hypot(goal.x - x, goal.y - y)
        + w.alpha4 * _wrapped_gap(w.psi_pref, psi)
    )
    return idx, j


TIE_RTOL = 1e-12


def ranked_intermediates(s_cfr: ReachableSet, start: Pose, goal: Pose, w: CostWeights, limit: int | None = None) -> list[tuple[tuple[int, int, int], Pose, float]]:
    """Members sorted by cost, best first.

    Costs within a relative ``TIE_RTOL`` of the minimum count as tied with it
    and the lexicographically first one wins, so rescaling the weights cannot
    change the argmin through rounding alone.
    """
    if len(s_cfr) == 0:
        raise NoFeasibleIntermediateError("collision-free reachable set is empty")
    idx, j = member_costs(s_cfr, start, goal, w)
    best = int(np.argmax(j <= j.min() * (1.0 + TIE_RTOL)))  # first near-minimal index
    order = np.argsort(j, kind="stable")  # idx is already lexicographic
    order = np.concatenate([[best], order[order != best]])
    if limit is not None:
        order = order[:limit]
    out = []
    for o in order:
        key = tuple(int(v) for v in idx[o])
        out.append((key, s_cfr.spec.pose(key), float(j[o])))
    return out


def select_intermediate(s_cfr: ReachableSet, start: Pose, goal: Pose, w: CostWeights) -> Pose:
    return ranked_intermediates(s_cfr, start, goal, w, limit=1)[0][1]
