"""Classical planners scored with the same loss as the learned policies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGoal, InputError
from .network import NetworkOutput
from .sampling import N_WAYPOINTS, WAYPOINT_SPACING, NavigationInput
from .trainer import SampleLoss, _loss_terms, summarize

KINDS = ("straight_pursuit", "dwa_lite")


@dataclass
class DWAConfig:
    v_samples: int = 5
    omega_samples: int = 11
    horizon_s: float = 2.0
    robot_radius_m: float = 0.3
    clearance_weight: float = 0.2
    goal_weight: float = 1.0
    v_max: float | None = None  # defaults to v_nominal
    omega_max: float = 1.5
    sample_ds: float = 0.02  # arc-length step for collision checks
    clearance_cap: float = 2.0


@dataclass
class BaselineConfig:
    kind: str = "straight_pursuit"
    v_nominal: float = 1.0
    dwa: DWAConfig = field(default_factory=DWAConfig)

    def __post_init__(self):
        if isinstance(self.dwa, dict):
            self.dwa = DWAConfig(**self.dwa)
        if self.kind not in KINDS:
            raise InputError(f"baseline kind must be one of {KINDS}")
        if not self.v_nominal > 0:
            raise InputError("v_nominal must be > 0")
        if self.dwa.v_samples < 3 or self.dwa.omega_samples < 3:
            raise InputError("dwa sample counts must be >= 3")
        if not self.dwa.robot_radius_m > 0:
            raise InputError("robot_radius_m must be > 0")


@dataclass
class PlannerOutput(NetworkOutput):
    blocked: bool = False
    clearance: float = math.inf


def pursuit_curvature(goal) -> float:
    """Curvature of the circle through the origin (heading +x) and ``goal``."""
    x, y = float(goal[0]), float(goal[1])
    d2 = x * x + y * y
    if d2 == 0.0:
        raise DegenerateGoal("goal coincides with the robot position")
    return 2.0 * y / d2


def straight_pursuit_plan(goal, v_nominal: float = 1.0) -> PlannerOutput:
    goal = np.asarray(goal, dtype=np.float64)
    kappa = pursuit_curvature(goal)
    direction = goal / math.hypot(goal[0], goal[1])
    waypoints = np.outer(WAYPOINT_SPACING * np.arange(1, N_WAYPOINTS + 1), direction)
    return PlannerOutput(waypoints, np.array([v_nominal, v_nominal * kappa]))


def arc_points(v: float, omega: float, s_values) -> np.ndarray:
    """Unicycle positions after travelling arc lengths ``s_values`` with constant (v, omega) from the origin."""
    s = np.asarray(s_values, dtype=np.float64)
    if v == 0.0:
        return np.zeros((len(s), 2))
    kappa = omega / v
    if kappa == 0.0:
        return np.stack([s, np.zeros_like(s)], axis=1)
    phi = kappa * s
    return np.stack([np.sin(phi) / kappa, (1.0 - np.cos(phi)) / kappa], axis=1)


def occupied_xy(inp: NavigationInput) -> np.ndarray:
    """Centers (n, 2) of grid columns that contain any occupied voxel."""
    spec = inp.voxels.spec
    xs, ys = spec.cell_centers_xy()
    ii, jj = np.nonzero(inp.voxels.footprint())
    return np.stack([xs[ii], ys[jj]], axis=1)


def _min_distance(path: np.ndarray, obstacles: np.ndarray) -> float:
    if len(obstacles) == 0:
        return math.inf
    best = math.inf
    for start in range(0, len(path), 256):
        chunk = path[start:start + 256]
        d2 = ((chunk[:, None, :] - obstacles[None, :, :]) ** 2).sum(-1)
        best = min(best, float(d2.min()))
    return math.sqrt(best)


def _prefilter(obstacles: np.ndarray, reach: float) -> np.ndarray:
    if len(obstacles) == 0:
        return obstacles
    return obstacles[np.hypot(obstacles[:, 0], obstacles[:, 1]) <= reach]


def dwa_lite_plan(inp: NavigationInput, cfg: BaselineConfig | None = None) -> PlannerOutput:
    """Dynamic-window style search over constant (v, omega) arcs.

    An arc is rejected when any sample along it comes within
    ``robot_radius + cell_radius + ds/2`` of an occupied column center, which
    guarantees the continuous swept disc misses every occupied cell's
    circumscribed circle. Survivors are scored by
    ``-goal_weight * |arc_end - goal| + clearance_weight * min(clearance, cap)``.
    """
    cfg = cfg or BaselineConfig(kind="dwa_lite")
    d = cfg.dwa
    v_max = d.v_max if d.v_max is not None else cfg.v_nominal
    goal = np.asarray(inp.goal, dtype=np.float64)
    cell_r = inp.voxels.spec.voxel * math.sqrt(2) / 2
    margin = d.robot_radius_m + cell_r
    obstacles = _prefilter(occupied_xy(inp), v_max * d.horizon_s + margin + d.clearance_cap + d.sample_ds)

    vs = v_max * np.arange(1, d.v_samples + 1) / d.v_samples
    m = d.omega_samples
    # integer numerators keep the grid exactly sign-symmetric
    omegas = d.omega_max * (2 * np.arange(m) - (m - 1)) / (m - 1)
    turn_pref = -1.0 if goal[1] > 0 else (1.0 if goal[1] < 0 else 0.0)
    best = None
    for v in vs:
        length = v * d.horizon_s
        n = max(2, math.ceil(length / d.sample_ds) + 1)
        s = np.linspace(0.0, length, n)
        ds = length / (n - 1)
        for om in omegas:
            path = arc_points(v, om, s)
            dist = _min_distance(path, obstacles)
            clearance = dist - margin - ds / 2
            if clearance <= 0:
                continue
            score = -d.goal_weight * math.hypot(*(path[-1] - goal)) + d.clearance_weight * min(clearance, d.clearance_cap)
            key = (-score, abs(om), abs(v - cfg.v_nominal), turn_pref * om)
            if best is None or key < best[0]:
                best = (key, v, om, length, clearance)
    if best is None:
        return PlannerOutput(np.zeros((N_WAYPOINTS, 2)), np.zeros(2), blocked=True, clearance=0.0)
    _, v, om, length, clearance = best
    spacing = WAYPOINT_SPACING if length >= WAYPOINT_SPACING * N_WAYPOINTS else length / N_WAYPOINTS
    waypoints = arc_points(v, om, spacing * np.arange(1, N_WAYPOINTS + 1))
    return PlannerOutput(waypoints, np.array([v, om]), blocked=False, clearance=clearance)


def plan(cfg: BaselineConfig, inp: NavigationInput) -> PlannerOutput:
    if cfg.kind == "straight_pursuit":
        return straight_pursuit_plan(inp.goal, cfg.v_nominal)
    return dwa_lite_plan(inp, cfg)


def score_baseline(cfg: BaselineConfig, samples, lam: float = 1.0, epoch: int = 0):
    """Loss breakdown of a baseline over ``samples``; same aggregation as ``trainer.evaluate``."""
    per_sample = []
    for smp in samples:
        out = plan(cfg, smp.input)
        a = smp.action.action
        total, g2, l1, gl1 = _loss_terms(out.waypoints, out.action, smp.plan.waypoints, np.array([a.v, a.omega]), lam)
        per_sample.append(SampleLoss(smp.episode_id, smp.t_index, smp.scenario, float(g2), float(gl1), float(l1), float(total)))
    return summarize(per_sample, epoch=epoch, split=f"baseline:{cfg.kind}")
