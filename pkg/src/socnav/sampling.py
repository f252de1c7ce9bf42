"""Turn episodes into supervised (input, global plan, action) samples.

Goals and waypoints are placed by arc length along the future odometry
polyline and expressed in the robot frame at the sample's time step.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .episodes import Episode, Pose2D, VelocityCommand
from .errors import InsufficientFuture
from .voxelizer import DEFAULT_SPEC, GridSpec, VoxelGrid, voxelize

WAYPOINT_SPACING = 0.5
N_WAYPOINTS = 5
GOAL_DISTANCE = WAYPOINT_SPACING * N_WAYPOINTS  # 2.5 m
_LENGTH_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class GlobalPlan:
    waypoints: np.ndarray  # (5, 2), robot frame


@dataclass(frozen=True)
class LocalPlan:
    action: VelocityCommand


@dataclass(frozen=True, eq=False)
class NavigationInput:
    voxels: VoxelGrid
    image: np.ndarray
    goal: np.ndarray  # (2,), robot frame
    history_len: int = 1


@dataclass(frozen=True, eq=False)
class TrainingSample:
    input: NavigationInput
    plan: GlobalPlan
    action: LocalPlan
    episode_id: str
    t_index: int
    scenario: str


def _positions(poses) -> np.ndarray:
    out = []
    for p in poses:
        if isinstance(p, Pose2D):
            out.append((p.x, p.y))
        else:
            out.append((p[0], p[1]))
    return np.asarray(out, dtype=np.float64).reshape(-1, 2)


def _collapse_duplicates(xy: np.ndarray) -> np.ndarray:
    keep = np.ones(len(xy), dtype=bool)
    keep[1:] = np.any(xy[1:] != xy[:-1], axis=1)
    return xy[keep]


def points_at_arclengths(poses, s_values) -> np.ndarray:
    """Linearly interpolate the polyline through pose positions at arc lengths ``s_values``.

    Raises InsufficientFuture if the polyline is shorter than ``max(s_values)``.
    """
    xy = _collapse_duplicates(_positions(poses))
    s_values = np.asarray(s_values, dtype=np.float64)
    if len(xy) < 2:
        raise InsufficientFuture("path has no length")
    seg = np.hypot(*(xy[1:] - xy[:-1]).T)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    need = float(s_values.max())
    if cum[-1] < need - _LENGTH_TOL:
        raise InsufficientFuture(f"path length {cum[-1]:.4f} m < required {need:.4f} m")
    out = np.empty((len(s_values), 2))
    for n, s in enumerate(s_values):
        # first segment whose end reaches s
        k = int(np.searchsorted(cum, s, side="left"))
        if k == 0:
            out[n] = xy[0]
            continue
        k = min(k, len(xy) - 1)
        frac = (s - cum[k - 1]) / seg[k - 1]
        frac = min(max(frac, 0.0), 1.0)
        out[n] = xy[k - 1] + frac * (xy[k] - xy[k - 1])
    return out


def arc_length_resample(poses: Sequence, spacing: float, count: int) -> np.ndarray:
    """Points at arc lengths spacing, 2*spacing, ..., count*spacing along the pose polyline."""
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    if count < 1:
        raise ValueError("count must be >= 1")
    if len(poses) < 2:
        raise InsufficientFuture("need at least two poses")
    return points_at_arclengths(poses, spacing * np.arange(1, count + 1))


def to_robot_frame(p_world, robot: Pose2D) -> np.ndarray:
    """Express world point(s) in the frame of ``robot`` (translate, then rotate by -theta)."""
    p = np.asarray(p_world, dtype=np.float64)
    dx = p[..., 0] - robot.x
    dy = p[..., 1] - robot.y
    c, s = math.cos(robot.theta), math.sin(robot.theta)
    return np.stack([c * dx + s * dy, -s * dx + c * dy], axis=-1)


def from_robot_frame(p_robot, robot: Pose2D) -> np.ndarray:
    p = np.asarray(p_robot, dtype=np.float64)
    c, s = math.cos(robot.theta), math.sin(robot.theta)
    x = c * p[..., 0] - s * p[..., 1] + robot.x
    y = s * p[..., 0] + c * p[..., 1] + robot.y
    return np.stack([x, y], axis=-1)


def _future(ep: Episode, t: int):
    if not 0 <= t < len(ep.frames):
        raise IndexError(f"frame index {t} out of range for episode of {len(ep.frames)} frames")
    return ep.poses[t:]


def extract_goal(ep: Episode, t: int) -> np.ndarray:
    """Point 2.5 m ahead along the future odometry, in the robot frame at ``t``."""
    future = _future(ep, t)
    if len(future) < 2:
        raise InsufficientFuture("no future odometry")
    world = points_at_arclengths(future, [GOAL_DISTANCE])[0]
    return to_robot_frame(world, future[0])


def extract_global_plan(ep: Episode, t: int) -> GlobalPlan:
    future = _future(ep, t)
    world = arc_length_resample(future, WAYPOINT_SPACING, N_WAYPOINTS)
    return GlobalPlan(to_robot_frame(world, future[0]))


def make_sample(ep: Episode, t: int, voxel_spec: GridSpec = DEFAULT_SPEC) -> TrainingSample:
    plan = extract_global_plan(ep, t)
    goal = extract_goal(ep, t)
    frame = ep.frames[t]
    nav = NavigationInput(voxels=voxelize(frame.points, voxel_spec), image=frame.image, goal=goal)
    return TrainingSample(
        input=nav,
        plan=plan,
        action=LocalPlan(frame.action),
        episode_id=ep.id,
        t_index=t,
        scenario=ep.scenario,
    )


def build_dataset(
    eps: Sequence[Episode], stride: int = 1, voxel_spec: GridSpec = DEFAULT_SPEC
) -> tuple[list[TrainingSample], int]:
    """Samples at frames 0, stride, 2*stride, ... of each episode.

    Returns ``(samples, n_skipped)`` where ``n_skipped`` counts strided frames
    without 2.5 m of future path.
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    samples, skipped = [], 0
    for ep in eps:
        for t in range(0, len(ep.frames), stride):
            try:
                samples.append(make_sample(ep, t, voxel_spec))
            except InsufficientFuture:
                skipped += 1
    return samples, skipped
