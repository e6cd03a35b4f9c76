"""Normal-following camera goals, waypoint planning and stand-off control.

The camera sits on the upper side of the tracked feature, ``d_f`` metres
along its (sign-selected) normal, looking back at the feature with a
horizon-corrected frame. Large goal jumps are bridged by a lifted,
piecewise-linear path whose intermediate poses keep the feature centred.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .camera import EPS_DEPTH, ImageWindow, PixelPoint
from .geometry import (
    E_Z,
    DegenerateFrame,
    Pose,
    frame_from_z_and_hint,
    frame_from_z_and_up,
    normalize,
)


class CameraMode(str, enum.Enum):
    FIXED = "fixed"
    CENTERING = "centering"
    NORMAL_FOLLOWING = "normal_following"


@dataclass(frozen=True)
class AutocamParams:
    d_f: float = 0.10
    d_wp: float = 0.05
    plan_threshold: float = 0.05
    waypoint_samples: int = 20
    standoff_step: float = 0.001
    d_f_min: float = 0.05
    d_f_max: float = 0.20
    inner_window: float = 0.5
    outer_window: float = 0.9

    def __post_init__(self):
        for name in ("d_f", "d_wp", "plan_threshold", "standoff_step", "d_f_min", "d_f_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.d_f_min <= self.d_f <= self.d_f_max:
            raise ValueError("d_f must lie in [d_f_min, d_f_max]")
        if self.waypoint_samples < 4:
            raise ValueError("waypoint_samples must be at least 4")
        if not 0 < self.inner_window < self.outer_window <= 1:
            raise ValueError("need 0 < inner_window < outer_window <= 1")


@dataclass
class WaypointPlan:
    poses: list[Pose]
    orientation_relaxed: list[bool] = field(default_factory=list)

    def __post_init__(self):
        if not self.poses:
            raise ValueError("a plan needs at least one pose")
        if not self.orientation_relaxed:
            self.orientation_relaxed = [True] * (len(self.poses) - 1) + [False]
        if len(self.orientation_relaxed) != len(self.poses):
            raise ValueError("one relaxation flag per pose")

    def __len__(self):
        return len(self.poses)


def select_normal_sign(n: np.ndarray, world_up: np.ndarray = E_Z) -> np.ndarray:
    # dot == 0 keeps n
    return -n if np.dot(n, world_up) < 0 else n


def goal_position(p_c: np.ndarray, n_oriented: np.ndarray, d_f: float) -> np.ndarray:
    return np.asarray(p_c, dtype=float) + d_f * np.asarray(n_oriented, dtype=float)


def _frame_or_fallback(z_dir, world_up, previous: Optional[np.ndarray]) -> np.ndarray:
    try:
        return frame_from_z_and_up(z_dir, world_up)
    except DegenerateFrame:
        if previous is None:
            raise
        return frame_from_z_and_hint(z_dir, previous[:, 0])


def goal_orientation(
    n_oriented: np.ndarray,
    world_up: np.ndarray = E_Z,
    previous: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Optical axis along ``-n`` with a horizontal x-axis.

    With ``previous`` given, a top-down (degenerate) normal reuses the
    previous x-axis instead of raising :class:`DegenerateFrame`.
    """
    return _frame_or_fallback(-np.asarray(n_oriented, dtype=float), world_up, previous)


def centering_orientation(
    camera_position: np.ndarray,
    p_c: np.ndarray,
    world_up: np.ndarray = E_Z,
    previous: Optional[np.ndarray] = None,
) -> np.ndarray:
    offset = np.asarray(p_c, dtype=float) - np.asarray(camera_position, dtype=float)
    if np.linalg.norm(offset) <= EPS_DEPTH:
        raise DegenerateFrame("camera coincides with the feature")
    return _frame_or_fallback(normalize(offset), world_up, previous)


def waypoint_anchors(current: Pose, goal: Pose, d_wp: float, world_up: np.ndarray = E_Z) -> np.ndarray:
    """The four polyline anchors: current, lifted current, lifted goal, goal."""
    lift = d_wp * np.asarray(world_up, dtype=float)
    return np.array([
        current.position,
        current.position + lift,
        goal.position + lift,
        goal.position,
    ])


def sample_polyline(anchors: np.ndarray, n: int) -> np.ndarray:
    """``n`` points spaced uniformly by arc length, endpoints included."""
    seg = np.linalg.norm(np.diff(anchors, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    targets = np.linspace(0.0, cum[-1], n)
    out = np.empty((n, 3))
    for k in range(3):
        out[:, k] = np.interp(targets, cum, anchors[:, k])
    return out


def plan_waypoints(
    current: Pose,
    goal: Pose,
    p_c: np.ndarray,
    params: AutocamParams,
    world_up: np.ndarray = E_Z,
) -> WaypointPlan:
    anchors = waypoint_anchors(current, goal, params.d_wp, world_up)
    positions = sample_polyline(anchors, params.waypoint_samples)
    poses = [current]
    for p in positions[1:-1]:
        try:
            r = centering_orientation(p, p_c, world_up)
        except DegenerateFrame:
            r = poses[-1].orientation
        poses.append(Pose(p, r))
    poses.append(goal)
    return WaypointPlan(poses, [True] * (len(poses) - 1) + [False])


def adjust_standoff(
    d_f: float,
    tool_pixels: Sequence[Optional[PixelPoint]],
    inner: ImageWindow,
    outer: ImageWindow,
    params: AutocamParams,
) -> float:
    """Step ``d_f`` by one increment to keep every tool between the windows.

    A ``None`` entry stands for a tool that cannot be projected (behind the
    camera) and counts as outside the outer window.
    """
    if any(p is None or not outer.contains(p) for p in tool_pixels):
        d_f = d_f + params.standoff_step
    elif tool_pixels and all(inner.strictly_contains(p) for p in tool_pixels):
        d_f = d_f - params.standoff_step
    return float(np.clip(d_f, params.d_f_min, params.d_f_max))


def mode_goal(
    mode: CameraMode,
    ring_pose: Pose,
    initial_camera_pose: Pose,
    current_camera_pose: Pose,
    d_f: float,
    world_up: np.ndarray = E_Z,
) -> Pose:
    """Commanded camera pose for one of the three camera conditions."""
    if mode is CameraMode.FIXED:
        return initial_camera_pose
    if mode is CameraMode.CENTERING:
        position = ring_pose.position - d_f * initial_camera_pose.z_axis
        return Pose(position, initial_camera_pose.orientation)
    n = select_normal_sign(ring_pose.z_axis, world_up)
    return Pose(
        goal_position(ring_pose.position, n, d_f),
        goal_orientation(n, world_up, previous=current_camera_pose.orientation),
    )
