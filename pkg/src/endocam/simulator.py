"""Discrete-time simulation of the ring, the camera controller and the metrics.

Each tick: move the ring along its scripted trajectory, compute the mode's
camera goal, bridge large goal jumps with a waypoint plan, gate the target
through the cone workspace, move the camera under the lag model, adapt the
stand-off from the tool's image position, and record the tracking errors.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.spatial.transform import Rotation

from .autocam import (
    AutocamParams,
    CameraMode,
    WaypointPlan,
    adjust_standoff,
    goal_orientation,
    goal_position,
    mode_goal,
    plan_waypoints,
    select_normal_sign,
)
from .camera import BehindCamera, CameraModel, project
from .geometry import E_Z, Pose, angle_between
from .safety import ConeWorkspace, cone_contains, gate_goal
from .wirechaser import (
    RailPath,
    RingGeometry,
    count_touches,
    grasp_point,
    ring_pose_at,
    ring_touches_rail,
)

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Invalid scenario; ``path`` names the offending key when known."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


@dataclass(frozen=True)
class LagModel:
    max_linear_speed: float = 0.10
    max_angular_speed: float = 1.5
    dt: float = 0.02

    def __post_init__(self):
        for name in ("max_linear_speed", "max_angular_speed", "dt"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not math.isfinite(self.dt):
            raise ValueError("dt must be finite")

    @classmethod
    def teleport(cls, dt: float = 0.02) -> "LagModel":
        return cls(math.inf, math.inf, dt)


@dataclass(frozen=True)
class MetricsSample:
    t: float
    image_error: float
    centering_error_3d: float
    orientation_error: float
    contact: bool = False
    planning_active: bool = False
    # ring centre behind the image plane; image_error holds the image diagonal
    behind_camera: bool = False


@dataclass(frozen=True)
class RunSummary:
    mean_image_error: float
    mean_3d_error: float
    mean_orientation_error: float
    touch_count: int
    ticks: int


@dataclass(frozen=True)
class Setup:
    """Fully built simulation inputs."""

    mode: CameraMode
    camera: CameraModel
    autocam: AutocamParams
    cone: ConeWorkspace
    wire: RailPath
    trajectory: RailPath
    ring: RingGeometry
    lag: LagModel
    duration: float = 60.0
    min_gap_ticks: int = 5
    world_up: np.ndarray = field(default_factory=lambda: E_Z.copy())

    @property
    def n_ticks(self) -> int:
        return int(round(self.duration / self.lag.dt)) + 1

    def progress(self, tick: int) -> float:
        return min(tick * self.lag.dt / self.duration, 1.0)


@dataclass
class SimState:
    camera: Pose
    d_f: float
    initial_camera: Pose
    held: Pose
    goal_ref: Optional[Pose] = None
    plan: Optional[WaypointPlan] = None
    plan_index: int = 0


def initial_camera_pose(setup: Setup) -> Pose:
    """Normal-following goal for the ring's starting pose."""
    ring = ring_pose_at(setup.trajectory, 0.0)
    n = select_normal_sign(ring.z_axis, setup.world_up)
    return Pose(
        goal_position(ring.position, n, setup.autocam.d_f),
        goal_orientation(n, setup.world_up, previous=np.eye(3)),
    )


def initial_state(setup: Setup) -> SimState:
    cam = initial_camera_pose(setup)
    if not cone_contains(setup.cone, cam.position):
        # the controller stays frozen until a goal enters the cone
        log.warning(
            "initial camera position %s is outside the cone workspace",
            np.round(cam.position, 4).tolist(),
        )
    return SimState(camera=cam, d_f=setup.autocam.d_f, initial_camera=cam, held=cam)


def move_toward(current: Pose, target: Pose, lag: LagModel) -> Pose:
    """One tick of speed-limited motion; rotation follows the geodesic."""
    delta = target.position - current.position
    dist = float(np.linalg.norm(delta))
    max_step = lag.max_linear_speed * lag.dt
    if dist <= max_step:
        position = target.position
    else:
        position = current.position + delta * (max_step / dist)

    rotvec = Rotation.from_matrix(current.orientation.T @ target.orientation).as_rotvec()
    angle = float(np.linalg.norm(rotvec))
    max_angle = lag.max_angular_speed * lag.dt
    if angle <= max_angle:
        orientation = target.orientation
    else:
        orientation = current.orientation @ Rotation.from_rotvec(rotvec * (max_angle / angle)).as_matrix()
    return Pose(position, orientation)


def metrics_sample(
    camera_pose: Pose,
    model: CameraModel,
    ring_pose: Pose,
    ring_normal: np.ndarray,
    t: float = 0.0,
    contact: bool = False,
    planning_active: bool = False,
    world_up: np.ndarray = E_Z,
) -> MetricsSample:
    behind = False
    try:
        image_error = project(camera_pose, model, ring_pose.position).distance_to(model.principal_point)
    except BehindCamera:
        image_error = model.diagonal
        behind = True
    axis = camera_pose.z_axis
    rel = ring_pose.position - camera_pose.position
    centering = float(np.linalg.norm(rel - np.dot(rel, axis) * axis))
    n = select_normal_sign(ring_normal, world_up)
    return MetricsSample(
        t=t,
        image_error=image_error,
        centering_error_3d=centering,
        orientation_error=angle_between(axis, -n),
        contact=contact,
        planning_active=planning_active,
        behind_camera=behind,
    )


def step(state: SimState, setup: Setup, tick: int) -> tuple[SimState, MetricsSample]:
    params = setup.autocam
    up = setup.world_up
    ring = ring_pose_at(setup.trajectory, setup.progress(tick))
    goal = mode_goal(setup.mode, ring, state.initial_camera, state.camera, state.d_f, up)

    plan, idx = state.plan, state.plan_index
    jump = state.goal_ref is not None and np.linalg.norm(goal.position - state.goal_ref.position)
    if setup.mode is not CameraMode.FIXED and plan is None and jump > params.plan_threshold:
        plan = plan_waypoints(state.camera, goal, ring.position, params, up)
        idx = 1
    planning = plan is not None
    # the last leg heads for the live goal rather than the one the plan was built for
    target = goal if not planning or idx == len(plan) - 1 else plan.poses[idx]

    gated = gate_goal(setup.cone, target, state.held)
    held = target if gated is target else state.held
    camera = move_toward(state.camera, gated, setup.lag)

    # relaxed waypoints only need the position; the final goal needs the full pose
    if planning and (
        camera == gated
        or (plan.orientation_relaxed[idx] and np.array_equal(camera.position, gated.position))
    ):
        idx += 1
        if idx >= len(plan):
            plan, idx = None, 0

    d_f = state.d_f
    # the view is deliberately off-centre while a plan runs; adapting d_f then
    # would move the goal and chain further plans
    if setup.mode is not CameraMode.FIXED and not planning:
        try:
            tool = project(camera, setup.camera, grasp_point(ring, setup.ring))
        except BehindCamera:
            tool = None
        d_f = adjust_standoff(
            d_f,
            [tool],
            setup.camera.centered_window(params.inner_window),
            setup.camera.centered_window(params.outer_window),
            params,
        )

    contact = ring_touches_rail(ring, setup.ring, setup.wire)
    sample = metrics_sample(
        camera, setup.camera, ring, ring.z_axis,
        t=tick * setup.lag.dt, contact=contact, planning_active=planning, world_up=up,
    )
    new_state = replace(
        state, camera=camera, d_f=d_f, held=held, goal_ref=goal, plan=plan, plan_index=idx
    )
    return new_state, sample


def summarize(samples: list[MetricsSample], min_gap_ticks: int = 5) -> RunSummary:
    if not samples:
        raise ValueError("no samples to summarize")
    return RunSummary(
        mean_image_error=float(np.mean([s.image_error for s in samples])),
        mean_3d_error=float(np.mean([s.centering_error_3d for s in samples])),
        mean_orientation_error=float(np.mean([s.orientation_error for s in samples])),
        touch_count=count_touches([s.contact for s in samples], min_gap_ticks),
        ticks=len(samples),
    )


def run(setup: Setup, record_poses: bool = False):
    """Simulate every tick; returns ``(samples, summary)``.

    With ``record_poses`` the camera pose of each tick is returned as a
    third element.
    """
    state = initial_state(setup)
    samples = []
    poses = []
    for tick in range(setup.n_ticks):
        state, sample = step(state, setup, tick)
        samples.append(sample)
        if record_poses:
            poses.append(state.camera)
    summary = summarize(samples, setup.min_gap_ticks)
    log.debug("run finished: %s", summary)
    if record_poses:
        return samples, summary, poses
    return samples, summary
