"""Scenario documents: schema, defaults, validation and trajectory files.

Scenarios are YAML. Every section is optional; anything omitted takes the
documented default and unknown keys are rejected. Internally all lengths
are metres and all angles radians (``angular_threshold_deg`` is accepted as
a convenience on input).
"""

from __future__ import annotations

import enum
import math
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .autocam import AutocamParams, CameraMode
from .camera import CameraModel
from .geometry import TaitBryanAngles
from .safety import HEIGHT_FACTOR, cone_from_scene
from .simulator import ConfigError, LagModel, Setup
from .wirechaser import (
    ControlPoint,
    NoiseSpec,
    RailPath,
    RingGeometry,
    build_sectioned_rail,
    builtin_rail_names,
    builtin_rail_spec,
    perturb,
    rail_from_positions,
    sample_control_points,
)

TRAJECTORY_FORMAT = "endocam-trajectory/1"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class CameraSection(_Section):
    fx: float = Field(500.0, gt=0)
    fy: float = Field(500.0, gt=0)
    cx: float = 320.0
    cy: float = 240.0
    width: int = Field(640, gt=0)
    height: int = Field(480, gt=0)

    @model_validator(mode="after")
    def _principal_point_inside(self):
        if not (0 < self.cx < self.width and 0 < self.cy < self.height):
            raise ValueError("principal point (cx, cy) must lie inside the image")
        return self


class AutocamSection(_Section):
    d_f: float = Field(0.10, gt=0)
    d_wp: float = Field(0.05, gt=0)
    plan_threshold: float = Field(0.05, gt=0)
    waypoint_samples: int = Field(20, ge=4)
    standoff_step: float = Field(0.001, gt=0)
    d_f_min: float = Field(0.05, gt=0)
    d_f_max: float = Field(0.20, gt=0)
    inner_window: float = Field(0.5, gt=0, le=1)
    outer_window: float = Field(0.9, gt=0, le=1)

    @model_validator(mode="after")
    def _ranges(self):
        if not self.d_f_min <= self.d_f <= self.d_f_max:
            raise ValueError("d_f must lie in [d_f_min, d_f_max]")
        if not self.inner_window < self.outer_window:
            raise ValueError("inner_window must be smaller than outer_window")
        return self


class WorkspaceSection(_Section):
    rcm: tuple[float, float, float] = (-0.07, -0.08, 0.475)
    instrument_length: float = Field(0.47, gt=0)
    base_radius: float = Field(0.10, gt=0)
    height_factor: float = Field(HEIGHT_FACTOR, gt=0, le=1)


class RailSection(_Section):
    builtin: Optional[str] = "wire-chaser"
    points: Optional[list[tuple[float, float, float]]] = None
    wire_radius: float = Field(0.001, gt=0)

    @model_validator(mode="before")
    @classmethod
    def _points_replace_builtin(cls, data):
        if isinstance(data, dict) and data.get("points") is not None and "builtin" not in data:
            data = {**data, "builtin": None}
        return data

    @model_validator(mode="after")
    def _one_source(self):
        if (self.builtin is None) == (self.points is None):
            raise ValueError("give exactly one of 'builtin' or 'points'")
        if self.builtin is not None and self.builtin not in builtin_rail_names():
            raise ValueError(f"unknown built-in rail {self.builtin!r}; known: {builtin_rail_names()}")
        if self.points is not None and len(self.points) < 2:
            raise ValueError("a rail needs at least two points")
        return self


class TrajectorySection(_Section):
    control_points: int = Field(36, ge=2)
    # replay a file written by `endocam generate`; noise is not re-applied
    file: Optional[str] = None


class RingSection(_Section):
    major_radius: float = Field(0.006, gt=0)
    tube_radius: float = Field(0.0015, gt=0)

    @model_validator(mode="after")
    def _radii(self):
        if not self.major_radius > self.tube_radius:
            raise ValueError("major_radius must exceed tube_radius")
        return self


class NoiseSection(_Section):
    position_threshold: float = Field(0.0, ge=0)
    angular_threshold: float = Field(0.0, ge=0)

    @model_validator(mode="before")
    @classmethod
    def _degrees(cls, data):
        if isinstance(data, dict) and "angular_threshold_deg" in data:
            data = dict(data)
            if "angular_threshold" in data:
                raise ValueError("give angular_threshold or angular_threshold_deg, not both")
            deg = data.pop("angular_threshold_deg")
            if not isinstance(deg, (int, float)):
                raise ValueError("angular_threshold_deg must be a number")
            data["angular_threshold"] = math.radians(deg)
        return data


class LagSection(_Section):
    max_linear_speed: float = Field(0.10, gt=0)
    max_angular_speed: float = Field(1.5, gt=0)
    dt: float = Field(0.02, gt=0, allow_inf_nan=False)


class TouchSection(_Section):
    min_gap_ticks: int = Field(5, ge=1)


class Scenario(_Section):
    name: str = "scenario"
    mode: CameraMode = CameraMode.NORMAL_FOLLOWING
    seed: int = 0
    duration: float = Field(60.0, gt=0, allow_inf_nan=False)
    camera: CameraSection = Field(default_factory=CameraSection)
    autocam: AutocamSection = Field(default_factory=AutocamSection)
    workspace: WorkspaceSection = Field(default_factory=WorkspaceSection)
    rail: RailSection = Field(default_factory=RailSection)
    trajectory: TrajectorySection = Field(default_factory=TrajectorySection)
    ring: RingSection = Field(default_factory=RingSection)
    noise: NoiseSection = Field(default_factory=NoiseSection)
    lag: LagSection = Field(default_factory=LagSection)
    touch: TouchSection = Field(default_factory=TouchSection)

    # set by load_scenario so relative trajectory paths resolve next to the file
    base_dir: Optional[str] = Field(None, exclude=True)

    # -- builders ---------------------------------------------------------

    def camera_model(self) -> CameraModel:
        return CameraModel(**self.camera.model_dump())

    def autocam_params(self) -> AutocamParams:
        return AutocamParams(**self.autocam.model_dump())

    def noise_spec(self) -> NoiseSpec:
        return NoiseSpec(self.noise.position_threshold, self.noise.angular_threshold, self.seed)

    def lag_model(self) -> LagModel:
        return LagModel(**self.lag.model_dump())

    def ring_geometry(self) -> RingGeometry:
        return RingGeometry(**self.ring.model_dump())

    def wire(self) -> RailPath:
        if self.rail.points is not None:
            return rail_from_positions(self.rail.points, self.rail.wire_radius)
        return build_sectioned_rail(builtin_rail_spec(self.rail.builtin), self.rail.wire_radius)

    def trajectory_path(self) -> Optional[Path]:
        if self.trajectory.file is None:
            return None
        p = Path(self.trajectory.file)
        if not p.is_absolute() and self.base_dir is not None:
            p = Path(self.base_dir) / p
        return p

    def control_points(self, wire: Optional[RailPath] = None) -> list[ControlPoint]:
        """Ring trajectory control points: replayed from file or sampled and perturbed."""
        path = self.trajectory_path()
        if path is not None:
            return read_trajectory(path)
        ideal = sample_control_points(wire if wire is not None else self.wire(), self.trajectory.control_points)
        return perturb(ideal, self.noise_spec())

    def to_setup(self) -> Setup:
        try:
            wire = self.wire()
            trajectory = RailPath(self.control_points(wire), self.rail.wire_radius)
            ws = self.workspace
            cone = cone_from_scene(
                ws.rcm, trajectory.positions[0], ws.instrument_length, ws.base_radius, ws.height_factor
            )
            return Setup(
                mode=self.mode,
                camera=self.camera_model(),
                autocam=self.autocam_params(),
                cone=cone,
                wire=wire,
                trajectory=trajectory,
                ring=self.ring_geometry(),
                lag=self.lag_model(),
                duration=self.duration,
                min_gap_ticks=self.touch.min_gap_ticks,
            )
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def _error_path(err: dict) -> str:
    return ".".join(str(p) for p in err["loc"]) or "<root>"


def parse_scenario(text: str, base_dir: Optional[str] = None) -> Scenario:
    """Parse and validate a YAML scenario, filling every default."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"not valid YAML: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("scenario must be a mapping")
    if "base_dir" in data:
        raise ConfigError("unknown key", "base_dir")
    try:
        scenario = Scenario.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise ConfigError(first["msg"], _error_path(first)) from None
    scenario.base_dir = base_dir
    return scenario


def _plain(obj):
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def serialize_scenario(scenario: Scenario) -> str:
    # python-mode dump keeps infinite speeds (json mode would turn them into null)
    return yaml.safe_dump(_plain(scenario.model_dump()), sort_keys=False)


def preset_names() -> list[str]:
    folder = resources.files("endocam.data").joinpath("presets")
    return sorted(p.name[:-5] for p in folder.iterdir() if p.name.endswith(".yaml"))


def load_scenario(ref: str) -> Scenario:
    """Load a scenario from a file path or a shipped preset name."""
    path = Path(ref)
    if path.is_file():
        return parse_scenario(path.read_text(), base_dir=str(path.resolve().parent))
    if ref in preset_names():
        text = resources.files("endocam.data").joinpath("presets", f"{ref}.yaml").read_text()
        return parse_scenario(text)
    raise ConfigError(f"no such scenario file or preset {ref!r} (presets: {', '.join(preset_names())})")


# -- trajectory files -----------------------------------------------------

def trajectory_document(points: list[ControlPoint], scenario: Optional[Scenario] = None) -> dict:
    doc = {"format": TRAJECTORY_FORMAT}
    if scenario is not None:
        doc["source"] = {
            "scenario": scenario.name,
            "rail": scenario.rail.builtin or "custom",
            "control_points": scenario.trajectory.control_points,
            "seed": scenario.seed,
            "position_threshold": scenario.noise.position_threshold,
            "angular_threshold": scenario.noise.angular_threshold,
        }
    doc["control_points"] = [
        [float(v) for v in cp.position] + [float(v) for v in cp.angles.as_array()] for cp in points
    ]
    return doc


def write_trajectory(path: Path, points: list[ControlPoint], scenario: Optional[Scenario] = None) -> None:
    text = yaml.safe_dump(trajectory_document(points, scenario), sort_keys=False, default_flow_style=None)
    Path(path).write_text(text)


def read_trajectory(path: Path) -> list[ControlPoint]:
    try:
        doc = yaml.safe_load(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read trajectory file {path}: {exc.strerror}", "trajectory.file") from exc
    if not isinstance(doc, dict) or doc.get("format") != TRAJECTORY_FORMAT:
        raise ConfigError(f"{path} is not an {TRAJECTORY_FORMAT} file", "trajectory.file")
    rows = doc.get("control_points") or []
    out = []
    for i, row in enumerate(rows):
        arr = np.asarray(row, dtype=float)
        if arr.shape != (6,) or not np.all(np.isfinite(arr)):
            raise ConfigError(f"{path}: control point {i} must be six finite numbers", "trajectory.file")
        out.append(ControlPoint(arr[:3], TaitBryanAngles(*arr[3:])))
    if len(out) < 2:
        raise ConfigError(f"{path}: need at least two control points", "trajectory.file")
    return out
