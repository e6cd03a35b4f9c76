"""Conical workspace around the remote center of motion."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Pose, vec3

HEIGHT_FACTOR = 0.95


class CoincidentPoints(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ConeWorkspace:
    """Solid cone with its tip at the RCM, tapering linearly to ``base_radius``."""

    apex: np.ndarray
    axis: np.ndarray
    height: float
    base_radius: float

    def __post_init__(self):
        apex = vec3(self.apex)
        axis = vec3(self.axis)
        if abs(np.linalg.norm(axis) - 1.0) > 1e-9:
            raise ValueError("cone axis must be a unit vector")
        if not (self.height > 0 and self.base_radius > 0):
            raise ValueError("cone height and radius must be positive")
        apex.flags.writeable = False
        axis.flags.writeable = False
        object.__setattr__(self, "apex", apex)
        object.__setattr__(self, "axis", axis)

    def contains(self, p) -> bool:
        return cone_contains(self, p)


def cone_from_scene(
    rcm,
    initial_feature,
    instrument_length: float,
    base_radius: float = 0.10,
    height_factor: float = HEIGHT_FACTOR,
) -> ConeWorkspace:
    rcm = vec3(rcm)
    offset = vec3(initial_feature) - rcm
    dist = np.linalg.norm(offset)
    if dist < 1e-9:
        raise CoincidentPoints("initial feature coincides with the RCM")
    if instrument_length <= 0:
        raise ValueError("instrument_length must be positive")
    return ConeWorkspace(rcm, offset / dist, height_factor * instrument_length, base_radius)


def cone_contains(cone: ConeWorkspace, p) -> bool:
    rel = np.asarray(p, dtype=float) - cone.apex
    h = float(np.dot(rel, cone.axis))
    if h < 0.0 or h > cone.height:
        return False
    radial = np.linalg.norm(rel - h * cone.axis)
    return bool(radial <= cone.base_radius * (h / cone.height))


def gate_goal(cone: ConeWorkspace, commanded: Pose, held: Pose) -> Pose:
    """Pass ``commanded`` through if inside the cone, else keep ``held``."""
    return commanded if cone_contains(cone, commanded.position) else held
