"""Pinhole camera: projection, principal point and image windows."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Pose

EPS_DEPTH = 1e-6


class BehindCamera(ValueError):
    pass


@dataclass(frozen=True)
class CameraModel:
    fx: float = 500.0
    fy: float = 500.0
    cx: float = 320.0
    cy: float = 240.0
    width: int = 640
    height: int = 480

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")
        if not (self.width > 0 and self.height > 0):
            raise ValueError("image size must be positive")
        if not (0 < self.cx < self.width and 0 < self.cy < self.height):
            raise ValueError("principal point must lie inside the image")

    @property
    def principal_point(self) -> "PixelPoint":
        return PixelPoint(self.cx, self.cy)

    @property
    def diagonal(self) -> float:
        return float(np.hypot(self.width, self.height))

    def centered_window(self, fraction: float) -> "ImageWindow":
        """Rectangle centred in the image covering ``fraction`` of each dimension."""
        half_w = 0.5 * fraction * self.width
        half_h = 0.5 * fraction * self.height
        mid_u, mid_v = 0.5 * self.width, 0.5 * self.height
        return ImageWindow(mid_u - half_w, mid_v - half_h, mid_u + half_w, mid_v + half_h)


@dataclass(frozen=True)
class PixelPoint:
    u: float
    v: float

    def distance_to(self, other: "PixelPoint") -> float:
        return float(np.hypot(self.u - other.u, self.v - other.v))


@dataclass(frozen=True)
class ImageWindow:
    u_min: float
    v_min: float
    u_max: float
    v_max: float

    def __post_init__(self):
        if not (self.u_min < self.u_max and self.v_min < self.v_max):
            raise ValueError(f"empty window {self}")

    def contains(self, p: PixelPoint) -> bool:
        return in_window(p, self)

    def strictly_contains(self, p: PixelPoint) -> bool:
        return self.u_min < p.u < self.u_max and self.v_min < p.v < self.v_max

    def encloses(self, other: "ImageWindow") -> bool:
        return (
            self.u_min < other.u_min
            and self.v_min < other.v_min
            and other.u_max < self.u_max
            and other.v_max < self.v_max
        )


def project(camera_pose: Pose, model: CameraModel, point) -> PixelPoint:
    """Pinhole projection; the optical axis is the third column of the pose."""
    x, y, z = camera_pose.to_local(point)
    if z <= EPS_DEPTH:
        raise BehindCamera(f"point at depth {z:.3g} m is not in front of the camera")
    return PixelPoint(model.fx * x / z + model.cx, model.fy * y / z + model.cy)


def in_window(p: PixelPoint, w: ImageWindow) -> bool:
    return w.u_min <= p.u <= w.u_max and w.v_min <= p.v <= w.v_max
