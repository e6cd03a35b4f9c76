"""Wire-chaser task: rail geometry, ring trajectories and ring-wire contact.

A :class:`RailPath` is an arc-length parameterised chain of control points.
The same type describes the wire itself (densely sampled) and the scripted
ring trajectory (36 or 71 control points, optionally perturbed).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from typing import Sequence

import numpy as np
import yaml

from .geometry import Pose, TaitBryanAngles, normalize, rot_x, rot_y, rotation_from_tait_bryan, vec3

RING_SAMPLES = 64
TANGENT_STEP = 1e-3
# per-interval resampling around candidate minima of the 64-point search
REFINE_SAMPLES = 33


class OutOfRange(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ControlPoint:
    position: np.ndarray
    angles: TaitBryanAngles

    def __post_init__(self):
        object.__setattr__(self, "position", vec3(self.position))
        if not np.all(np.isfinite(self.angles.as_array())):
            raise ValueError("non-finite control point angles")

    @property
    def rotation(self) -> np.ndarray:
        return rotation_from_tait_bryan(self.angles)

    def as_pose(self) -> Pose:
        return Pose(self.position, self.rotation)

    def __eq__(self, other):
        if not isinstance(other, ControlPoint):
            return NotImplemented
        return np.array_equal(self.position, other.position) and self.angles == other.angles


@dataclass(frozen=True)
class RingGeometry:
    major_radius: float = 0.006
    tube_radius: float = 0.0015

    def __post_init__(self):
        if not self.major_radius > self.tube_radius > 0:
            raise ValueError("need major_radius > tube_radius > 0")


@dataclass(frozen=True)
class NoiseSpec:
    position_threshold: float = 0.0
    angular_threshold: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.position_threshold < 0 or self.angular_threshold < 0:
            raise ValueError("noise thresholds must be non-negative")


class RailPath:
    """Ordered control points joined by straight segments."""

    def __init__(self, points: Sequence[ControlPoint], wire_radius: float = 0.001):
        if len(points) < 2:
            raise ValueError("a rail needs at least two control points")
        if not wire_radius > 0:
            raise ValueError("wire_radius must be positive")
        self.points = tuple(points)
        self.wire_radius = float(wire_radius)
        seg = np.linalg.norm(np.diff(self.positions, axis=0), axis=1)
        if np.any(seg == 0.0):
            raise ValueError("consecutive control points must be distinct")

    def __len__(self):
        return len(self.points)

    @cached_property
    def positions(self) -> np.ndarray:
        p = np.array([cp.position for cp in self.points])
        p.flags.writeable = False
        return p

    @cached_property
    def cumulative_length(self) -> np.ndarray:
        seg = np.linalg.norm(np.diff(self.positions, axis=0), axis=1)
        return np.concatenate([[0.0], np.cumsum(seg)])

    @cached_property
    def rotations(self) -> np.ndarray:
        return np.array([cp.rotation for cp in self.points])

    @property
    def length(self) -> float:
        return float(self.cumulative_length[-1])

    def point_at_length(self, arc: float) -> np.ndarray:
        arc = float(np.clip(arc, 0.0, self.length))
        cum = self.cumulative_length
        return np.array([np.interp(arc, cum, self.positions[:, k]) for k in range(3)])

    def tangent_at_length(self, arc: float, step: float = TANGENT_STEP) -> np.ndarray:
        lo = max(arc - step, 0.0)
        hi = min(arc + step, self.length)
        return normalize(self.point_at_length(hi) - self.point_at_length(lo))


def angles_from_tangent(t: np.ndarray) -> TaitBryanAngles:
    """Angles whose rotation has ``t`` as z-axis and its y-axis tilted upwards.

    The face normal of the ring (z) follows the wire; among the remaining
    roll freedom the ring's +y (where the instrument grasps it) points as
    high as possible.
    """
    t = normalize(np.asarray(t, dtype=float))
    # atan2 rather than arcsin: stays accurate next to gimbal lock (t along x)
    beta = float(np.arctan2(t[0], np.hypot(t[1], t[2])))
    alpha = float(np.arctan2(-t[1], t[2]))
    partial = rot_x(alpha) @ rot_y(beta)
    a_z, b_z = partial[2, 0], partial[2, 1]
    gamma = float(np.arctan2(-a_z, b_z)) if abs(a_z) + abs(b_z) > 1e-12 else 0.0
    return TaitBryanAngles(alpha, beta, gamma)


def rail_from_positions(positions, wire_radius: float = 0.001) -> RailPath:
    """Rail whose control-point orientations follow the polyline tangent."""
    positions = np.asarray(positions, dtype=float)
    shell = RailPath(
        [ControlPoint(p, TaitBryanAngles(0.0, 0.0, 0.0)) for p in positions], wire_radius
    )
    cps = [
        ControlPoint(p, angles_from_tangent(shell.tangent_at_length(arc)))
        for p, arc in zip(positions, shell.cumulative_length)
    ]
    return RailPath(cps, wire_radius)


def sample_control_points(rail: RailPath, n: int) -> list[ControlPoint]:
    """``n`` control points evenly spaced by arc length, oriented along the wire."""
    if n < 2:
        raise ValueError("need at least two control points")
    out = []
    for arc in np.linspace(0.0, rail.length, n):
        out.append(ControlPoint(rail.point_at_length(arc), angles_from_tangent(rail.tangent_at_length(arc))))
    return out


def build_sectioned_rail(layout: dict, wire_radius: float = 0.001) -> RailPath:
    """Dense wire from a start pose and a list of straight / arc sections.

    Heading (azimuth) turns along arcs; the climb angle blends linearly from
    its previous value to each section's ``slope_deg`` so the tangent stays
    continuous.
    """
    step = float(layout.get("step", 0.0005))
    pos = np.array(layout["start"], dtype=float)
    heading = np.radians(layout.get("heading_deg", 0.0))
    slope = np.radians(layout.get("slope_deg", 0.0))
    pts = [pos.copy()]
    for section in layout["sections"]:
        target_slope = np.radians(section.get("slope_deg", np.degrees(slope)))
        if "straight" in section:
            horiz = float(section["straight"])
            turn = 0.0
        else:
            radius = float(section["radius"])
            turn = np.radians(section["turn_deg"])
            horiz = radius * abs(turn)
        n = max(1, int(round(horiz / step)))
        start_slope = slope
        for k in range(1, n + 1):
            frac = (k - 0.5) / n
            h = heading + turn * frac
            sl = start_slope + (target_slope - start_slope) * frac
            dh = horiz / n
            pos = pos + dh * np.array([np.cos(h), np.sin(h), np.tan(sl)])
            pts.append(pos.copy())
        heading += turn
        slope = target_slope
    return rail_from_positions(np.array(pts), wire_radius)


def builtin_rail_spec(name: str) -> dict:
    fname = name.replace("-", "_") + ".yaml"
    try:
        text = resources.files("endocam.data").joinpath("rails", fname).read_text()
    except FileNotFoundError:
        raise KeyError(f"unknown built-in rail {name!r}") from None
    return yaml.safe_load(text)


def builtin_rail_names() -> list[str]:
    folder = resources.files("endocam.data").joinpath("rails")
    return sorted(p.name[:-5].replace("_", "-") for p in folder.iterdir() if p.name.endswith(".yaml"))


def builtin_rail(name: str = "wire-chaser", wire_radius: float = 0.001) -> RailPath:
    return build_sectioned_rail(builtin_rail_spec(name), wire_radius)


def ring_pose_at(rail: RailPath, s: float) -> Pose:
    """Ring pose at normalised arc length ``s``.

    Position is interpolated along the polyline; orientation is held from
    the control point that starts the current segment.
    """
    if not 0.0 <= s <= 1.0:
        raise OutOfRange(f"s={s} outside [0, 1]")
    cum = rail.cumulative_length
    arc = s * cum[-1]
    if s == 1.0 or arc >= cum[-1]:
        return rail.points[-1].as_pose()
    i = int(np.searchsorted(cum, arc, side="right")) - 1
    i = min(max(i, 0), len(cum) - 2)
    frac = (arc - cum[i]) / (cum[i + 1] - cum[i])
    p = rail.positions
    position = p[i] + frac * (p[i + 1] - p[i]) if frac > 0.0 else p[i].copy()
    return Pose(position, rail.rotations[i])


def perturb(points: Sequence[ControlPoint], noise: NoiseSpec) -> list[ControlPoint]:
    """Independent uniform noise on all six variables of each control point."""
    rng = np.random.default_rng(noise.seed)
    unit = rng.uniform(-1.0, 1.0, size=(len(points), 6))
    dpos = noise.position_threshold * unit[:, :3]
    dang = noise.angular_threshold * unit[:, 3:]
    out = []
    for cp, dp, da in zip(points, dpos, dang):
        a = cp.angles
        out.append(
            ControlPoint(
                cp.position + dp,
                TaitBryanAngles(a.alpha + da[0], a.beta + da[1], a.gamma + da[2]),
            )
        )
    return out


def _circle_points(ring_pose: Pose, radius: float, theta: np.ndarray) -> np.ndarray:
    r = ring_pose.orientation
    local = np.stack([np.cos(theta), np.sin(theta)], axis=1) * radius
    return ring_pose.position + local @ r[:, :2].T


def ring_centerline(ring_pose: Pose, ring: RingGeometry, n: int = RING_SAMPLES) -> np.ndarray:
    theta = 2.0 * np.pi * np.arange(n) / n
    return _circle_points(ring_pose, ring.major_radius, theta)


def grasp_point(ring_pose: Pose, ring: RingGeometry) -> np.ndarray:
    """Where the instrument holds the ring: one major radius along local +y."""
    return ring_pose.position + ring.major_radius * ring_pose.y_axis


def point_segment_distances(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distances (P, M) from each of P points to each of M segments a->b."""
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    ap = points[:, None, :] - a[None, :, :]
    t = np.clip(np.einsum("pmk,mk->pm", ap, ab) / denom, 0.0, 1.0)
    closest = a[None, :, :] + t[..., None] * ab[None, :, :]
    return np.linalg.norm(points[:, None, :] - closest, axis=2)


def _coarse_distance(ring_pose: Pose, ring: RingGeometry, rail: RailPath, n_samples: int):
    a = rail.positions[:-1]
    b = rail.positions[1:]
    to_center = point_segment_distances(ring_pose.position[None, :], a, b)[0]
    # segments further than the nearest one by more than a diameter cannot win
    keep = to_center <= to_center.min() + 2.0 * ring.major_radius
    a, b = a[keep], b[keep]
    theta = 2.0 * np.pi * np.arange(n_samples) / n_samples
    coarse = point_segment_distances(_circle_points(ring_pose, ring.major_radius, theta), a, b).min(axis=1)
    return coarse, theta, a, b


def _refined_distance(ring_pose, ring, coarse, theta, a, b, refine: int) -> float:
    step = 2.0 * np.pi / len(theta)
    margin = ring.major_radius * step / 2.0
    dmin = coarse.min()
    centres = theta[coarse <= dmin + margin]
    fine = (centres[:, None] + np.linspace(-step / 2.0, step / 2.0, refine)[None, :]).ravel()
    pts = _circle_points(ring_pose, ring.major_radius, fine)
    # a segment further than dmin + margin from every candidate cannot hold the minimum
    near = point_segment_distances(_circle_points(ring_pose, ring.major_radius, centres), a, b).min(axis=0)
    sel = near <= dmin + margin
    return float(min(dmin, point_segment_distances(pts, a[sel], b[sel]).min()))


def ring_rail_clearance(
    ring_pose: Pose,
    ring: RingGeometry,
    rail: RailPath,
    n_samples: int = RING_SAMPLES,
    refine: int = REFINE_SAMPLES,
) -> float:
    """Signed gap between ring tube and wire surfaces; <= 0 means contact.

    The ring centreline is sampled at ``n_samples`` uniform angles. With
    ``refine`` > 0 every sample that could still neighbour the true minimum
    is re-sampled ``refine`` times across its own interval: the distance
    changes by at most R per radian along the circle, so only samples within
    R * step / 2 of the coarse minimum qualify.
    """
    coarse, theta, a, b = _coarse_distance(ring_pose, ring, rail, n_samples)
    dmin = _refined_distance(ring_pose, ring, coarse, theta, a, b, refine) if refine > 0 else float(coarse.min())
    return dmin - (ring.tube_radius + rail.wire_radius)


def ring_touches_rail(ring_pose: Pose, ring: RingGeometry, rail: RailPath) -> bool:
    """``ring_rail_clearance(...) <= 0`` without refining when the sign is already certain."""
    coarse, theta, a, b = _coarse_distance(ring_pose, ring, rail, RING_SAMPLES)
    contact = ring.tube_radius + rail.wire_radius
    margin = ring.major_radius * np.pi / RING_SAMPLES
    dmin = float(coarse.min())
    if dmin <= contact:
        return True
    if dmin - margin > contact:
        return False
    return _refined_distance(ring_pose, ring, coarse, theta, a, b, REFINE_SAMPLES) <= contact


def count_touches(contact_flags: Sequence[bool], min_gap_ticks: int = 5) -> int:
    """Contact runs, merging runs separated by fewer than ``min_gap_ticks`` clear ticks."""
    if min_gap_ticks < 1:
        raise ValueError("min_gap_ticks must be >= 1")
    count = 0
    in_event = False
    gap = 0
    for flag in contact_flags:
        if flag:
            if not in_event:
                count += 1
                in_event = True
            gap = 0
        elif in_event:
            gap += 1
            if gap >= min_gap_ticks:
                in_event = False
    return count
