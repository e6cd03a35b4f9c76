"""Vectors, rotation matrices and camera-frame construction.

Conventions
-----------
Vectors are ``numpy`` arrays of shape ``(3,)``; rotations are ``(3, 3)``
arrays whose columns are the x, y and z axes of the attached frame expressed
in world coordinates.

Elemental rotations are right-handed, active rotations about the fixed world
axes::

    Rx(a) = [[1, 0,  0 ], [0, ca, -sa], [0, sa, ca]]
    Ry(b) = [[cb, 0, sb], [0, 1,  0 ], [-sb, 0, cb]]
    Rz(g) = [[cg, -sg, 0], [sg, cg, 0], [0, 0,  1 ]]

and a Tait-Bryan triple composes as ``Rx(alpha) @ Ry(beta) @ Rz(gamma)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

EPS_PARALLEL = 1e-6

E_X = np.array([1.0, 0.0, 0.0])
E_Y = np.array([0.0, 1.0, 0.0])
E_Z = np.array([0.0, 0.0, 1.0])


class DegenerateFrame(ValueError):
    """Optical axis (anti)parallel to the up vector; no horizon is defined."""


def vec3(x) -> np.ndarray:
    v = np.asarray(x, dtype=float).reshape(3)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"non-finite vector {v!r}")
    return v


def normalize(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return v / n


@dataclass(frozen=True)
class TaitBryanAngles:
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        if not all(np.isfinite([self.alpha, self.beta, self.gamma])):
            raise ValueError("Tait-Bryan angles must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma])


@dataclass(frozen=True, eq=False)
class Pose:
    """Rigid transform: position (m) and orientation (columns = frame axes)."""

    position: np.ndarray
    orientation: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        object.__setattr__(self, "position", vec3(self.position))
        r = np.asarray(self.orientation, dtype=float).reshape(3, 3)
        if not is_rotation(r):
            raise ValueError("orientation is not a proper rotation matrix")
        object.__setattr__(self, "orientation", r)

    @property
    def x_axis(self) -> np.ndarray:
        return self.orientation[:, 0]

    @property
    def y_axis(self) -> np.ndarray:
        return self.orientation[:, 1]

    @property
    def z_axis(self) -> np.ndarray:
        return self.orientation[:, 2]

    def to_local(self, p: np.ndarray) -> np.ndarray:
        """World point expressed in this frame."""
        return self.orientation.T @ (np.asarray(p, dtype=float) - self.position)

    def __eq__(self, other):
        if not isinstance(other, Pose):
            return NotImplemented
        return bool(
            np.array_equal(self.position, other.position)
            and np.array_equal(self.orientation, other.orientation)
        )

    def __repr__(self):
        return f"Pose(position={self.position.tolist()}, orientation={self.orientation.tolist()})"


def rot_x(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(b: float) -> np.ndarray:
    c, s = np.cos(b), np.sin(b)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(g: float) -> np.ndarray:
    c, s = np.cos(g), np.sin(g)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_from_tait_bryan(angles: TaitBryanAngles) -> np.ndarray:
    return rot_x(angles.alpha) @ rot_y(angles.beta) @ rot_z(angles.gamma)


def angle_between(u: np.ndarray, v: np.ndarray) -> float:
    """Angle in [0, pi] between two unit vectors.

    Same value as arccos(clip(u.v, -1, 1)) but computed with atan2, which
    keeps full precision for nearly (anti)parallel vectors where arccos
    loses about half the significant digits.
    """
    return float(np.arctan2(np.linalg.norm(np.cross(u, v)), np.dot(u, v)))


def frame_from_z_and_up(z_dir: np.ndarray, world_up: np.ndarray = E_Z) -> np.ndarray:
    """Right-handed frame with z along ``z_dir`` and a horizontal x-axis.

    x = normalize(up x z), y = z x x. Raises :class:`DegenerateFrame` when
    ``z_dir`` is within ``EPS_PARALLEL`` of +/- ``world_up``.
    """
    z = np.asarray(z_dir, dtype=float)
    up = np.asarray(world_up, dtype=float)
    if abs(np.dot(z, up)) >= 1.0 - EPS_PARALLEL:
        raise DegenerateFrame(f"z direction {z.tolist()} is parallel to up {up.tolist()}")
    x = normalize(np.cross(up, z))
    y = np.cross(z, x)
    return np.column_stack([x, y, z])


def frame_from_z_and_hint(z_dir: np.ndarray, x_hint: np.ndarray) -> np.ndarray:
    """Frame with z along ``z_dir`` and x as close as possible to ``x_hint``.

    Used as the horizon fallback when the up vector is unusable: the previous
    x-axis is projected onto the plane orthogonal to the new z-axis.
    """
    z = np.asarray(z_dir, dtype=float)
    x = np.asarray(x_hint, dtype=float) - np.dot(x_hint, z) * z
    if np.linalg.norm(x) < EPS_PARALLEL:
        # hint is along z as well; any perpendicular axis will do
        x = E_X - np.dot(E_X, z) * z
        if np.linalg.norm(x) < EPS_PARALLEL:
            x = E_Y - np.dot(E_Y, z) * z
    x = normalize(x)
    y = np.cross(z, x)
    return np.column_stack([x, y, z])


def rotation_angle(r: np.ndarray) -> float:
    """Geodesic angle of a rotation matrix."""
    return float(Rotation.from_matrix(r).magnitude())


def is_rotation(r: np.ndarray, tol: float = 1e-9) -> bool:
    return bool(
        np.max(np.abs(r.T @ r - np.eye(3))) < tol and abs(np.linalg.det(r) - 1.0) < tol
    )
