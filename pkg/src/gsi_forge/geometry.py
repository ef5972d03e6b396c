"""3D math core: rotations, oriented boxes, and pinhole projection.

Conventions (fixed for the whole engine):
  - World frame: +z up, meters.
  - Camera frame: +x right, +y down, +z forward.
  - A camera is (rotation, translation) mapping world -> camera:
    p_cam = R @ p_world + t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BehindCamera, InvalidMargin

_ORTHO_TOL = 1e-6
_NEAR_Z = 1e-6
_AXIS_DEGENERATE = 1e-9
_TOUCH_TOL = 1e-9


def _as_vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.shape != (3,):
        raise ValueError(f"expected 3-vector, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class Rotation:
    """Proper rotation stored as a 3x3 matrix (orthonormal, det +1)."""

    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {m.shape}")
        if not np.allclose(m.T @ m, np.eye(3), atol=_ORTHO_TOL):
            raise ValueError("rotation matrix is not orthonormal")
        if abs(np.linalg.det(m) - 1.0) > _ORTHO_TOL:
            raise ValueError("rotation matrix determinant is not +1")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "m", m)

    @staticmethod
    def identity() -> Rotation:
        return Rotation(np.eye(3))

    @staticmethod
    def about_x(angle: float) -> Rotation:
        c, s = math.cos(angle), math.sin(angle)
        return Rotation(np.array([[1, 0, 0], [0, c, -s], [0, s, c]], dtype=float))

    @staticmethod
    def about_y(angle: float) -> Rotation:
        c, s = math.cos(angle), math.sin(angle)
        return Rotation(np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]], dtype=float))

    @staticmethod
    def about_z(angle: float) -> Rotation:
        c, s = math.cos(angle), math.sin(angle)
        return Rotation(np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]], dtype=float))

    @staticmethod
    def from_axis_angle(axis, angle: float) -> Rotation:
        """Rodrigues formula; axis need not be unit length."""
        a = _as_vec3(axis)
        n = np.linalg.norm(a)
        if n < _AXIS_DEGENERATE:
            return Rotation.identity()
        a = a / n
        k = np.array(
            [[0, -a[2], a[1]], [a[2], 0, -a[0]], [-a[1], a[0], 0]], dtype=float
        )
        m = np.eye(3) + math.sin(angle) * k + (1 - math.cos(angle)) * (k @ k)
        return Rotation(m)

    @staticmethod
    def from_quaternion(q) -> Rotation:
        """Quaternion (w, x, y, z), any nonzero norm."""
        w, x, y, z = np.asarray(q, dtype=float) / np.linalg.norm(q)
        m = np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
                [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
                [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
            ]
        )
        return Rotation(m)

    @staticmethod
    def random(rng: np.random.Generator) -> Rotation:
        """Uniform random rotation via normalized quaternion sampling."""
        q = rng.normal(size=4)
        return Rotation.from_quaternion(q)

    def to_quaternion(self) -> np.ndarray:
        """Unit quaternion (w, x, y, z) with w >= 0."""
        m = self.m
        t = np.trace(m)
        if t > 0:
            s = math.sqrt(t + 1.0) * 2
            q = np.array(
                [0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s,
                 (m[1, 0] - m[0, 1]) / s]
            )
        elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
            s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2
            q = np.array(
                [(m[2, 1] - m[1, 2]) / s, 0.25 * s, (m[0, 1] + m[1, 0]) / s,
                 (m[0, 2] + m[2, 0]) / s]
            )
        elif m[1, 1] > m[2, 2]:
            s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2
            q = np.array(
                [(m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, 0.25 * s,
                 (m[1, 2] + m[2, 1]) / s]
            )
        else:
            s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2
            q = np.array(
                [(m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s,
                 (m[1, 2] + m[2, 1]) / s, 0.25 * s]
            )
        return q if q[0] >= 0 else -q

    def compose(self, other: Rotation) -> Rotation:
        return Rotation(self.m @ other.m)

    def inverse(self) -> Rotation:
        return Rotation(self.m.T)

    def apply(self, v) -> np.ndarray:
        return self.m @ _as_vec3(v)


def geodesic_distance(a: Rotation, b: Rotation) -> float:
    """Arc length between two rotations on SO(3), in [0, pi].

    arccos((trace(a^T b) - 1) / 2), with the argument clamped so round-off
    near 0 and pi never produces NaN.
    """
    c = (np.trace(a.m.T @ b.m) - 1.0) / 2.0
    return math.acos(min(1.0, max(-1.0, c)))


@dataclass(frozen=True)
class Obb:
    """Oriented box: center, strictly positive half-extents, rotation."""

    center: np.ndarray
    half_extents: np.ndarray
    rotation: Rotation = field(default_factory=Rotation.identity)

    def __post_init__(self):
        c = _as_vec3(self.center)
        h = _as_vec3(self.half_extents)
        if not np.all(h > 0):
            raise ValueError("half_extents must be strictly positive")
        c.flags.writeable = False
        h.flags.writeable = False
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "half_extents", h)

    def corners(self) -> np.ndarray:
        """All 8 corners, shape (8, 3), world frame."""
        signs = np.array(
            [[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)],
            dtype=float,
        )
        return self.center + (signs * self.half_extents) @ self.rotation.m.T

    def axes(self) -> np.ndarray:
        """Local unit axes as columns of the rotation matrix, shape (3, 3)."""
        return self.rotation.m

    def extent_along(self, direction) -> float:
        """Half-width of the box projected onto a unit direction."""
        d = _as_vec3(direction)
        return float(np.abs(d @ self.rotation.m) @ self.half_extents)

    def contains_point(self, p, tol: float = 0.0) -> bool:
        local = self.rotation.m.T @ (_as_vec3(p) - self.center)
        return bool(np.all(np.abs(local) <= self.half_extents + tol))

    def bottom_z(self) -> float:
        return float(self.center[2]) - self.extent_along((0.0, 0.0, 1.0))

    def top_z(self) -> float:
        return float(self.center[2]) + self.extent_along((0.0, 0.0, 1.0))


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole intrinsics in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")


def project_point(
    p, cam_rotation: Rotation, cam_translation, k: Intrinsics
) -> tuple[np.ndarray, float]:
    """Project a world point; returns (pixel xy, camera-frame depth).

    Raises BehindCamera when the camera-frame z is at or below the near
    threshold. The pixel may fall outside image bounds; callers clip.
    """
    pc = cam_rotation.m @ _as_vec3(p) + _as_vec3(cam_translation)
    z = float(pc[2])
    if z <= _NEAR_Z:
        raise BehindCamera(f"camera-frame z = {z:.3g}")
    px = k.fx * pc[0] / z + k.cx
    py = k.fy * pc[1] / z + k.cy
    return np.array([px, py]), z


def back_project(pixel, depth: float, cam_rotation: Rotation, cam_translation,
                 k: Intrinsics) -> np.ndarray:
    """Inverse of project_point at a known camera-frame depth."""
    u, v = float(pixel[0]), float(pixel[1])
    pc = np.array([(u - k.cx) / k.fx * depth, (v - k.cy) / k.fy * depth, depth])
    return cam_rotation.m.T @ (pc - _as_vec3(cam_translation))


def obb_intersects(a: Obb, b: Obb) -> bool:
    """Separating-axis test over 15 candidate axes.

    Face normals of both boxes plus the 9 edge cross products; degenerate
    cross products (parallel edges) are skipped. Touching configurations
    (gap within 1e-9) count as intersecting.
    """
    axes_a = a.rotation.m.T  # rows are the local axes
    axes_b = b.rotation.m.T
    t = b.center - a.center
    candidates = list(axes_a) + list(axes_b)
    for i in range(3):
        for j in range(3):
            cross = np.cross(axes_a[i], axes_b[j])
            if np.linalg.norm(cross) >= _AXIS_DEGENERATE:
                candidates.append(cross)
    for axis in candidates:
        n = np.linalg.norm(axis)
        axis = axis / n
        ra = a.extent_along(axis)
        rb = b.extent_along(axis)
        if abs(float(t @ axis)) > ra + rb + _TOUCH_TOL:
            return False
    return True


def obb_contains(outer: Obb, inner: Obb, margin: float = 0.0) -> bool:
    """True iff every corner of inner lies inside outer shrunk by margin.

    Raises InvalidMargin when the margin meets or exceeds the smallest
    half-extent of outer (the shrunk box would be empty).
    """
    if margin < 0:
        raise InvalidMargin("margin must be non-negative")
    if margin >= float(np.min(outer.half_extents)):
        raise InvalidMargin(
            f"margin {margin} >= min outer half-extent {np.min(outer.half_extents)}"
        )
    limit = outer.half_extents - margin + _TOUCH_TOL
    local = (inner.corners() - outer.center) @ outer.rotation.m
    return bool(np.all(np.abs(local) <= limit))


@dataclass(frozen=True)
class PixelBox:
    """Axis-aligned pixel rectangle, [x0, x1] x [y0, y1]; empty when x1 < x0."""

    x0: float
    y0: float
    x1: float
    y1: float

    @staticmethod
    def empty() -> PixelBox:
        return PixelBox(0.0, 0.0, -1.0, -1.0)

    @property
    def is_empty(self) -> bool:
        return self.x1 < self.x0 or self.y1 < self.y0

    @property
    def area(self) -> float:
        if self.is_empty:
            return 0.0
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def union(self, other: PixelBox) -> PixelBox:
        if self.is_empty:
            return other
        if other.is_empty:
            return self
        return PixelBox(
            min(self.x0, other.x0), min(self.y0, other.y0),
            max(self.x1, other.x1), max(self.y1, other.y1),
        )

    def dilate(self, px: float) -> PixelBox:
        if self.is_empty:
            return self
        return PixelBox(self.x0 - px, self.y0 - px, self.x1 + px, self.y1 + px)


def project_obb(
    o: Obb, cam_rotation: Rotation, cam_translation, k: Intrinsics
) -> tuple[PixelBox, float]:
    """Project a box to its pixel-space bounding rectangle.

    Returns (bbox clipped to the image, visible_fraction) where the fraction
    is clipped-bbox area over unclipped-bbox area. Corners behind the camera
    are dropped; if all corners are behind, the fraction is 0 and the bbox
    is empty.
    """
    pts = []
    for corner in o.corners():
        try:
            px, _ = project_point(corner, cam_rotation, cam_translation, k)
        except BehindCamera:
            continue
        pts.append(px)
    if not pts:
        return PixelBox.empty(), 0.0
    pts = np.array(pts)
    raw = PixelBox(*pts.min(axis=0), *pts.max(axis=0))
    clipped = PixelBox(
        max(raw.x0, 0.0), max(raw.y0, 0.0),
        min(raw.x1, float(k.width)), min(raw.y1, float(k.height)),
    )
    if clipped.x1 < clipped.x0 or clipped.y1 < clipped.y0:
        return PixelBox.empty(), 0.0
    if raw.area <= 0.0:
        return clipped, 0.0
    return clipped, clipped.area / raw.area


def look_at_rotation(eye, target, up=(0.0, 0.0, 1.0)) -> Rotation:
    """World->camera rotation for a camera at eye looking at target.

    Camera axes: +x right, +y down, +z forward. Degenerates when the view
    direction is parallel to up.
    """
    eye = _as_vec3(eye)
    forward = _as_vec3(target) - eye
    n = np.linalg.norm(forward)
    if n < _AXIS_DEGENERATE:
        raise ValueError("eye and target coincide")
    forward = forward / n
    right = np.cross(forward, _as_vec3(up))
    rn = np.linalg.norm(right)
    if rn < _AXIS_DEGENERATE:
        raise ValueError("view direction parallel to up vector")
    right = right / rn
    down = np.cross(forward, right)
    return Rotation(np.stack([right, down, forward]))


def camera_pose_from_yaw_pitch(position, yaw: float, pitch: float) -> Rotation:
    """World->camera rotation for a camera at position with heading yaw
    (about world z, from +x toward +y) and elevation pitch (negative looks
    down)."""
    cp, sp = math.cos(pitch), math.sin(pitch)
    forward = np.array([cp * math.cos(yaw), cp * math.sin(yaw), sp])
    return look_at_rotation(position, _as_vec3(position) + forward)


def camera_position(cam_rotation: Rotation, cam_translation) -> np.ndarray:
    """World-frame optical center of a world->camera pose."""
    return -(cam_rotation.m.T @ _as_vec3(cam_translation))


def translation_for(cam_rotation: Rotation, position) -> np.ndarray:
    """Translation component of a world->camera pose with the given center."""
    return -(cam_rotation.m @ _as_vec3(position))
