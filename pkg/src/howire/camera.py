"""Pinhole camera: projection, depth lifting, and rigid pose transforms.

Camera convention: +Z forward, +X right, +Y down, so pixel coordinates
grow right/down and the projection is sign-free:

    x = fx * X / Z + cx,   y = fy * Y / Z + cy

Depth is the camera-frame Z coordinate (not ray length), which makes
``lift`` the exact inverse of ``project`` at the same Z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .wireframe import WireframeGraph

BEHIND_EPS = 1e-6


class CameraError(ValueError):
    pass


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise CameraError(f"focal lengths must be positive, got fx={self.fx} fy={self.fy}")
        if not (0 < self.cx < self.width and 0 < self.cy < self.height):
            raise CameraError(
                f"principal point ({self.cx},{self.cy}) outside image {self.width}x{self.height}"
            )

    def to_dict(self):
        return {
            "fx": self.fx,
            "fy": self.fy,
            "cx": self.cx,
            "cy": self.cy,
            "width": self.width,
            "height": self.height,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            fx=float(d["fx"]),
            fy=float(d["fy"]),
            cx=float(d["cx"]),
            cy=float(d["cy"]),
            width=int(d["width"]),
            height=int(d["height"]),
        )


def default_intrinsics(width: int = 256, height: int = 256, vfov_deg: float = 45.0) -> CameraIntrinsics:
    """256x256 image with a 45-degree vertical field of view by default."""
    f = (height / 2.0) / math.tan(math.radians(vfov_deg) / 2.0)
    return CameraIntrinsics(fx=f, fy=f, cx=width / 2.0, cy=height / 2.0, width=width, height=height)


def project(point3d, intrinsics: CameraIntrinsics, eps: float = BEHIND_EPS):
    """Project camera-frame points to pixel coordinates.

    Accepts a single (3,) point or an (N, 3) array; raises CameraError if
    any Z <= eps (point behind or on the camera plane).
    """
    pts = np.asarray(point3d, dtype=float)
    single = pts.ndim == 1
    pts = pts.reshape(-1, 3)
    z = pts[:, 2]
    if np.any(z <= eps):
        bad = int(np.argmax(z <= eps))
        raise CameraError(f"point {bad} has Z={z[bad]:g} <= {eps:g} (behind camera)")
    xy = np.empty((len(pts), 2))
    xy[:, 0] = intrinsics.fx * pts[:, 0] / z + intrinsics.cx
    xy[:, 1] = intrinsics.fy * pts[:, 1] / z + intrinsics.cy
    return xy[0] if single else xy


def lift(x, y, z, intrinsics: CameraIntrinsics):
    """Invert the projection with known depth: pixel (x, y) + Z -> 3D point.

    Works elementwise on arrays; raises CameraError on non-positive depth.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise CameraError("depth must be positive")
    pts = np.stack(
        [z * (x - intrinsics.cx) / intrinsics.fx, z * (y - intrinsics.cy) / intrinsics.fy, z],
        axis=-1,
    )
    return pts


@dataclass(frozen=True)
class CameraPose:
    """World -> camera rigid transform: X_cam = R @ X_world + t."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        t = np.asarray(self.translation, dtype=float).reshape(3)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)
        if not np.allclose(r @ r.T, np.eye(3), atol=1e-9):
            raise CameraError("rotation is not orthonormal")
        if np.linalg.det(r) < 0:
            raise CameraError("rotation has negative determinant (reflection)")

    def apply(self, points):
        pts = np.asarray(points, dtype=float)
        return pts @ self.rotation.T + self.translation

    def compose(self, first: "CameraPose") -> "CameraPose":
        """Pose equivalent to applying `first`, then self."""
        return CameraPose(
            rotation=self.rotation @ first.rotation,
            translation=self.rotation @ first.translation + self.translation,
        )

    @classmethod
    def identity(cls):
        return cls(rotation=np.eye(3), translation=np.zeros(3))


def look_at(eye, target, up=(0.0, 0.0, 1.0)) -> CameraPose:
    """Pose looking from `eye` toward `target`; +Z points at the target.

    `up` hints which world direction maps to "up" in the image (camera -Y).
    """
    eye = np.asarray(eye, dtype=float)
    target = np.asarray(target, dtype=float)
    up = np.asarray(up, dtype=float)
    fwd = target - eye
    norm = np.linalg.norm(fwd)
    if norm < 1e-12:
        raise CameraError("eye and target coincide")
    z = fwd / norm
    x = np.cross(z, up)
    xnorm = np.linalg.norm(x)
    if xnorm < 1e-9:
        raise CameraError("up direction parallel to the view direction")
    x /= xnorm
    y = np.cross(z, x)
    rot = np.stack([x, y, z])
    return CameraPose(rotation=rot, translation=-rot @ eye)


def transform_graph(graph: WireframeGraph, pose: CameraPose) -> WireframeGraph:
    """Map all junctions by the pose; line set and labels are untouched.

    Projected 2D coordinates are dropped (no longer valid in the new frame).
    """
    return WireframeGraph(
        junctions3d=pose.apply(graph.junctions3d),
        lines=graph.lines.copy(),
        junctions2d=None,
        junction_visibility=None
        if graph.junction_visibility is None
        else graph.junction_visibility.copy(),
        junction_class=None if graph.junction_class is None else list(graph.junction_class),
        line_visibility=None if graph.line_visibility is None else list(graph.line_visibility),
    )
