"""Software z-buffer rasterizer producing the dataset's shaded renders.

Depth at a covered pixel is computed analytically from the triangle's
plane along the pixel ray (not interpolated), so the buffer is exact up
to float rounding.  Shading is flat Lambertian per triangle with a fixed
directional light; appearance knobs exist only so renders are
reproducible, the labels never depend on them.

Pixel (row, col) samples the continuous image point (x=col, y=row).
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass, field

import numpy as np
from PIL import Image, ImageDraw

from .camera import CameraIntrinsics, project
from .mesh import TriangleMesh
from .wireframe import FLEETING, HIDDEN, VISIBLE, WireframeGraph

NEAR_Z = 1e-6
DEPTH_MAGIC = b"HOWD"

# supplementary color code: line/junction classes as drawn for humans
LINE_COLORS = {VISIBLE: (0, 0, 128), HIDDEN: (210, 180, 140)}  # navy / tan
JUNCTION_COLORS = {VISIBLE: (0, 128, 128), FLEETING: (255, 0, 255), HIDDEN: (0, 0, 0)}


@dataclass
class ShadingConfig:
    light_dir: tuple = (1.0, 1.0, -1.0)  # toward the light, camera frame
    ambient: float = 0.25
    diffuse: float = 0.75
    albedo: tuple = (0.80, 0.80, 0.80)
    background: tuple = (1.0, 1.0, 1.0)


@dataclass
class DepthBuffer:
    width: int
    height: int
    depth: np.ndarray = field(repr=False)

    def finite_positive(self) -> bool:
        finite = np.isfinite(self.depth)
        return bool(np.all(self.depth[finite] > 0))


def rasterize(
    mesh_camera: TriangleMesh,
    intrinsics: CameraIntrinsics,
    shading: ShadingConfig | None = None,
):
    """Render a camera-frame mesh; returns (rgb uint8 (H,W,3), DepthBuffer)."""
    shading = shading or ShadingConfig()
    w, h = intrinsics.width, intrinsics.height
    depth = np.full((h, w), np.inf, dtype=np.float64)
    color = np.empty((h, w, 3), dtype=np.float64)
    color[:] = shading.background

    light = np.asarray(shading.light_dir, dtype=float)
    light = light / np.linalg.norm(light)
    albedo = np.asarray(shading.albedo, dtype=float)

    corners = mesh_camera.triangle_corners()
    drawn = 0
    for tri in corners:
        if np.any(tri[:, 2] <= NEAR_Z):
            continue  # near-plane clipping not needed for our scenes
        pts2d = project(tri, intrinsics)
        xs, ys = pts2d[:, 0], pts2d[:, 1]
        x0 = max(0, int(np.ceil(xs.min())))
        x1 = min(w - 1, int(np.floor(xs.max())))
        y0 = max(0, int(np.ceil(ys.min())))
        y1 = min(h - 1, int(np.floor(ys.max())))
        if x0 > x1 or y0 > y1:
            continue

        area = (xs[1] - xs[0]) * (ys[2] - ys[0]) - (ys[1] - ys[0]) * (xs[2] - xs[0])
        if area == 0.0:
            continue
        sign = 1.0 if area > 0 else -1.0

        px, py = np.meshgrid(np.arange(x0, x1 + 1), np.arange(y0, y1 + 1))
        inside = np.ones(px.shape, dtype=bool)
        for a, b in ((0, 1), (1, 2), (2, 0)):
            edge = (xs[b] - xs[a]) * (py - ys[a]) - (ys[b] - ys[a]) * (px - xs[a])
            inside &= sign * edge >= 0.0
        if not inside.any():
            continue

        n = np.cross(tri[1] - tri[0], tri[2] - tri[0])
        nlen = np.linalg.norm(n)
        if nlen == 0:
            continue
        n = n / nlen
        if np.dot(n, tri[0]) > 0:
            n = -n  # face the camera; outward winding already does for solids
        plane_d = float(np.dot(n, tri[0]))

        # exact depth along each pixel ray: Z = d / (n . dir)
        dir_x = (px - intrinsics.cx) / intrinsics.fx
        dir_y = (py - intrinsics.cy) / intrinsics.fy
        denom = n[0] * dir_x + n[1] * dir_y + n[2]
        valid = np.abs(denom) > 1e-15
        z = np.where(valid, plane_d / np.where(valid, denom, 1.0), np.inf)
        mask = inside & valid & (z > NEAR_Z)

        sub = depth[y0 : y1 + 1, x0 : x1 + 1]
        mask &= z < sub
        if not mask.any():
            continue
        sub[mask] = z[mask]
        intensity = shading.ambient + shading.diffuse * max(0.0, float(np.dot(n, light)))
        color[y0 : y1 + 1, x0 : x1 + 1][mask] = np.clip(albedo * intensity, 0.0, 1.0)
        drawn += 1

    if mesh_camera.n_triangles > 0 and drawn == 0:
        warnings.warn("no triangle reached the image; render is empty", stacklevel=2)
    rgb = (np.clip(color, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    return rgb, DepthBuffer(width=w, height=h, depth=depth)


def write_png(path, rgb: np.ndarray):
    Image.fromarray(rgb, mode="RGB").save(path, format="PNG")


def read_png(path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"))


def write_depth(path, buf: DepthBuffer):
    """Raw little-endian float32 dump with a 16-byte header.

    Header: magic "HOWD", uint32 width, uint32 height, 4 reserved bytes.
    """
    header = DEPTH_MAGIC + struct.pack("<II", buf.width, buf.height) + b"\x00" * 4
    data = buf.depth.astype("<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data)


def read_depth(path) -> DepthBuffer:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) < 16 or header[:4] != DEPTH_MAGIC:
            raise ValueError(f"{path}: not a depth file (bad header)")
        w, h = struct.unpack("<II", header[4:12])
        data = np.frombuffer(fh.read(), dtype="<f4")
    if data.size != w * h:
        raise ValueError(f"{path}: expected {w * h} depth values, found {data.size}")
    return DepthBuffer(width=w, height=h, depth=data.reshape(h, w).astype(np.float64))


def draw_wireframe_overlay(
    rgb: np.ndarray, graph: WireframeGraph, intrinsics: CameraIntrinsics
) -> np.ndarray:
    """Projected wireframe drawn over a render, color-coded by class."""
    img = Image.fromarray(rgb, mode="RGB")
    draw = ImageDraw.Draw(img)
    pts = (
        graph.junctions2d
        if graph.junctions2d is not None
        else project(graph.junctions3d, intrinsics)
    )
    line_vis = graph.line_visibility or [VISIBLE] * graph.n_lines
    for (m, n), label in zip(graph.lines, line_vis):
        draw.line(
            [tuple(pts[m]), tuple(pts[n])], fill=LINE_COLORS.get(label, (255, 0, 0)), width=1
        )
    classes = graph.junction_class or [VISIBLE] * graph.n_junctions
    for (x, y), label in zip(pts, classes):
        r = 2
        draw.ellipse(
            [x - r, y - r, x + r, y + r], fill=JUNCTION_COLORS.get(label, (255, 0, 0))
        )
    return np.asarray(img)
