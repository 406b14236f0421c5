"""Junction occlusion against the solid's own surface, by exact ray casting.

Visibility is decided geometrically (camera center to junction segment vs
the triangle mesh), never from the rasterizer, so labels do not depend on
image resolution.  Junctions lie on the surface, so hits within
``eps_self`` length units of the query point are excluded; ``eps_self``
defaults to 1e-4 of the mesh bounding-box diagonal.
"""

from __future__ import annotations

import warnings

import numpy as np

from . import kernels
from .bvh import BvhAccelerator, build_bvh
from .mesh import TriangleMesh
from .wireframe import WireframeGraph

EPS_T = 1e-6
EPS_SELF_FRACTION = 1e-4


class VisibilityError(ValueError):
    pass


def self_exclusion_eps(mesh: TriangleMesh) -> float:
    return EPS_SELF_FRACTION * mesh.bbox_diagonal()


def _t_window(point, eps_self):
    seg_len = float(np.linalg.norm(point))
    if seg_len < 1e-12:
        raise VisibilityError("query point coincides with the camera center")
    return EPS_T, 1.0 - eps_self / seg_len


def ray_occlusion_test(
    point_camera,
    mesh_camera: TriangleMesh,
    eps: float | None = None,
    bvh: BvhAccelerator | None = None,
) -> bool:
    """True iff some triangle blocks the segment camera-center -> point.

    `eps` is the self-exclusion distance around the point (length units);
    defaults to 1e-4 of the mesh bbox diagonal.  Pass a prebuilt `bvh` to
    use the accelerated path; results are identical either way.
    """
    point = np.asarray(point_camera, dtype=float).reshape(3)
    if mesh_camera.n_triangles == 0:
        _t_window(point, 0.0)  # still reject a degenerate query
        return False
    if eps is None:
        eps = self_exclusion_eps(mesh_camera)
    t_min, t_max = _t_window(point, eps)
    corners = mesh_camera.triangle_corners()
    if bvh is None:
        return bool(kernels.segment_occluded_naive(point, corners, t_min, t_max))
    return bool(
        kernels.segment_occluded_bvh(
            point,
            corners,
            bvh.node_lo,
            bvh.node_hi,
            bvh.node_left,
            bvh.node_right,
            bvh.node_start,
            bvh.node_count,
            bvh.tri_index,
            t_min,
            t_max,
        )
    )


def ray_occlusion_mask(
    points_camera,
    mesh_camera: TriangleMesh,
    eps: float | None = None,
    bvh: BvhAccelerator | None = None,
) -> np.ndarray:
    """Batch ray_occlusion_test: one compiled call for all query points."""
    points = np.ascontiguousarray(np.asarray(points_camera, dtype=float).reshape(-1, 3))
    if np.any(np.linalg.norm(points, axis=1) < 1e-12):
        raise VisibilityError("query point coincides with the camera center")
    if mesh_camera.n_triangles == 0:
        return np.zeros(len(points), dtype=bool)
    if eps is None:
        eps = self_exclusion_eps(mesh_camera)
    corners = mesh_camera.triangle_corners()
    if bvh is None:
        return np.asarray(kernels.batch_occluded_naive(points, corners, EPS_T, eps))
    return np.asarray(
        kernels.batch_occluded_bvh(
            points,
            corners,
            bvh.node_lo,
            bvh.node_hi,
            bvh.node_left,
            bvh.node_right,
            bvh.node_start,
            bvh.node_count,
            bvh.tri_index,
            EPS_T,
            eps,
        )
    )


def point_mesh_distance(point, mesh: TriangleMesh) -> float:
    """Euclidean distance from a point to the closest mesh triangle."""
    p = np.asarray(point, dtype=float).reshape(3)
    c = mesh.triangle_corners()
    if len(c) == 0:
        return float("inf")
    # plane distance where the orthogonal projection lies inside the triangle,
    # otherwise the closest of the three edge segments
    a, b, d = c[:, 0], c[:, 1], c[:, 2]
    n = np.cross(b - a, d - a)
    nn = np.einsum("ij,ij->i", n, n)
    nn[nn == 0] = 1.0
    rel = p[None, :] - a
    dist_plane = np.einsum("ij,ij->i", rel, n) / np.sqrt(nn)
    proj = p[None, :] - dist_plane[:, None] * (n / np.sqrt(nn)[:, None])
    # barycentric test of the projection
    v0, v1 = b - a, d - a
    v2 = proj - a
    d00 = np.einsum("ij,ij->i", v0, v0)
    d01 = np.einsum("ij,ij->i", v0, v1)
    d11 = np.einsum("ij,ij->i", v1, v1)
    d20 = np.einsum("ij,ij->i", v2, v0)
    d21 = np.einsum("ij,ij->i", v2, v1)
    denom = d00 * d11 - d01 * d01
    denom[denom == 0] = 1.0
    u = (d11 * d20 - d01 * d21) / denom
    v = (d00 * d21 - d01 * d20) / denom
    inside = (u >= 0) & (v >= 0) & (u + v <= 1)

    def seg_dist(p0, p1):
        seg = p1 - p0
        t = np.einsum("ij,ij->i", p[None, :] - p0, seg) / np.maximum(
            np.einsum("ij,ij->i", seg, seg), 1e-300
        )
        t = np.clip(t, 0.0, 1.0)
        closest = p0 + t[:, None] * seg
        return np.linalg.norm(p[None, :] - closest, axis=1)

    edge_d = np.minimum(np.minimum(seg_dist(a, b), seg_dist(b, d)), seg_dist(d, a))
    per_tri = np.where(inside, np.abs(dist_plane), edge_d)
    return float(per_tri.min())


def label_junction_visibility(
    graph_camera: WireframeGraph,
    mesh_camera: TriangleMesh,
    eps: float | None = None,
    bvh: BvhAccelerator | None = None,
    check_on_surface: bool = True,
) -> np.ndarray:
    """Per-junction visibility flags (1 = unoccluded) by ray casting.

    Warns if a junction sits farther than 10*eps from the mesh surface,
    which usually means graph and mesh are in different frames.
    """
    if eps is None:
        eps = self_exclusion_eps(mesh_camera)
    if check_on_surface:
        for j, pt in enumerate(graph_camera.junctions3d):
            d = point_mesh_distance(pt, mesh_camera)
            if d > 10 * eps:
                warnings.warn(
                    f"junction {j} is {d:g} length units off the mesh surface "
                    f"(eps={eps:g}); geometry may be inconsistent",
                    stacklevel=2,
                )
    occluded = ray_occlusion_mask(graph_camera.junctions3d, mesh_camera, eps=eps, bvh=bvh)
    return np.where(occluded, 0, 1)


def label_graph(
    graph_camera: WireframeGraph,
    mesh_camera: TriangleMesh,
    eps: float | None = None,
    use_bvh: bool = True,
) -> WireframeGraph:
    """Convenience: ray-cast visibility then derive line/junction classes."""
    bvh = build_bvh(mesh_camera) if use_bvh and mesh_camera.n_triangles > 8 else None
    flags = label_junction_visibility(graph_camera, mesh_camera, eps=eps, bvh=bvh)
    return graph_camera.with_visibility(flags)
