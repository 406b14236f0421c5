"""Compiled ray-casting kernels (numba) shared by the naive and BVH paths.

Both occlusion routines answer the same question: does any triangle cut
the open segment from the camera center (origin) to a query point, with
a small window excluded at both ends?  The segment is parameterized by
t in [0, 1]; hits must satisfy t_min < t < t_max to count, where t_max
excludes hits within eps_self length units of the point itself.

The scalar triangle test is Moller-Trumbore with an inclusive-edge
barycentric check; near-parallel rays (|det| < 1e-12) are treated as
misses.  The BVH kernel runs the same test on a subset of triangles, so
the two paths agree exactly.  Batch variants loop inside compiled code;
use them for anything beyond a handful of queries.
"""

import numba
import numpy as np

DET_EPS = 1e-12


@numba.njit(cache=True, inline="always")
def _segment_hits_triangle(px, py, pz, ax, ay, az, bx, by, bz, cx, cy, cz, t_min, t_max):
    # ray origin = (0,0,0), direction = query point p, t in (t_min, t_max)
    e1x, e1y, e1z = bx - ax, by - ay, bz - az
    e2x, e2y, e2z = cx - ax, cy - ay, cz - az
    # h = dir x e2
    hx = py * e2z - pz * e2y
    hy = pz * e2x - px * e2z
    hz = px * e2y - py * e2x
    det = e1x * hx + e1y * hy + e1z * hz
    if -DET_EPS < det < DET_EPS:
        return False
    inv = 1.0 / det
    # s = origin - a = -a
    sx, sy, sz = -ax, -ay, -az
    u = (sx * hx + sy * hy + sz * hz) * inv
    if u < 0.0 or u > 1.0:
        return False
    # q = s x e1
    qx = sy * e1z - sz * e1y
    qy = sz * e1x - sx * e1z
    qz = sx * e1y - sy * e1x
    v = (px * qx + py * qy + pz * qz) * inv
    if v < 0.0 or u + v > 1.0:
        return False
    t = (e2x * qx + e2y * qy + e2z * qz) * inv
    return t_min < t < t_max


@numba.njit(cache=True, inline="always")
def _occluded_naive_one(px, py, pz, tri_corners, t_min, t_max):
    for i in range(tri_corners.shape[0]):
        if _segment_hits_triangle(
            px, py, pz,
            tri_corners[i, 0, 0], tri_corners[i, 0, 1], tri_corners[i, 0, 2],
            tri_corners[i, 1, 0], tri_corners[i, 1, 1], tri_corners[i, 1, 2],
            tri_corners[i, 2, 0], tri_corners[i, 2, 1], tri_corners[i, 2, 2],
            t_min, t_max,
        ):
            return True
    return False


@numba.njit(cache=True, inline="always")
def _segment_hits_aabb(px, py, pz, lox, loy, loz, hix, hiy, hiz):
    # slab test for the segment origin->p (t window [0, 1]), conservative
    t0 = 0.0
    t1 = 1.0
    for axis in range(3):
        if axis == 0:
            d, lo, hi = px, lox, hix
        elif axis == 1:
            d, lo, hi = py, loy, hiy
        else:
            d, lo, hi = pz, loz, hiz
        if d == 0.0:
            if lo > 0.0 or hi < 0.0:
                return False
        else:
            inv = 1.0 / d
            ta = lo * inv
            tb = hi * inv
            if ta > tb:
                ta, tb = tb, ta
            if ta > t0:
                t0 = ta
            if tb < t1:
                t1 = tb
            if t0 > t1:
                return False
    return True


@numba.njit(cache=True, inline="always")
def _occluded_bvh_one(
    px, py, pz, tri_corners, node_lo, node_hi, node_left, node_right, node_start,
    node_count, tri_index, t_min, t_max, stack,
):
    top = 0
    stack[top] = 0
    top += 1
    while top > 0:
        top -= 1
        node = stack[top]
        if not _segment_hits_aabb(
            px, py, pz,
            node_lo[node, 0], node_lo[node, 1], node_lo[node, 2],
            node_hi[node, 0], node_hi[node, 1], node_hi[node, 2],
        ):
            continue
        if node_left[node] < 0:
            start = node_start[node]
            for k in range(node_count[node]):
                i = tri_index[start + k]
                if _segment_hits_triangle(
                    px, py, pz,
                    tri_corners[i, 0, 0], tri_corners[i, 0, 1], tri_corners[i, 0, 2],
                    tri_corners[i, 1, 0], tri_corners[i, 1, 1], tri_corners[i, 1, 2],
                    tri_corners[i, 2, 0], tri_corners[i, 2, 1], tri_corners[i, 2, 2],
                    t_min, t_max,
                ):
                    return True
        else:
            stack[top] = node_left[node]
            top += 1
            stack[top] = node_right[node]
            top += 1
    return False


@numba.njit(cache=True)
def segment_occluded_naive(point, tri_corners, t_min, t_max):
    """Single segment origin->point against every triangle in turn."""
    return _occluded_naive_one(point[0], point[1], point[2], tri_corners, t_min, t_max)


@numba.njit(cache=True)
def segment_occluded_bvh(
    point, tri_corners, node_lo, node_hi, node_left, node_right, node_start, node_count,
    tri_index, t_min, t_max,
):
    """BVH-accelerated version of segment_occluded_naive (same semantics).

    Nodes are flattened arrays; leaves have node_left == -1 and reference
    tri_index[node_start : node_start + node_count].
    """
    stack = np.empty(128, dtype=np.int64)
    return _occluded_bvh_one(
        point[0], point[1], point[2], tri_corners, node_lo, node_hi, node_left,
        node_right, node_start, node_count, tri_index, t_min, t_max, stack,
    )


@numba.njit(cache=True)
def batch_occluded_naive(points, tri_corners, t_min, eps_self):
    out = np.empty(points.shape[0], dtype=np.bool_)
    for i in range(points.shape[0]):
        px, py, pz = points[i, 0], points[i, 1], points[i, 2]
        seg_len = np.sqrt(px * px + py * py + pz * pz)
        t_max = 1.0 - eps_self / seg_len
        out[i] = _occluded_naive_one(px, py, pz, tri_corners, t_min, t_max)
    return out


@numba.njit(cache=True)
def batch_occluded_bvh(
    points, tri_corners, node_lo, node_hi, node_left, node_right, node_start, node_count,
    tri_index, t_min, eps_self,
):
    out = np.empty(points.shape[0], dtype=np.bool_)
    stack = np.empty(128, dtype=np.int64)
    for i in range(points.shape[0]):
        px, py, pz = points[i, 0], points[i, 1], points[i, 2]
        seg_len = np.sqrt(px * px + py * py + pz * pz)
        t_max = 1.0 - eps_self / seg_len
        out[i] = _occluded_bvh_one(
            px, py, pz, tri_corners, node_lo, node_hi, node_left, node_right,
            node_start, node_count, tri_index, t_min, t_max, stack,
        )
    return out
