"""Axis-aligned bounding-box tree over triangles (median split).

The tree is built recursively by splitting the triangle set at the
centroid median along the longest axis of the node's bounding box, and
stored flattened in arrays so the traversal kernel can run compiled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import TriangleMesh

DEFAULT_LEAF_SIZE = 4
AABB_PAD = 1e-12


@dataclass
class BvhAccelerator:
    """Flattened BVH: internal nodes carry children, leaves carry a
    [start, start+count) slice of tri_index."""

    node_lo: np.ndarray
    node_hi: np.ndarray
    node_left: np.ndarray
    node_right: np.ndarray
    node_start: np.ndarray
    node_count: np.ndarray
    tri_index: np.ndarray
    leaf_size: int

    @property
    def n_nodes(self):
        return len(self.node_lo)

    def n_leaves(self):
        return int(np.sum(self.node_left < 0))

    def validate(self, mesh: TriangleMesh) -> list[str]:
        problems = []
        seen = np.zeros(mesh.n_triangles, dtype=int)
        corners = mesh.triangle_corners()
        for node in range(self.n_nodes):
            left = self.node_left[node]
            if left < 0:
                s, c = self.node_start[node], self.node_count[node]
                for i in self.tri_index[s : s + c]:
                    seen[i] += 1
                    tlo = corners[i].min(axis=0)
                    thi = corners[i].max(axis=0)
                    if np.any(tlo < self.node_lo[node] - 1e-9) or np.any(
                        thi > self.node_hi[node] + 1e-9
                    ):
                        problems.append(f"leaf {node}: triangle {i} escapes its box")
            else:
                right = self.node_right[node]
                for child in (left, right):
                    if np.any(self.node_lo[child] < self.node_lo[node] - 1e-9) or np.any(
                        self.node_hi[child] > self.node_hi[node] + 1e-9
                    ):
                        problems.append(f"node {node}: child {child} box not contained")
        for i in np.nonzero(seen != 1)[0]:
            problems.append(f"triangle {i}: appears in {seen[i]} leaves (want 1)")
        return problems


def build_bvh(mesh: TriangleMesh, leaf_size: int = DEFAULT_LEAF_SIZE) -> BvhAccelerator:
    corners = mesh.triangle_corners()
    n = len(corners)
    if n == 0:
        return BvhAccelerator(
            node_lo=np.zeros((1, 3)),
            node_hi=np.zeros((1, 3)),
            node_left=np.array([-1], dtype=np.int64),
            node_right=np.array([-1], dtype=np.int64),
            node_start=np.array([0], dtype=np.int64),
            node_count=np.array([0], dtype=np.int64),
            tri_index=np.zeros(0, dtype=np.int64),
            leaf_size=leaf_size,
        )
    tri_lo = corners.min(axis=1) - AABB_PAD
    tri_hi = corners.max(axis=1) + AABB_PAD
    centroids = corners.mean(axis=1)

    lo_list, hi_list = [], []
    left_list, right_list = [], []
    start_list, count_list = [], []
    order = []

    def add_node(idx: np.ndarray) -> int:
        node = len(lo_list)
        lo = tri_lo[idx].min(axis=0)
        hi = tri_hi[idx].max(axis=0)
        lo_list.append(lo)
        hi_list.append(hi)
        left_list.append(-1)
        right_list.append(-1)
        start_list.append(0)
        count_list.append(0)
        if len(idx) <= leaf_size:
            start_list[node] = len(order)
            count_list[node] = len(idx)
            order.extend(idx.tolist())
            return node
        axis = int(np.argmax(hi - lo))
        mid = len(idx) // 2
        # median split on centroid along the longest axis
        part = idx[np.argsort(centroids[idx, axis], kind="stable")]
        left_idx, right_idx = part[:mid], part[mid:]
        left_list[node] = add_node(left_idx)
        right_list[node] = add_node(right_idx)
        return node

    add_node(np.arange(n, dtype=np.int64))
    return BvhAccelerator(
        node_lo=np.asarray(lo_list),
        node_hi=np.asarray(hi_list),
        node_left=np.asarray(left_list, dtype=np.int64),
        node_right=np.asarray(right_list, dtype=np.int64),
        node_start=np.asarray(start_list, dtype=np.int64),
        node_count=np.asarray(count_list, dtype=np.int64),
        tri_index=np.asarray(order, dtype=np.int64),
        leaf_size=leaf_size,
    )
