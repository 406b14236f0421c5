"""Triangle mesh container for the solid surfaces used in occlusion tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MIN_TRIANGLE_AREA = 1e-12


class MeshError(ValueError):
    pass


@dataclass
class TriangleMesh:
    """Indexed triangle soup with outward-facing winding.

    vertices  : (V, 3) float
    triangles : (T, 3) int, counter-clockwise seen from outside
    """

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if len(self.triangles) and self.triangles.max(initial=-1) >= len(self.vertices):
            raise MeshError("triangle index out of range")
        if len(self.triangles) and self.triangles.min(initial=0) < 0:
            raise MeshError("negative triangle index")
        self._corners = None
        self._bbox = None

    @property
    def n_triangles(self):
        return len(self.triangles)

    def triangle_corners(self):
        """(T, 3, 3) array of triangle corner coordinates.

        Cached: the mesh is treated as immutable after construction.
        """
        if self._corners is None:
            self._corners = np.ascontiguousarray(self.vertices[self.triangles])
        return self._corners

    def normals(self, normalized: bool = True) -> np.ndarray:
        """Per-triangle normals from the winding (outward for solids)."""
        c = self.triangle_corners()
        n = np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0])
        if normalized:
            lens = np.linalg.norm(n, axis=1, keepdims=True)
            lens[lens == 0] = 1.0
            n = n / lens
        return n

    def areas(self) -> np.ndarray:
        c = self.triangle_corners()
        return 0.5 * np.linalg.norm(np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0]), axis=1)

    def bbox(self):
        if self._bbox is None:
            self._bbox = (self.vertices.min(axis=0), self.vertices.max(axis=0))
        return self._bbox

    def bbox_diagonal(self) -> float:
        lo, hi = self.bbox()
        return float(np.linalg.norm(hi - lo))

    def transformed(self, pose) -> "TriangleMesh":
        return TriangleMesh(vertices=pose.apply(self.vertices), triangles=self.triangles.copy())

    def validate(self) -> list[str]:
        """Degenerate-triangle and watertightness diagnostics."""
        problems = []
        areas = self.areas()
        for t in np.nonzero(areas <= MIN_TRIANGLE_AREA)[0]:
            problems.append(f"triangle {t}: degenerate (area {areas[t]:g})")
        edge_count = {}
        for a, b, c in self.triangles:
            for u, v in ((a, b), (b, c), (c, a)):
                key = (min(u, v), max(u, v))
                edge_count[key] = edge_count.get(key, 0) + 1
        for edge, cnt in edge_count.items():
            if cnt != 2:
                problems.append(f"edge {edge}: shared by {cnt} triangles (want 2)")
        return problems

    def is_watertight(self) -> bool:
        return not any("shared by" in p for p in self.validate())


def subdivide(mesh: TriangleMesh, levels: int = 1) -> TriangleMesh:
    """Midpoint 4-to-1 subdivision; watertightness and winding preserved.

    Handy for building large benchmark meshes out of small exact ones.
    """
    vertices = [tuple(v) for v in mesh.vertices]
    triangles = [tuple(t) for t in mesh.triangles]
    for _ in range(levels):
        midpoint_cache = {}

        def midpoint(a, b):
            key = (min(a, b), max(a, b))
            if key not in midpoint_cache:
                midpoint_cache[key] = len(vertices)
                va, vb = np.asarray(vertices[a]), np.asarray(vertices[b])
                vertices.append(tuple((va + vb) / 2.0))
            return midpoint_cache[key]

        next_triangles = []
        for a, b, c in triangles:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            next_triangles += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
        triangles = next_triangles
    return TriangleMesh(vertices=np.asarray(vertices), triangles=np.asarray(triangles))
