"""Procedural rectilinear solids with exact sharp-edge wireframes.

Solids are unions of unit voxels grown by face adjacency inside a small
grid.  Growth rejects any candidate voxel that would make the boundary
surface non-manifold (the 2x2 checkerboard pattern around a grid edge,
or two cells meeting only at a corner), so the extracted boundary is
always a watertight 2-manifold and the sharp-edge wireframe is exact:

  * boundary quads between occupied and empty cells, outward winding;
  * a grid edge is sharp iff its two adjacent quads have different
    normals;
  * runs of collinear sharp edges are merged; junctions are the grid
    vertices where the crease graph branches or turns.

Everything is deterministic in the seed.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from itertools import permutations, product

import numpy as np

from .mesh import TriangleMesh
from .wireframe import WireframeGraph

MAX_GRID = 8

FACE_DIRS = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]

# for a face with outward direction d, corner offsets of the quad in CCW
# order seen from outside (so cross(e1, e2) points along d)
_FACE_CORNERS = {
    (1, 0, 0): [(1, 0, 0), (1, 1, 0), (1, 1, 1), (1, 0, 1)],
    (-1, 0, 0): [(0, 0, 0), (0, 0, 1), (0, 1, 1), (0, 1, 0)],
    (0, 1, 0): [(0, 1, 0), (0, 1, 1), (1, 1, 1), (1, 1, 0)],
    (0, -1, 0): [(0, 0, 0), (1, 0, 0), (1, 0, 1), (0, 0, 1)],
    (0, 0, 1): [(0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)],
    (0, 0, -1): [(0, 0, 0), (0, 1, 0), (1, 1, 0), (1, 0, 0)],
}


class SolidError(ValueError):
    pass


@dataclass
class VoxelSolid:
    dims: tuple
    occupancy: np.ndarray
    voxel_size: float = 1.0

    def __post_init__(self):
        self.occupancy = np.asarray(self.occupancy, dtype=bool)
        if self.occupancy.shape != tuple(self.dims):
            raise SolidError("occupancy shape does not match dims")
        if any(d < 1 or d > MAX_GRID for d in self.dims):
            raise SolidError(f"grid dims must be within [1,{MAX_GRID}], got {self.dims}")
        if not self.occupancy.any():
            raise SolidError("solid has no voxels")

    def cells(self):
        return list(map(tuple, np.argwhere(self.occupancy)))

    @property
    def n_voxels(self):
        return int(self.occupancy.sum())

    def is_connected(self) -> bool:
        cells = set(self.cells())
        start = next(iter(cells))
        stack, seen = [start], {start}
        while stack:
            c = stack.pop()
            for d in FACE_DIRS:
                nb = (c[0] + d[0], c[1] + d[1], c[2] + d[2])
                if nb in cells and nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return len(seen) == len(cells)


def _occ(cells: set, c) -> bool:
    return c in cells


def _manifold_ok(cells: set, cand) -> bool:
    """Would adding `cand` keep the boundary surface a 2-manifold?"""
    x, y, z = cand
    # edge rule: diagonal contact along a grid edge with both flanks empty
    for i, j in ((0, 1), (0, 2), (1, 2)):
        for si, sj in product((-1, 1), repeat=2):
            d = [0, 0, 0]
            d[i], d[j] = si, sj
            diag = (x + d[0], y + d[1], z + d[2])
            if diag in cells:
                f1 = [0, 0, 0]
                f1[i] = si
                f2 = [0, 0, 0]
                f2[j] = sj
                flank1 = (x + f1[0], y + f1[1], z + f1[2])
                flank2 = (x + f2[0], y + f2[1], z + f2[2])
                if flank1 not in cells and flank2 not in cells:
                    return False
    # vertex rule: around each corner of cand, the 2x2x2 cell block must not
    # be two diagonal cells (corner contact) or six cells with a diagonal
    # empty pair (complement pinch)
    with_cand = cells | {cand}
    for corner in product((0, 1), repeat=3):
        p = (x + corner[0], y + corner[1], z + corner[2])
        block = [
            (p[0] + ox, p[1] + oy, p[2] + oz)
            for ox, oy, oz in product((-1, 0), repeat=3)
        ]
        occ_cells = [c for c in block if c in with_cand]
        if len(occ_cells) == 2:
            a, b = occ_cells
            if all(abs(a[k] - b[k]) == 1 for k in range(3)):
                return False
        elif len(occ_cells) == 6:
            a, b = [c for c in block if c not in with_cand]
            if all(abs(a[k] - b[k]) == 1 for k in range(3)):
                return False
    return True


def generate_voxel_solid(
    seed, grid_limits=(4, 4, 4), n_voxels: int | None = None, voxel_size: float = 1.0
) -> VoxelSolid:
    """Random connected voxel solid, fully determined by the seed."""
    dims = tuple(int(d) for d in grid_limits)
    if any(d < 1 or d > MAX_GRID for d in dims):
        raise SolidError(f"grid dims must be within [1,{MAX_GRID}], got {dims}")
    rng = np.random.default_rng(seed)
    capacity = dims[0] * dims[1] * dims[2]
    if n_voxels is None:
        n_voxels = int(rng.integers(2, min(12, capacity) + 1)) if capacity > 1 else 1
    n_voxels = max(1, min(n_voxels, capacity))

    start = tuple(int(rng.integers(0, d)) for d in dims)
    cells = {start}
    while len(cells) < n_voxels:
        frontier = set()
        for c in cells:
            for d in FACE_DIRS:
                nb = (c[0] + d[0], c[1] + d[1], c[2] + d[2])
                if nb in cells:
                    continue
                if all(0 <= nb[k] < dims[k] for k in range(3)):
                    frontier.add(nb)
        candidates = sorted(c for c in frontier if _manifold_ok(cells, c))
        if not candidates:
            break
        cells.add(candidates[int(rng.integers(0, len(candidates)))])

    occ = np.zeros(dims, dtype=bool)
    for c in cells:
        occ[c] = True
    return VoxelSolid(dims=dims, occupancy=occ, voxel_size=voxel_size)


def _boundary_quads(solid: VoxelSolid):
    """All (corner coords x4 int tuples, normal dir) boundary quads."""
    cells = set(solid.cells())
    quads = []
    for c in cells:
        for d in FACE_DIRS:
            nb = (c[0] + d[0], c[1] + d[1], c[2] + d[2])
            if nb in cells:
                continue
            corners = [
                (c[0] + o[0], c[1] + o[1], c[2] + o[2]) for o in _FACE_CORNERS[d]
            ]
            quads.append((corners, d))
    return quads


def _world_transform(solid: VoxelSolid):
    occ = np.argwhere(solid.occupancy)
    lo = occ.min(axis=0).astype(float)
    hi = occ.max(axis=0).astype(float) + 1.0
    center = (lo + hi) / 2.0
    scale = solid.voxel_size

    def to_world(grid_pts):
        return (np.asarray(grid_pts, dtype=float) - center) * scale

    return to_world


def solid_to_mesh(solid: VoxelSolid) -> TriangleMesh:
    """Triangulated boundary surface, outward winding, centered at origin."""
    to_world = _world_transform(solid)
    vert_index = {}
    vertices = []
    triangles = []
    for corners, _d in _boundary_quads(solid):
        idx = []
        for v in corners:
            if v not in vert_index:
                vert_index[v] = len(vertices)
                vertices.append(v)
            idx.append(vert_index[v])
        triangles.append((idx[0], idx[1], idx[2]))
        triangles.append((idx[0], idx[2], idx[3]))
    return TriangleMesh(vertices=to_world(vertices), triangles=np.asarray(triangles))


def solid_to_wireframe(solid: VoxelSolid) -> WireframeGraph:
    """Exact sharp-edge wireframe of the boundary, in the mesh frame."""
    quads = _boundary_quads(solid)
    edge_normals = {}
    for corners, d in quads:
        for a, b in zip(corners, corners[1:] + corners[:1]):
            key = (min(a, b), max(a, b))
            edge_normals.setdefault(key, []).append(d)
    incident = {}
    sharp = set()
    for (a, b), normals in edge_normals.items():
        if len(normals) != 2:
            raise SolidError(f"boundary edge {a}-{b} borders {len(normals)} quads; not manifold")
        if normals[0] != normals[1]:
            sharp.add((a, b))
            incident.setdefault(a, []).append((a, b))
            incident.setdefault(b, []).append((a, b))

    def edge_axis(e):
        a, b = e
        return next(k for k in range(3) if a[k] != b[k])

    def is_node(v):
        edges = incident[v]
        if len(edges) != 2:
            return True
        return edge_axis(edges[0]) != edge_axis(edges[1])

    nodes = [v for v in incident if is_node(v)]
    node_index = {v: i for i, v in enumerate(sorted(nodes))}
    if not node_index and sharp:
        raise SolidError("crease loop without corners; unexpected for rectilinear solids")

    visited = set()
    lines = set()
    for start in sorted(node_index):
        for edge in incident[start]:
            if edge in visited:
                continue
            prev, cur = start, (edge[0] if edge[1] == start else edge[1])
            visited.add(edge)
            while cur not in node_index:
                nxt_edge = next(e for e in incident[cur] if e not in visited)
                visited.add(nxt_edge)
                prev, cur = cur, (nxt_edge[0] if nxt_edge[1] == cur else nxt_edge[1])
            a, b = node_index[start], node_index[cur]
            if a == b:
                raise SolidError("degenerate crease chain (closed on one junction)")
            lines.add((min(a, b), max(a, b)))
    if visited != sharp:
        raise SolidError("unconsumed sharp edges; crease graph inconsistent")

    to_world = _world_transform(solid)
    junctions = to_world(sorted(node_index))
    return WireframeGraph(junctions3d=junctions, lines=np.asarray(sorted(lines)))


def generate_solid(seed, grid_limits=(4, 4, 4), n_voxels: int | None = None, voxel_size: float = 1.0):
    """Seeded solid as a (TriangleMesh, WireframeGraph) pair in world frame."""
    solid = generate_voxel_solid(seed, grid_limits, n_voxels, voxel_size)
    return solid_to_mesh(solid), solid_to_wireframe(solid)


def _symmetry_matrices():
    mats = []
    for perm in permutations(range(3)):
        for signs in product((-1, 1), repeat=3):
            m = np.zeros((3, 3), dtype=int)
            for row, (col, s) in enumerate(zip(perm, signs)):
                m[row, col] = s
            mats.append(m)
    return mats


_SYMMETRIES = _symmetry_matrices()


def canonical_form(solid: VoxelSolid) -> bytes:
    """Occupancy serialization invariant to the 48 cube symmetries."""
    coords = np.argwhere(solid.occupancy)
    best = None
    for m in _SYMMETRIES:
        mapped = coords @ m.T
        mapped = mapped - mapped.min(axis=0)
        key = b"".join(
            bytes(c) for c in sorted(map(tuple, mapped.astype(np.uint8).tolist()))
        )
        if best is None or key < best:
            best = key
    return best


def solid_hash(solid: VoxelSolid) -> str:
    return hashlib.sha256(canonical_form(solid)).hexdigest()
