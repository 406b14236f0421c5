import numpy as np
import pytest

from conftest import generic_cube_views
from howire.bvh import build_bvh
from howire.camera import look_at, transform_graph
from howire.mesh import TriangleMesh
from howire.solids import generate_solid
from howire.visibility import (
    VisibilityError,
    label_junction_visibility,
    point_mesh_distance,
    ray_occlusion_test,
)


def test_empty_mesh_not_occluded():
    empty = TriangleMesh(vertices=np.zeros((0, 3)), triangles=np.zeros((0, 3), dtype=int))
    assert ray_occlusion_test((0, 0, 5), empty) is False


def test_blocking_triangle():
    # big triangle spanning the z=2 plane in front of the point
    mesh = TriangleMesh(
        vertices=[(-10, -10, 2), (10, -10, 2), (0, 10, 2)], triangles=[(0, 1, 2)]
    )
    assert ray_occlusion_test((0, 0, 4), mesh, eps=1e-4) is True
    assert ray_occlusion_test((0, 0, 1), mesh, eps=1e-4) is False


def test_degenerate_query():
    mesh = TriangleMesh(vertices=[(0, 0, 2), (1, 0, 2), (0, 1, 2)], triangles=[(0, 1, 2)])
    with pytest.raises(VisibilityError):
        ray_occlusion_test((0, 0, 0), mesh)


def test_cube_far_corner_hidden(unit_cube):
    mesh, wf = unit_cube
    rng = np.random.default_rng(10)
    for eye in generic_cube_views(rng, 25):
        pose = look_at(eye, (0, 0, 0), up=(0, 0, 1))
        g = transform_graph(wf, pose)
        m = mesh.transformed(pose)
        flags = label_junction_visibility(g, m, check_on_surface=False)
        assert int(np.sum(flags == 0)) == 1
        depths = np.linalg.norm(g.junctions3d, axis=1)
        assert flags[int(np.argmax(depths))] == 0


def test_front_facing_quad_all_visible():
    # camera at origin looking straight at a quad in the z=3 plane
    verts = [(-1, -1, 3), (1, -1, 3), (1, 1, 3), (-1, 1, 3)]
    mesh = TriangleMesh(vertices=verts, triangles=[(0, 2, 1), (0, 3, 2)])
    for v in verts:
        assert ray_occlusion_test(v, mesh) is False


def test_bvh_structure_small():
    one = TriangleMesh(vertices=[(0, 0, 0), (1, 0, 0), (0, 1, 0)], triangles=[(0, 1, 2)])
    bvh = build_bvh(one)
    assert bvh.n_nodes == 1 and bvh.n_leaves() == 1
    two = TriangleMesh(
        vertices=[(0, 0, 0), (1, 0, 0), (0, 1, 0), (5, 5, 5), (6, 5, 5), (5, 6, 5)],
        triangles=[(0, 1, 2), (3, 4, 5)],
    )
    bvh = build_bvh(two, leaf_size=1)
    assert bvh.n_nodes == 3 and bvh.n_leaves() == 2
    assert bvh.validate(two) == []


def test_bvh_matches_naive_on_random_solids():
    rng = np.random.default_rng(5)
    for seed in range(12):
        mesh, wf = generate_solid(seed=seed, grid_limits=(4, 4, 4))
        for _ in range(4):
            u = rng.normal(size=3)
            u /= np.linalg.norm(u)
            pose = look_at(u * rng.uniform(6, 12), (0, 0, 0), up=(0, 0, 1))
            g = transform_graph(wf, pose)
            m = mesh.transformed(pose)
            bvh = build_bvh(m)
            naive = label_junction_visibility(g, m, check_on_surface=False)
            accel = label_junction_visibility(g, m, bvh=bvh, check_on_surface=False)
            assert np.array_equal(naive, accel)


def test_convex_solid_front_face_rule(unit_cube):
    """On a convex solid, visible junctions are exactly the vertices that
    touch at least one front-facing face."""
    mesh, wf = unit_cube
    rng = np.random.default_rng(8)
    for eye in generic_cube_views(rng, 10):
        pose = look_at(eye, (0, 0, 0), up=(0, 0, 1))
        g = transform_graph(wf, pose)
        m = mesh.transformed(pose)
        flags = label_junction_visibility(g, m, check_on_surface=False)
        normals = m.normals()
        corners = m.triangle_corners()
        front = [np.dot(normals[t], corners[t, 0]) < 0 for t in range(m.n_triangles)]
        for j, pt in enumerate(g.junctions3d):
            on_front_face = any(
                front[t] and any(np.linalg.norm(corners[t, k] - pt) < 1e-9 for k in range(3))
                for t in range(m.n_triangles)
            )
            assert on_front_face == (flags[j] == 1)


def test_off_surface_warning():
    mesh, wf = generate_solid(seed=1, grid_limits=(2, 2, 2))
    pose = look_at((5, 4, 3), (0, 0, 0), up=(0, 0, 1))
    g = transform_graph(wf, pose)
    g.junctions3d[0] += 0.5  # push one junction off the surface
    m = mesh.transformed(pose)
    with pytest.warns(UserWarning, match="off the mesh"):
        label_junction_visibility(g, m)


def test_point_mesh_distance():
    mesh = TriangleMesh(vertices=[(0, 0, 0), (2, 0, 0), (0, 2, 0)], triangles=[(0, 1, 2)])
    assert point_mesh_distance((0.5, 0.5, 1.0), mesh) == pytest.approx(1.0)
    assert point_mesh_distance((0.5, 0.5, 0.0), mesh) == pytest.approx(0.0, abs=1e-12)
    assert point_mesh_distance((3.0, 0.0, 0.0), mesh) == pytest.approx(1.0)
