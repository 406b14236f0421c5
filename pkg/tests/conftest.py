import numpy as np
import pytest

from howire.camera import default_intrinsics, look_at, project, transform_graph
from howire.dataset import ForgeConfig, deserialize_sample, generate_dataset, read_manifest
from howire.solids import generate_solid


@pytest.fixture(scope="session")
def unit_cube():
    """Unit cube centered at the origin: (mesh, wireframe) in world frame."""
    return generate_solid(seed=0, grid_limits=(1, 1, 1))


@pytest.fixture(scope="session")
def intrinsics():
    return default_intrinsics()


@pytest.fixture(scope="session")
def mini_dataset(tmp_path_factory):
    """Small generated dataset reused by dataset/metrics/cli/service tests."""
    root = tmp_path_factory.mktemp("mini_dataset")
    config = ForgeConfig(data_root=root, seed=42, n_solids=6, views_per_solid=8)
    counts = generate_dataset(config)
    return {"root": root, "counts": counts, "config": config}


def generic_cube_views(rng, n, radius=(3.0, 6.0), slab_margin=0.6):
    """Camera eyes seeing three faces of the unit cube (outside all three
    coordinate slabs); inside a slab an entire far edge is hidden and the
    7-visible/1-hidden property does not apply."""
    eyes = []
    while len(eyes) < n:
        u = rng.normal(size=3)
        norm = np.linalg.norm(u)
        if norm < 1e-9:
            continue
        eye = u / norm * rng.uniform(*radius)
        if np.min(np.abs(eye)) > slab_margin:
            eyes.append(eye)
    return eyes


def ground_truth_predictions(manifest, data_root, drop_lines=0, jitter=0.0, seed=0):
    """Prediction records copied from the ground truth (2.5D convention:
    x, y in pixels, z = camera depth)."""
    rng = np.random.default_rng(seed)
    records = []
    for entry in manifest.samples:
        sample = deserialize_sample(data_root / entry["path"])
        graph = sample.wireframe
        pts2d = graph.junctions2d
        if pts2d is None:
            pts2d = project(graph.junctions3d, sample.intrinsics)
        if jitter:
            pts2d = pts2d + rng.normal(0, jitter, size=pts2d.shape)
        junctions = []
        for j in range(graph.n_junctions):
            junctions.append(
                {
                    "x": float(pts2d[j, 0]),
                    "y": float(pts2d[j, 1]),
                    "z": float(graph.junctions3d[j, 2]),
                    "score": 1.0,
                    "class": graph.junction_class[j],
                }
            )
        lines = []
        for (m, n), lab in zip(graph.lines, graph.line_visibility):
            lines.append(
                {
                    "p1": [float(pts2d[m, 0]), float(pts2d[m, 1]), float(graph.junctions3d[m, 2])],
                    "p2": [float(pts2d[n, 0]), float(pts2d[n, 1]), float(graph.junctions3d[n, 2])],
                    "score": 1.0,
                    "class": lab,
                }
            )
        if drop_lines:
            lines = lines[:-drop_lines] if drop_lines < len(lines) else []
        records.append({"sample_id": entry["sample_id"], "junctions": junctions, "lines": lines})
    return records
