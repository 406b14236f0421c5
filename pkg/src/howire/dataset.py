"""Dataset assembly: viewpoint sampling, sample construction, serialization,
per-split statistics, and the viewpoint-curation bookkeeping.

One sample = one rendered viewpoint of one solid: the shaded image, the
camera-frame wireframe with visibility labels, and the intrinsics.  All
randomness flows from a single integer seed, so a (seed, config) pair
reproduces the dataset byte for byte.
"""

from __future__ import annotations

import json
import os
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bvh import build_bvh
from .camera import CameraIntrinsics, CameraPose, default_intrinsics, look_at, project, transform_graph
from .mesh import TriangleMesh
from .render import rasterize, read_png, write_png
from .solids import generate_voxel_solid, solid_hash, solid_to_mesh, solid_to_wireframe
from .visibility import label_junction_visibility, self_exclusion_eps
from .wireframe import HIDDEN, WireframeGraph, validate

SCHEMA_VERSION = 1
DEFAULT_VIEWS_PER_SOLID = 24  # sparse random views checked by the volunteers
DEFAULT_MIN_VISIBLE_JUNCTIONS = 5
DEFAULT_MIN_PIXEL_SEPARATION = 2.0
DEFAULT_FILL_RANGE = (0.60, 0.85)
MAX_ELEVATION_SIN = 0.95


class DatasetError(ValueError):
    pass


class ViewRejected(Exception):
    """A candidate viewpoint failed one of the acceptance rules."""


@dataclass
class DataSample:
    sample_id: str
    wireframe: WireframeGraph  # camera frame, fully labeled
    intrinsics: CameraIntrinsics
    solid_id: int
    view_id: int
    image: np.ndarray | None = field(default=None, repr=False)

    def check(self, min_junctions: int = 1):
        problems = validate(self.wireframe)
        if problems:
            raise DatasetError(f"{self.sample_id}: invalid wireframe: {problems[:3]}")
        if self.wireframe.n_junctions < min_junctions:
            raise DatasetError(f"{self.sample_id}: fewer than {min_junctions} junctions")
        if self.image is not None:
            h, w = self.image.shape[:2]
            if (w, h) != (self.intrinsics.width, self.intrinsics.height):
                raise DatasetError(f"{self.sample_id}: image size {w}x{h} != intrinsics")


def sample_viewpoints(seed, n, radius_range, target=(0.0, 0.0, 0.0)) -> list[CameraPose]:
    """n camera poses on a sphere around `target`, deterministic per seed.

    Eye directions are uniform on the sphere with near-polar directions
    (|z-component| > 0.95) rejected; radii are uniform in radius_range.
    """
    if n < 1:
        raise DatasetError("need at least one viewpoint")
    rng = np.random.default_rng(seed)
    target = np.asarray(target, dtype=float)
    lo, hi = radius_range
    poses = []
    while len(poses) < n:
        u = rng.normal(size=3)
        norm = np.linalg.norm(u)
        if norm < 1e-9:
            continue
        u /= norm
        if abs(u[2]) > MAX_ELEVATION_SIN:
            continue
        eye = target + u * rng.uniform(lo, hi)
        poses.append(look_at(eye, target, up=(0.0, 0.0, 1.0)))
    return poses


def framing_radius_range(
    mesh: TriangleMesh, intrinsics: CameraIntrinsics, fill_range=DEFAULT_FILL_RANGE
):
    """Camera distances making the bounding sphere cover fill_range of the
    image height (larger fill -> closer camera)."""
    centroid = mesh.vertices.mean(axis=0)
    rho = float(np.linalg.norm(mesh.vertices - centroid, axis=1).max())
    lo_fill, hi_fill = fill_range
    d_near = 2.0 * intrinsics.fy * rho / (hi_fill * intrinsics.height)
    d_far = 2.0 * intrinsics.fy * rho / (lo_fill * intrinsics.height)
    return d_near, d_far


def make_sample(
    mesh_world: TriangleMesh,
    wireframe_world: WireframeGraph,
    pose: CameraPose,
    intrinsics: CameraIntrinsics,
    solid_id: int = 0,
    view_id: int = 0,
    min_visible_junctions: int = DEFAULT_MIN_VISIBLE_JUNCTIONS,
    min_pixel_separation: float = DEFAULT_MIN_PIXEL_SEPARATION,
    render: bool = True,
) -> DataSample:
    """Assemble one labeled sample; raises ViewRejected on a bad viewpoint."""
    graph = transform_graph(wireframe_world, pose)
    mesh = mesh_world.transformed(pose)
    if np.any(graph.junctions3d[:, 2] <= 0):
        raise ViewRejected("junction behind the camera")
    pts2d = project(graph.junctions3d, intrinsics)
    if (
        pts2d[:, 0].min() < 0
        or pts2d[:, 0].max() >= intrinsics.width
        or pts2d[:, 1].min() < 0
        or pts2d[:, 1].max() >= intrinsics.height
    ):
        raise ViewRejected("junction projects outside the image")
    if len(pts2d) > 1 and min_pixel_separation > 0:
        diff = pts2d[:, None, :] - pts2d[None, :, :]
        dist = np.sqrt((diff**2).sum(axis=2))
        np.fill_diagonal(dist, np.inf)
        if dist.min() < min_pixel_separation:
            raise ViewRejected(
                f"projected junctions closer than {min_pixel_separation} px (thin or degenerate view)"
            )
    bvh = build_bvh(mesh)
    flags = label_junction_visibility(graph, mesh, bvh=bvh, check_on_surface=False)
    if int(np.sum(flags == 1)) < min_visible_junctions:
        raise ViewRejected(f"fewer than {min_visible_junctions} visible junctions")
    labeled = graph.with_visibility(flags)
    labeled.junctions2d = pts2d
    image = None
    if render:
        image, _depth = rasterize(mesh, intrinsics)
    sample = DataSample(
        sample_id=f"s{solid_id:04d}_v{view_id:02d}",
        wireframe=labeled,
        intrinsics=intrinsics,
        solid_id=solid_id,
        view_id=view_id,
        image=image,
    )
    sample.check(min_junctions=min_visible_junctions)
    return sample


# ---------------------------------------------------------------------------
# serialization

def _json_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1)


def wireframe_to_dict(graph: WireframeGraph, intrinsics: CameraIntrinsics) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "junctions3d": [[float(v) for v in row] for row in graph.junctions3d],
        "lines": [[int(m), int(n)] for m, n in graph.lines],
        "junction_visibility": [int(v) for v in graph.junction_visibility],
        "junction_class": list(graph.junction_class),
        "line_visibility": list(graph.line_visibility),
        "intrinsics": intrinsics.to_dict(),
    }


def wireframe_from_dict(d: dict):
    known = {
        "schema_version",
        "junctions3d",
        "lines",
        "junction_visibility",
        "junction_class",
        "line_visibility",
        "intrinsics",
    }
    extra = set(d) - known
    if extra:
        warnings.warn(f"ignoring unknown wireframe fields: {sorted(extra)}", stacklevel=2)
    version = d.get("schema_version")
    if version != SCHEMA_VERSION:
        raise DatasetError(f"schema_version {version!r} unsupported (expected {SCHEMA_VERSION})")
    graph = WireframeGraph(
        junctions3d=np.asarray(d["junctions3d"], dtype=float),
        lines=np.asarray(d["lines"], dtype=int),
        junction_visibility=np.asarray(d["junction_visibility"], dtype=int),
        junction_class=list(d["junction_class"]),
        line_visibility=list(d["line_visibility"]),
    )
    intrinsics = CameraIntrinsics.from_dict(d["intrinsics"])
    problems = validate(graph)
    if problems:
        raise DatasetError(f"wireframe violates invariants: {problems[:3]}")
    return graph, intrinsics


def serialize_sample(sample: DataSample, directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if sample.image is None:
        raise DatasetError(f"{sample.sample_id}: cannot serialize a sample without an image")
    write_png(directory / "image.png", sample.image)
    payload = wireframe_to_dict(sample.wireframe, sample.intrinsics)
    payload["sample_id"] = sample.sample_id
    payload["solid_id"] = sample.solid_id
    payload["view_id"] = sample.view_id
    (directory / "wireframe.json").write_text(_json_dumps(payload), encoding="utf-8")


def deserialize_sample(directory) -> DataSample:
    directory = Path(directory)
    wf_path = directory / "wireframe.json"
    if not wf_path.exists():
        raise DatasetError(f"missing {wf_path}")
    text = wf_path.read_text(encoding="utf-8")
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{wf_path}: parse error at byte {exc.pos}: {exc.msg}") from exc
    sample_id = payload.pop("sample_id", directory.name)
    solid_id = payload.pop("solid_id", 0)
    view_id = payload.pop("view_id", 0)
    graph, intrinsics = wireframe_from_dict(payload)
    graph.junctions2d = project(graph.junctions3d, intrinsics)
    img_path = directory / "image.png"
    if not img_path.exists():
        raise DatasetError(f"missing {img_path}")
    image = read_png(img_path)
    sample = DataSample(
        sample_id=sample_id,
        wireframe=graph,
        intrinsics=intrinsics,
        solid_id=int(solid_id),
        view_id=int(view_id),
        image=image,
    )
    sample.check()
    return sample


@dataclass
class Manifest:
    split: str
    seed: int
    samples: list  # [{sample_id, solid_id, view_id, path}]
    config: dict = field(default_factory=dict)

    def sample_ids(self):
        return [s["sample_id"] for s in self.samples]

    def to_dict(self):
        return {
            "split": self.split,
            "seed": self.seed,
            "samples": self.samples,
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(split=d["split"], seed=d["seed"], samples=list(d["samples"]), config=dict(d.get("config", {})))


def write_manifest(manifest: Manifest, path):
    ids = manifest.sample_ids()
    if len(set(ids)) != len(ids):
        raise DatasetError("duplicate sample ids in manifest")
    Path(path).write_text(_json_dumps(manifest.to_dict()), encoding="utf-8")


def read_manifest(path) -> Manifest:
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"missing manifest {path}")
    return Manifest.from_dict(json.loads(path.read_text(encoding="utf-8")))


# ---------------------------------------------------------------------------
# generation pipeline

@dataclass
class ForgeConfig:
    data_root: Path
    seed: int = 42
    n_solids: int = 100
    views_per_solid: int = DEFAULT_VIEWS_PER_SOLID
    grid_limits: tuple = (4, 4, 4)
    split_ratio: float = 0.9
    intrinsics: CameraIntrinsics = field(default_factory=default_intrinsics)
    min_visible_junctions: int = DEFAULT_MIN_VISIBLE_JUNCTIONS
    min_pixel_separation: float = DEFAULT_MIN_PIXEL_SEPARATION
    fill_range: tuple = DEFAULT_FILL_RANGE
    render: bool = True

    def snapshot(self) -> dict:
        return {
            "seed": self.seed,
            "n_solids": self.n_solids,
            "views_per_solid": self.views_per_solid,
            "grid_limits": list(self.grid_limits),
            "split_ratio": self.split_ratio,
            "intrinsics": self.intrinsics.to_dict(),
            "min_visible_junctions": self.min_visible_junctions,
            "min_pixel_separation": self.min_pixel_separation,
            "fill_range": list(self.fill_range),
        }


def forge_solids(config: ForgeConfig):
    """Deduplicated solids: [(solid_id, mesh, wireframe)].

    Candidate solids equal to an earlier one up to the 48 cube symmetries
    are discarded and regenerated from the next derived seed.
    """
    solids = []
    seen = set()
    attempt = 0
    while len(solids) < config.n_solids:
        if attempt > config.n_solids * 50 + 100:
            raise DatasetError("solid generation stalled; grid too small for requested count?")
        voxel = generate_voxel_solid(seed=[config.seed, attempt], grid_limits=config.grid_limits)
        attempt += 1
        h = solid_hash(voxel)
        if h in seen:
            continue
        seen.add(h)
        solids.append((len(solids), solid_to_mesh(voxel), solid_to_wireframe(voxel)))
    return solids


def forge_samples(config: ForgeConfig, solid_entry):
    """All accepted view samples for one solid."""
    solid_id, mesh, wireframe = solid_entry
    radius_range = framing_radius_range(mesh, config.intrinsics, config.fill_range)
    poses = sample_viewpoints(
        seed=[config.seed, solid_id, 1],
        n=config.views_per_solid,
        radius_range=radius_range,
        target=mesh.vertices.mean(axis=0),
    )
    samples = []
    for view_id, pose in enumerate(poses):
        try:
            samples.append(
                make_sample(
                    mesh,
                    wireframe,
                    pose,
                    config.intrinsics,
                    solid_id=solid_id,
                    view_id=view_id,
                    min_visible_junctions=config.min_visible_junctions,
                    min_pixel_separation=config.min_pixel_separation,
                    render=config.render,
                )
            )
        except ViewRejected:
            continue
    return samples


def split_solids(config: ForgeConfig, solid_ids):
    """Partition solid ids into train/test (never a solid in both)."""
    rng = np.random.default_rng([config.seed, 2])
    order = list(rng.permutation(len(solid_ids)))
    n_train = int(round(config.split_ratio * len(solid_ids)))
    train = {solid_ids[i] for i in order[:n_train]}
    return {"train": sorted(train), "test": sorted(set(solid_ids) - train)}


def generate_dataset(config: ForgeConfig) -> dict:
    """Generate, serialize, and manifest the full dataset. Returns counts."""
    root = Path(config.data_root)
    root.mkdir(parents=True, exist_ok=True)
    solids = forge_solids(config)
    splits = split_solids(config, [s[0] for s in solids])
    by_id = {s[0]: s for s in solids}
    counts = {}
    for split, ids in splits.items():
        entries = []
        for solid_id in ids:
            for sample in forge_samples(config, by_id[solid_id]):
                rel = f"{split}/{sample.sample_id}"
                serialize_sample(sample, root / rel)
                entries.append(
                    {
                        "sample_id": sample.sample_id,
                        "solid_id": sample.solid_id,
                        "view_id": sample.view_id,
                        "path": rel,
                    }
                )
        manifest = Manifest(split=split, seed=config.seed, samples=entries, config=config.snapshot())
        (root / split).mkdir(parents=True, exist_ok=True)
        write_manifest(manifest, root / split / "manifest.json")
        counts[split] = {"solids": len(ids), "samples": len(entries)}
    return counts


# ---------------------------------------------------------------------------
# statistics

STAT_ROWS = ("J_vis", "J_hidden", "L_vis", "L_hidden")


def sample_counts(graph: WireframeGraph) -> dict:
    vis = graph.junction_visibility
    line_vis = graph.line_visibility
    return {
        "J_vis": int(np.sum(vis == 1)),
        "J_hidden": int(np.sum(vis == 0)),
        "L_vis": sum(1 for v in line_vis if v != HIDDEN),
        "L_hidden": sum(1 for v in line_vis if v == HIDDEN),
    }


def compute_stats(manifest: Manifest, data_root) -> dict:
    """min/max/mean/std of the four count rows over a split's samples.

    Mean and std are population statistics (divide by N).
    """
    if not manifest.samples:
        raise DatasetError(f"split {manifest.split!r} has no samples")
    rows = {r: [] for r in STAT_ROWS}
    for entry in manifest.samples:
        sample = deserialize_sample(Path(data_root) / entry["path"])
        for key, value in sample_counts(sample.wireframe).items():
            rows[key].append(value)
    table = {}
    for key, values in rows.items():
        arr = np.asarray(values, dtype=float)
        table[key] = {
            "min": float(arr.min()),
            "max": float(arr.max()),
            "mean": float(arr.mean()),
            "std": float(arr.std()),  # population
        }
    return {"split": manifest.split, "n_samples": len(manifest.samples), "rows": table}


def format_stats_table(stats_by_split: dict) -> str:
    header = f"{'':10s}" + "".join(
        f"| {s} ({stats_by_split[s]['n_samples']} samples) " for s in stats_by_split
    )
    lines = [header, "-" * len(header)]
    sub = f"{'':10s}" + "".join(
        "| " + "".join(f"{c:>8s}" for c in ("min", "max", "mean", "std")) + " "
        for _ in stats_by_split
    )
    lines.insert(1, sub)
    for row in STAT_ROWS:
        cells = f"{row:10s}"
        for split in stats_by_split:
            r = stats_by_split[split]["rows"][row]
            cells += (
                "| "
                + f"{r['min']:8.0f}{r['max']:8.0f}{r['mean']:8.2f}{r['std']:8.2f}"
                + " "
            )
        lines.append(cells)
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# curation

@dataclass
class Vote:
    view_id: str
    voter: str
    keep: bool
    timestamp: float


class CurationLog:
    """Append-only vote log; the effective vote is the last one per
    (view, voter)."""

    def __init__(self, votes=None):
        self.votes = list(votes or [])

    @classmethod
    def load(cls, path):
        votes = []
        path = Path(path)
        if path.exists():
            for line in path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                d = json.loads(line)
                votes.append(
                    Vote(
                        view_id=d["view_id"],
                        voter=d["voter"],
                        keep=bool(d["keep"]),
                        timestamp=float(d["timestamp"]),
                    )
                )
        return cls(votes)

    @staticmethod
    def append(path, vote: Vote):
        # flushed and fsynced so a crash loses at most the in-flight vote
        line = json.dumps(
            {
                "view_id": vote.view_id,
                "voter": vote.voter,
                "keep": vote.keep,
                "timestamp": vote.timestamp,
            },
            sort_keys=True,
        )
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def effective(self) -> dict:
        """{view_id: {voter: keep}} with last-wins per (view, voter)."""
        out = {}
        for v in self.votes:
            out.setdefault(v.view_id, {})[v.voter] = v.keep
        return out


def apply_curation(
    manifest: Manifest, log: CurationLog, roster, allow_partial: bool = False
) -> Manifest:
    """Drop views voted meaningless by a majority, then drop solids left
    with 3 or fewer views.

    Every view needs a vote from each of the 3 roster members; with
    allow_partial, missing votes count as keep (loudly warned).
    """
    roster = list(roster)
    if len(roster) != 3:
        raise DatasetError(f"voter roster must have exactly 3 members, got {len(roster)}")
    votes = log.effective()
    known = set(manifest.sample_ids())
    unknown = sorted(set(votes) - known)
    if unknown:
        raise DatasetError(f"votes reference unknown views: {unknown[:5]}")
    missing = []
    for sample_id in known:
        cast = votes.get(sample_id, {})
        absent = [r for r in roster if r not in cast]
        if absent:
            missing.append((sample_id, absent))
    if missing and not allow_partial:
        raise DatasetError(
            f"{len(missing)} views lack complete votes (first: {missing[0]}); "
            "re-run with allow_partial to treat missing votes as keep"
        )
    if missing:
        warnings.warn(
            f"partial curation: {len(missing)} views missing votes are treated as keep",
            stacklevel=2,
        )

    surviving = []
    for entry in manifest.samples:
        cast = votes.get(entry["sample_id"], {})
        discards = sum(1 for r in roster if not cast.get(r, True))
        if discards < 2:
            surviving.append(entry)
    per_solid = {}
    for entry in surviving:
        per_solid.setdefault(entry["solid_id"], []).append(entry)
    kept = []
    for solid_id in sorted(per_solid):
        views = per_solid[solid_id]
        if len(views) <= 3:
            continue  # too few meaningful views: drop the whole solid
        kept.extend(views)
    kept.sort(key=lambda e: e["sample_id"])
    return Manifest(split=manifest.split, seed=manifest.seed, samples=kept, config=dict(manifest.config))
