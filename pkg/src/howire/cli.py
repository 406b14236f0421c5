"""Command line entry points.

    howire generate       build the dataset (solids, views, renders, labels)
    howire stats          per-split junction/line count statistics
    howire eval           AP/sAP report for a prediction file
    howire oracle-check   matching and visibility oracle sweeps
    howire curate-serve   HTTP service for the viewpoint-curation UI
    howire curate-export  apply the vote log and write the filtered manifest

Exit codes: 0 ok, 1 oracle mismatch, 2 bad input/environment, 3 id
mismatches in eval.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .config import ConfigError, ToolConfig, load_config
from .dataset import (
    CurationLog,
    DatasetError,
    ForgeConfig,
    apply_curation,
    compute_stats,
    format_stats_table,
    generate_dataset,
    read_manifest,
    write_manifest,
    Manifest,
)
from .metrics import EvalError, evaluate_dataset, load_predictions

SPLITS = ("train", "test")


def _add_common(parser):
    parser.add_argument("--data-root", type=Path, default=None, help="dataset directory")
    parser.add_argument("--config", type=Path, default=None, help="JSON config file")
    parser.add_argument("--seed", type=int, default=None)


def build_parser():
    parser = argparse.ArgumentParser(prog="howire", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate the dataset")
    _add_common(p)
    p.add_argument("--solids", type=int, default=None, help="number of distinct solids")
    p.add_argument("--views", type=int, default=None, help="candidate views per solid")
    p.add_argument("--split-ratio", type=float, default=None, help="train fraction of solids")
    p.add_argument("--grid", type=int, nargs=3, default=None, metavar=("NX", "NY", "NZ"))

    p = sub.add_parser("stats", help="dataset statistics table")
    _add_common(p)

    p = sub.add_parser("eval", help="evaluate a prediction file")
    _add_common(p)
    p.add_argument("predictions", type=Path, help="prediction JSON file")
    p.add_argument("--split", default="test", choices=SPLITS)
    p.add_argument("--out", type=Path, default=None, help="where to write the JSON report")

    p = sub.add_parser("oracle-check", help="run the built-in oracle sweeps")
    _add_common(p)
    p.add_argument("--matching-instances", type=int, default=1000)
    p.add_argument("--visibility-solids", type=int, default=50)
    p.add_argument("--visibility-views", type=int, default=24)

    p = sub.add_parser("curate-serve", help="serve the curation UI + API")
    _add_common(p)
    p.add_argument("--bind", default=None, help="host:port")
    p.add_argument("--frontend", type=Path, default=None, help="built UI directory to serve at /")

    p = sub.add_parser("curate-export", help="apply votes and write filtered manifests")
    _add_common(p)
    p.add_argument("--allow-partial", action="store_true", help="treat missing votes as keep")
    p.add_argument("--out", type=Path, default=None, help="export file (default: <root>/export.json)")
    return parser


def _tool_config(args) -> ToolConfig:
    overrides = {
        "data_root": getattr(args, "data_root", None),
        "seed": getattr(args, "seed", None),
        "n_solids": getattr(args, "solids", None),
        "views_per_solid": getattr(args, "views", None),
        "split_ratio": getattr(args, "split_ratio", None),
        "bind": getattr(args, "bind", None),
    }
    if getattr(args, "grid", None):
        overrides["grid_limits"] = tuple(args.grid)
    if getattr(args, "allow_partial", False):
        overrides["allow_partial"] = True
    return load_config(config_file=getattr(args, "config", None), **overrides)


def cmd_generate(args) -> int:
    cfg = _tool_config(args)
    root = Path(cfg.data_root)
    try:
        root.mkdir(parents=True, exist_ok=True)
        probe = root / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        print(f"error: data root not writable: {exc}", file=sys.stderr)
        return 2
    forge = ForgeConfig(
        data_root=root,
        seed=cfg.seed,
        n_solids=cfg.n_solids,
        views_per_solid=cfg.views_per_solid,
        grid_limits=cfg.grid_limits,
        split_ratio=cfg.split_ratio,
    )
    t0 = time.time()
    counts = generate_dataset(forge)
    total = sum(c["samples"] for c in counts.values())
    parts = ", ".join(
        f"{split}: {c['solids']} solids / {c['samples']} samples" for split, c in counts.items()
    )
    print(f"generated {total} samples ({parts}) in {time.time() - t0:.1f}s -> {root}")
    return 0


def cmd_stats(args) -> int:
    cfg = _tool_config(args)
    root = Path(cfg.data_root)
    stats = {}
    for split in SPLITS:
        path = root / split / "manifest.json"
        if not path.exists():
            print(f"error: missing manifest {path}", file=sys.stderr)
            return 2
        stats[split] = compute_stats(read_manifest(path), root)
    print(format_stats_table(stats))
    out = root / "stats.json"
    out.write_text(json.dumps(stats, sort_keys=True, indent=1), encoding="utf-8")
    print(f"wrote {out}")
    return 0


def cmd_eval(args) -> int:
    cfg = _tool_config(args)
    root = Path(cfg.data_root)
    manifest_path = root / args.split / "manifest.json"
    if not manifest_path.exists():
        print(f"error: missing manifest {manifest_path}", file=sys.stderr)
        return 2
    manifest = read_manifest(manifest_path)
    try:
        predictions = load_predictions(args.predictions)
        report = evaluate_dataset(predictions, manifest, root)
    except EvalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(report.to_text())
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    out = args.out or (root / f"eval_{args.split}.json")
    out.write_text(json.dumps(report.to_dict(), sort_keys=True, indent=1), encoding="utf-8")
    print(f"wrote {out}")
    return 0


def cmd_oracle_check(args) -> int:
    from .matching import brute_force_matching, hungarian
    from .bvh import build_bvh
    from .camera import look_at, transform_graph
    from .dataset import framing_radius_range, sample_viewpoints
    from .solids import generate_solid
    from .visibility import label_junction_visibility
    from .camera import default_intrinsics

    cfg = _tool_config(args)
    rng = np.random.default_rng(cfg.seed)
    failures = 0

    n = args.matching_instances
    for k in range(n):
        rows = int(rng.integers(1, 8))
        cols = int(rng.integers(rows, 8))
        m = rng.uniform(0.0, 10.0, size=(rows, cols))
        a, b = hungarian(m), brute_force_matching(m)
        if a.cost != b.cost:
            failures += 1
            print(f"matching mismatch on instance {k}: hungarian {a.cost!r} != brute {b.cost!r}")
            print(np.array2string(m, precision=17))
    print(f"matching oracle: {n} instances, {failures} mismatches")

    intrinsics = default_intrinsics()
    vis_checked = vis_failures = 0
    for s in range(args.visibility_solids):
        mesh, wf = generate_solid(seed=[cfg.seed, 7, s], grid_limits=cfg.grid_limits)
        radius_range = framing_radius_range(mesh, intrinsics)
        poses = sample_viewpoints(
            seed=[cfg.seed, 8, s], n=args.visibility_views, radius_range=radius_range
        )
        for pose in poses:
            g = transform_graph(wf, pose)
            m = mesh.transformed(pose)
            bvh = build_bvh(m)
            naive = label_junction_visibility(g, m, check_on_surface=False)
            accel = label_junction_visibility(g, m, bvh=bvh, check_on_surface=False)
            vis_checked += len(naive)
            if not np.array_equal(naive, accel):
                vis_failures += 1
                failures += 1
                print(f"visibility mismatch: solid {s}, naive {naive}, bvh {accel}")
    print(
        f"visibility oracle: {args.visibility_solids} solids x {args.visibility_views} views, "
        f"{vis_checked} junction queries, {vis_failures} mismatches"
    )
    return 1 if failures else 0


def cmd_curate_serve(args) -> int:
    import uvicorn

    from .service import create_app

    cfg = _tool_config(args)
    host, _, port = cfg.bind.partition(":")
    app = create_app(cfg, frontend_dir=args.frontend)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8600))
    return 0


def cmd_curate_export(args) -> int:
    cfg = _tool_config(args)
    root = Path(cfg.data_root)
    log = CurationLog.load(root / "curation_log.jsonl")
    manifests = {}
    for split in SPLITS:
        path = root / split / "manifest.json"
        if path.exists():
            manifests[split] = read_manifest(path)
    known = {sid for m in manifests.values() for sid in m.sample_ids()}
    unknown = sorted({v.view_id for v in log.votes} - known)
    if unknown:
        print(f"error: votes reference unknown views: {unknown[:5]}", file=sys.stderr)
        return 2
    exported = {}
    for split, manifest in manifests.items():
        ids = set(manifest.sample_ids())
        split_log = CurationLog([v for v in log.votes if v.view_id in ids])
        try:
            filtered = apply_curation(
                manifest, split_log, cfg.voter_roster, allow_partial=cfg.allow_partial
            )
        except DatasetError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        exported[split] = filtered.to_dict()
        kept = len(filtered.samples)
        print(f"{split}: kept {kept}/{len(manifest.samples)} views")
    out = args.out or (root / "export.json")
    out.write_text(json.dumps(exported, sort_keys=True, indent=1), encoding="utf-8")
    print(f"wrote {out}")
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "stats": cmd_stats,
    "eval": cmd_eval,
    "oracle-check": cmd_oracle_check,
    "curate-serve": cmd_curate_serve,
    "curate-export": cmd_curate_export,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, DatasetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
