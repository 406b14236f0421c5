"""Junction AP and structural line AP, per visibility class, in 2D pixels
and 3D normalized model coordinates.

Matching is greedy in descending confidence, one GT at most once; AP is
the area under the precision envelope of the pooled PR curve (all-points
interpolation), reported as a percentage.  Detections from all samples
of a split are pooled with their confidences into a single curve per
(space, primitive, class, threshold) cell.

3D distances are measured after normalizing each sample by its own
ground truth: junction centroid to the origin, bounding-box diagonal
scaled to 1.  Predictions are normalized by the same transform, so
rescaling a prediction never helps.

Match predicates (swap here if a different convention is needed):
  2D lines: min over endpoint orderings of sum of squared endpoint
            distances <= threshold (native-resolution pixels);
  3D lines: min over orderings of max endpoint distance <= threshold;
  junctions: Euclidean distance <= threshold in either space.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .camera import lift, project
from .dataset import Manifest, deserialize_sample
from .wireframe import FLEETING, HIDDEN, VISIBLE

LINE_3D_THRESHOLDS = (0.01, 0.03, 0.05, 0.07)
JUNCTION_3D_THRESHOLDS = (0.02, 0.03, 0.05)
JUNCTION_2D_THRESHOLDS = (1.0, 2.0)
LINE_2D_THRESHOLDS = (10.0, 15.0)

JUNCTION_EVAL_CLASSES = (VISIBLE, FLEETING, HIDDEN, "all")
LINE_EVAL_CLASSES = (VISIBLE, HIDDEN, "all")

TABLE_SPECS = (
    ("lines_3d", "sAP of 3D lines", LINE_EVAL_CLASSES, LINE_3D_THRESHOLDS),
    ("junctions_3d", "AP of 3D junctions", JUNCTION_EVAL_CLASSES, JUNCTION_3D_THRESHOLDS),
    ("junctions_2d", "AP of 2D junctions (px)", JUNCTION_EVAL_CLASSES, JUNCTION_2D_THRESHOLDS),
    ("lines_2d", "sAP of 2D lines", LINE_EVAL_CLASSES, LINE_2D_THRESHOLDS),
)


class EvalError(ValueError):
    pass


def normalization_transform(junctions3d):
    """(centroid, scale) placing the centroid at the origin and making the
    junction bounding-box diagonal 1."""
    pts = np.asarray(junctions3d, dtype=float).reshape(-1, 3)
    if len(pts) < 2:
        raise EvalError("need at least 2 junctions to normalize")
    diag = float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
    if diag < 1e-12:
        raise EvalError("all junctions coincide; normalization undefined")
    return pts.mean(axis=0), 1.0 / diag


def normalize_model_scale(junctions3d, transform=None):
    """Apply (or derive) the centroid/diagonal normalization to points."""
    pts = np.asarray(junctions3d, dtype=float).reshape(-1, 3)
    if transform is None:
        transform = normalization_transform(pts)
    centroid, scale = transform
    return (pts - centroid) * scale


# ---------------------------------------------------------------------------
# matching + AP

def _junction_dist(p, g):
    return float(np.linalg.norm(np.asarray(p, float) - np.asarray(g, float)))


def _line_dist_2d(p, g):
    p1, p2 = np.asarray(p[0], float), np.asarray(p[1], float)
    g1, g2 = np.asarray(g[0], float), np.asarray(g[1], float)
    direct = float(((p1 - g1) ** 2).sum() + ((p2 - g2) ** 2).sum())
    swapped = float(((p1 - g2) ** 2).sum() + ((p2 - g1) ** 2).sum())
    return min(direct, swapped)


def _line_dist_3d(p, g):
    p1, p2 = np.asarray(p[0], float), np.asarray(p[1], float)
    g1, g2 = np.asarray(g[0], float), np.asarray(g[1], float)
    direct = max(float(np.linalg.norm(p1 - g1)), float(np.linalg.norm(p2 - g2)))
    swapped = max(float(np.linalg.norm(p1 - g2)), float(np.linalg.norm(p2 - g1)))
    return min(direct, swapped)


def greedy_match(predictions, ground_truth, threshold, dist_fn):
    """(scores, tp flags) for one sample's detections.

    predictions: [(geometry, confidence)], descending-confidence greedy,
    stable under input order; each GT matches at most one prediction.
    """
    order = sorted(range(len(predictions)), key=lambda i: -predictions[i][1])
    matched = [False] * len(ground_truth)
    scores = np.empty(len(predictions))
    tp = np.zeros(len(predictions), dtype=bool)
    for rank, i in enumerate(order):
        geom, conf = predictions[i]
        scores[rank] = conf
        best, best_d = -1, np.inf
        for j, g in enumerate(ground_truth):
            if matched[j]:
                continue
            d = dist_fn(geom, g)
            if d < best_d:
                best, best_d = j, d
        if best >= 0 and best_d <= threshold:
            matched[best] = True
            tp[rank] = True
    return scores, tp


def average_precision(scores, tp, n_gt) -> float:
    """Envelope-interpolated AP (in [0, 100]) of pooled detections."""
    if n_gt == 0:
        if len(scores):
            warnings.warn("predictions scored against empty ground truth; AP is 0", stacklevel=2)
        return 0.0
    if len(scores) == 0:
        return 0.0
    order = np.argsort(-np.asarray(scores), kind="stable")
    tp = np.asarray(tp, dtype=bool)[order]
    cum_tp = np.cumsum(tp)
    ranks = np.arange(1, len(tp) + 1)
    precision = cum_tp / ranks
    recall = cum_tp / n_gt
    # precision envelope: non-increasing from the right
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    prev_r = 0.0
    ap = 0.0
    for r, p in zip(recall, envelope):
        if r > prev_r:
            ap += (r - prev_r) * p
            prev_r = r
    return 100.0 * ap


def junction_ap(predictions, ground_truth, threshold, class_filter=None) -> float:
    """AP for junctions of one sample set.

    predictions: [(position, confidence, class)], ground_truth:
    [(position, class)]; class_filter of None or "all" keeps everything.
    """
    preds, gts = _filter_class(predictions, ground_truth, class_filter)
    scores, tp = greedy_match(preds, gts, threshold, _junction_dist)
    return average_precision(scores, tp, len(gts))


def line_sap(predictions, ground_truth, threshold, space="2d", class_filter=None) -> float:
    """Structural AP for line segments (endpoint-distance predicate)."""
    dist_fn = _line_dist_2d if space == "2d" else _line_dist_3d
    preds, gts = _filter_class(predictions, ground_truth, class_filter)
    scores, tp = greedy_match(preds, gts, threshold, dist_fn)
    return average_precision(scores, tp, len(gts))


def _filter_class(predictions, ground_truth, class_filter):
    keep_all = class_filter in (None, "all")
    preds = [
        (geom, conf) for geom, conf, cls in predictions if keep_all or cls == class_filter
    ]
    gts = [geom for geom, cls in ground_truth if keep_all or cls == class_filter]
    return preds, gts


# ---------------------------------------------------------------------------
# dataset-level evaluation

@dataclass
class EvalReport:
    cells: dict  # table -> class -> threshold(str) -> AP
    n_samples: int = 0
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return {"n_samples": self.n_samples, "tables": self.cells, "warnings": self.warnings}

    def to_text(self) -> str:
        out = []
        for table, title, classes, thresholds in TABLE_SPECS:
            out.append(title)
            head = f"  {'class':10s}" + "".join(f"{t:>8g}" for t in thresholds)
            out.append(head)
            for cls in classes:
                row = f"  {cls:10s}"
                for t in thresholds:
                    row += f"{self.cells[table][cls][str(t)]:8.1f}"
                out.append(row)
            out.append("")
        return "\n".join(out)


def load_predictions(path) -> dict:
    """Prediction file -> {sample_id: {"junctions": [...], "lines": [...]}}."""
    records = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(records, list):
        raise EvalError("prediction file must be a JSON array of sample records")
    by_id = {}
    for rec in records:
        sid = rec["sample_id"]
        if sid in by_id:
            raise EvalError(f"duplicate sample_id {sid!r} in predictions")
        by_id[sid] = {"junctions": rec.get("junctions", []), "lines": rec.get("lines", [])}
    return by_id


def _gt_geometry(sample):
    """Per-sample ground truth in both evaluation spaces."""
    graph = sample.wireframe
    pts2d = (
        graph.junctions2d
        if graph.junctions2d is not None
        else project(graph.junctions3d, sample.intrinsics)
    )
    transform = normalization_transform(graph.junctions3d)
    pts3d = normalize_model_scale(graph.junctions3d, transform)
    junc2d = [(pts2d[j], graph.junction_class[j]) for j in range(graph.n_junctions)]
    junc3d = [(pts3d[j], graph.junction_class[j]) for j in range(graph.n_junctions)]
    lines2d = [
        ((pts2d[m], pts2d[n]), lab) for (m, n), lab in zip(graph.lines, graph.line_visibility)
    ]
    lines3d = [
        ((pts3d[m], pts3d[n]), lab) for (m, n), lab in zip(graph.lines, graph.line_visibility)
    ]
    return {"junc2d": junc2d, "junc3d": junc3d, "lines2d": lines2d, "lines3d": lines3d, "transform": transform}


def _pred_geometry(pred, sample, transform):
    """Predictions in both spaces; depth-bearing entries are lifted with
    the sample intrinsics (x, y pixels + z depth)."""
    K = sample.intrinsics

    def lift_point(p):
        return normalize_model_scale(lift(p[0], p[1], p[2], K).reshape(1, 3), transform)[0]

    junc2d, junc3d = [], []
    for j in pred["junctions"]:
        cls = j.get("class", VISIBLE)
        conf = float(j.get("score", 1.0))
        junc2d.append((np.array([j["x"], j["y"]], float), conf, cls))
        if j.get("z") is not None:
            junc3d.append((lift_point((j["x"], j["y"], j["z"])), conf, cls))
    lines2d, lines3d = [], []
    for ln in pred["lines"]:
        cls = ln.get("class", VISIBLE)
        conf = float(ln.get("score", 1.0))
        p1, p2 = list(ln["p1"]), list(ln["p2"])
        lines2d.append(((np.array(p1[:2], float), np.array(p2[:2], float)), conf, cls))
        if len(p1) >= 3 and len(p2) >= 3:
            lines3d.append(((lift_point(p1), lift_point(p2)), conf, cls))
    return {"junc2d": junc2d, "junc3d": junc3d, "lines2d": lines2d, "lines3d": lines3d}


_CELL_SOURCES = {
    "lines_3d": ("lines3d", _line_dist_3d),
    "junctions_3d": ("junc3d", _junction_dist),
    "junctions_2d": ("junc2d", _junction_dist),
    "lines_2d": ("lines2d", _junction_dist),  # placeholder, fixed below
}
_CELL_SOURCES["lines_2d"] = ("lines2d", _line_dist_2d)


def evaluate_dataset(predictions: dict, manifest: Manifest, data_root) -> EvalReport:
    """Pooled AP report over a split; predictions keyed by sample id."""
    known = set(manifest.sample_ids())
    missing = sorted(set(predictions) - known)
    if missing:
        raise EvalError(f"predictions reference sample ids missing from the manifest: {missing[:10]}")

    samples = {
        entry["sample_id"]: deserialize_sample(Path(data_root) / entry["path"])
        for entry in manifest.samples
    }
    pooled = {
        table: {cls: {str(t): {"scores": [], "tp": [], "n_gt": 0} for t in thresholds}
                for cls in classes}
        for table, _title, classes, thresholds in TABLE_SPECS
    }
    for sid, sample in samples.items():
        gt = _gt_geometry(sample)
        pred = _pred_geometry(
            predictions.get(sid, {"junctions": [], "lines": []}), sample, gt["transform"]
        )
        for table, _title, classes, thresholds in TABLE_SPECS:
            source, dist_fn = _CELL_SOURCES[table]
            for cls in classes:
                preds_f, gts_f = _filter_class(pred[source], gt[source], cls)
                for t in thresholds:
                    slot = pooled[table][cls][str(t)]
                    scores, tp = greedy_match(preds_f, gts_f, t, dist_fn)
                    slot["scores"].extend(scores.tolist())
                    slot["tp"].extend(tp.tolist())
                    slot["n_gt"] += len(gts_f)

    report_warnings = []
    cells = {}
    for table, _title, classes, thresholds in TABLE_SPECS:
        cells[table] = {}
        for cls in classes:
            cells[table][cls] = {}
            for t in thresholds:
                slot = pooled[table][cls][str(t)]
                with warnings.catch_warnings(record=True) as caught:
                    warnings.simplefilter("always")
                    ap = average_precision(
                        np.asarray(slot["scores"]), np.asarray(slot["tp"]), slot["n_gt"]
                    )
                for w in caught:
                    report_warnings.append(f"{table}/{cls}/{t}: {w.message}")
                cells[table][cls][str(t)] = ap
    return EvalReport(cells=cells, n_samples=len(samples), warnings=report_warnings)
