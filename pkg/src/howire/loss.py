"""Set-prediction loss for hidden-junction slots, plus the proposal and
line-feature sampling rules that consume those slots.

A predictor emits a fixed number of junction slots (x, y pixels, depth z,
confidence c).  Ground-truth junctions are matched to slots by
minimal-cost bipartite matching; matched slots pay a confidence NLL plus
weighted L1 geometry residuals, unmatched slots pay the no-object NLL:

    matched:    -log(c) + lam_xy * |xy residual|_1 + lam_z * |z residual|
    unmatched:  -log(1 - c)

The matching cost mirrors the loss geometry terms minus the confidence,
so the assignment minimizes what it will be charged.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .matching import Assignment, MatchingError, hungarian

NUM_SLOTS = 30  # fixed slot count the predictor emits
LAMBDA_XY = 5.0
LAMBDA_Z = 0.05
CONF_EPS = 1e-7
SCORE_KEEP_THRESHOLD = 0.5

TRAINING = "training"
INFERENCE = "inference"


@dataclass
class HiddenJunctionPrediction:
    x: float
    y: float
    z: float
    c: float

    def __post_init__(self):
        if not np.all(np.isfinite([self.x, self.y, self.z, self.c])):
            raise ValueError("prediction has non-finite fields")
        if not 0.0 <= self.c <= 1.0:
            raise ValueError(f"confidence {self.c} outside [0,1]")


@dataclass
class LossBreakdown:
    total: float
    classification: float
    xy: float  # already weighted by lam_xy
    z: float  # already weighted by lam_z


def _as_slot_arrays(predictions):
    xyz = np.array([[p.x, p.y, p.z] for p in predictions], dtype=float).reshape(-1, 3)
    conf = np.array([p.c for p in predictions], dtype=float)
    return xyz, np.clip(conf, CONF_EPS, 1.0 - CONF_EPS)


def matching_cost_matrix(predictions, ground_truth, lam_xy=LAMBDA_XY, lam_z=LAMBDA_Z):
    """(|gt|, |slots|) cost: weighted geometry residuals minus confidence."""
    xyz, conf = _as_slot_arrays(predictions)
    gt = np.asarray(ground_truth, dtype=float).reshape(-1, 3)
    dxy = np.abs(gt[:, None, :2] - xyz[None, :, :2]).sum(axis=2)
    dz = np.abs(gt[:, None, 2] - xyz[None, :, 2])
    return lam_xy * dxy + lam_z * dz - conf[None, :]


def hiddentr_loss(
    predictions, ground_truth, lam_xy=LAMBDA_XY, lam_z=LAMBDA_Z
) -> LossBreakdown:
    """Matched-slot loss over all prediction slots (see module docstring)."""
    gt = np.asarray(ground_truth, dtype=float).reshape(-1, 3)
    n_slots, n_gt = len(predictions), len(gt)
    if n_slots < n_gt:
        raise MatchingError(f"{n_gt} ground-truth junctions exceed {n_slots} slots")
    xyz, conf = _as_slot_arrays(predictions)

    if n_gt == 0:
        cls = float(np.sum(-np.log(1.0 - conf)))
        return LossBreakdown(total=cls, classification=cls, xy=0.0, z=0.0)

    assignment: Assignment = hungarian(matching_cost_matrix(predictions, ground_truth, lam_xy, lam_z))
    matched_slots = set(assignment.mapping.values())
    cls = 0.0
    xy_term = 0.0
    z_term = 0.0
    for i in sorted(assignment.mapping):
        j = assignment.mapping[i]
        cls += -np.log(conf[j])
        xy_term += lam_xy * float(np.abs(gt[i, :2] - xyz[j, :2]).sum())
        z_term += lam_z * float(np.abs(gt[i, 2] - xyz[j, 2]))
    # summed in value order so the total is invariant to slot permutations
    unmatched = sorted(-np.log(1.0 - conf[j]) for j in range(n_slots) if j not in matched_slots)
    cls += sum(unmatched)
    return LossBreakdown(
        total=float(cls + xy_term + z_term),
        classification=float(cls),
        xy=xy_term,
        z=z_term,
    )


@dataclass
class LineProposals:
    """Hidden-line candidates: index pairs into kept-hidden ++ fleeting."""

    pairs: list
    kept_hidden: list  # original indices of the surviving hidden slots
    n_fleeting: int


def enumerate_hidden_line_proposals(
    hidden_junctions,
    fleeting_junctions,
    mode: str,
    n_gt_hidden: int | None = None,
) -> LineProposals:
    """All unordered pairs with at least one hidden endpoint.

    training : hidden slots are first truncated to the top
               min(|slots|, 2 * n_gt_hidden) by confidence.
    inference: hidden slots with confidence < 0.5 are dropped.
    """
    n_slots = len(hidden_junctions)
    conf = np.array([p.c for p in hidden_junctions], dtype=float)
    if mode == TRAINING:
        if n_gt_hidden is None:
            raise ValueError("training mode needs n_gt_hidden")
        top = min(n_slots, 2 * int(n_gt_hidden))
        order = np.argsort(-conf, kind="stable")[:top]
        kept = sorted(int(i) for i in order)
    elif mode == INFERENCE:
        kept = [i for i in range(n_slots) if conf[i] >= SCORE_KEEP_THRESHOLD]
    else:
        raise ValueError(f"unknown mode {mode!r}")

    n_h = len(kept)
    n_f = len(fleeting_junctions)
    pairs = []
    for a in range(n_h):
        for b in range(a + 1, n_h):
            pairs.append((a, b))
    for a in range(n_h):
        for b in range(n_f):
            pairs.append((a, n_h + b))
    return LineProposals(pairs=pairs, kept_hidden=kept, n_fleeting=n_f)


def loi_sample(segment_2d, feature_grid, n_points: int) -> np.ndarray:
    """Bilinear feature samples at n uniformly spaced points on a segment.

    feature_grid is (H, W) or (H, W, C), indexed [y, x]; samples are
    concatenated in point order.  Endpoints outside the grid are clamped
    with a warning.
    """
    if n_points < 2:
        raise ValueError("need at least 2 sample points (the endpoints)")
    grid = np.asarray(feature_grid, dtype=float)
    if grid.ndim == 2:
        grid = grid[:, :, None]
    h, w = grid.shape[:2]
    (x1, y1), (x2, y2) = segment_2d
    ts = np.linspace(0.0, 1.0, n_points)
    xs = x1 + ts * (x2 - x1)
    ys = y1 + ts * (y2 - y1)
    if xs.min() < 0 or xs.max() > w - 1 or ys.min() < 0 or ys.max() > h - 1:
        warnings.warn("segment leaves the feature grid; samples are clamped", stacklevel=2)
        xs = np.clip(xs, 0, w - 1)
        ys = np.clip(ys, 0, h - 1)
    x0 = np.floor(xs).astype(int)
    y0 = np.floor(ys).astype(int)
    x1i = np.minimum(x0 + 1, w - 1)
    y1i = np.minimum(y0 + 1, h - 1)
    fx = (xs - x0)[:, None]
    fy = (ys - y0)[:, None]
    vals = (
        grid[y0, x0] * (1 - fx) * (1 - fy)
        + grid[y0, x1i] * fx * (1 - fy)
        + grid[y1i, x0] * (1 - fx) * fy
        + grid[y1i, x1i] * fx * fy
    )
    return vals.reshape(-1)
