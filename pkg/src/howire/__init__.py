"""Single-view holistic wireframe toolkit: dataset forge, geometry
oracles, matching loss, and the AP/sAP evaluation suite."""

from .camera import CameraIntrinsics, CameraPose, default_intrinsics, lift, look_at, project, transform_graph
from .dataset import DataSample, ForgeConfig, generate_dataset, make_sample, sample_viewpoints
from .loss import HiddenJunctionPrediction, LossBreakdown, enumerate_hidden_line_proposals, hiddentr_loss, loi_sample
from .matching import Assignment, brute_force_matching, hungarian
from .mesh import TriangleMesh
from .metrics import EvalReport, evaluate_dataset, junction_ap, line_sap, normalize_model_scale
from .render import DepthBuffer, rasterize
from .solids import VoxelSolid, generate_solid
from .visibility import label_junction_visibility, ray_occlusion_test
from .wireframe import WireframeGraph, adjacency_matrix, classify_junctions, classify_line_visibility, validate

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "CameraIntrinsics",
    "CameraPose",
    "DataSample",
    "DepthBuffer",
    "EvalReport",
    "ForgeConfig",
    "HiddenJunctionPrediction",
    "LossBreakdown",
    "TriangleMesh",
    "VoxelSolid",
    "WireframeGraph",
    "adjacency_matrix",
    "brute_force_matching",
    "classify_junctions",
    "classify_line_visibility",
    "default_intrinsics",
    "enumerate_hidden_line_proposals",
    "evaluate_dataset",
    "generate_dataset",
    "generate_solid",
    "hiddentr_loss",
    "hungarian",
    "junction_ap",
    "label_junction_visibility",
    "lift",
    "line_sap",
    "loi_sample",
    "look_at",
    "make_sample",
    "normalize_model_scale",
    "project",
    "rasterize",
    "ray_occlusion_test",
    "sample_viewpoints",
    "transform_graph",
    "validate",
]
