"""Wireframe graph model: junctions, lines, visibility partitions.

A wireframe is a graph of 3D junctions connected by straight line segments.
Each junction carries a binary visibility flag (1 = unoccluded from the
camera center) from which the line labels and the three-way junction
classification (visible / fleeting / hidden) are derived:

  * a line is hidden iff at least one of its endpoints is hidden;
  * a junction is fleeting iff it is itself visible but touches at least
    one hidden line;
  * everything else is plain visible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

VISIBLE = "visible"
FLEETING = "fleeting"
HIDDEN = "hidden"

JUNCTION_CLASSES = (VISIBLE, FLEETING, HIDDEN)
LINE_CLASSES = (VISIBLE, HIDDEN)

# lines shorter than this (length units) are rejected as degenerate
MIN_LINE_LENGTH = 1e-9


class WireframeError(ValueError):
    """Raised when a wireframe violates a structural invariant."""


def classify_line_visibility(lines, junction_visibility):
    """Label each line visible/hidden from its endpoint visibility flags.

    A line is hidden iff at least one endpoint has visibility 0.
    """
    vis = np.asarray(junction_visibility, dtype=int)
    labels = []
    for m, n in lines:
        if not (0 <= m < len(vis) and 0 <= n < len(vis)):
            raise WireframeError(f"line ({m},{n}) references junction out of range [0,{len(vis)})")
        labels.append(HIDDEN if (vis[m] == 0 or vis[n] == 0) else VISIBLE)
    return labels


def classify_junctions(junction_visibility, line_visibility, lines):
    """Three-way junction classification from visibility + line labels.

    v=0 -> hidden; v=1 with >=1 incident hidden line -> fleeting;
    otherwise visible.
    """
    vis = np.asarray(junction_visibility, dtype=int)
    touches_hidden = np.zeros(len(vis), dtype=bool)
    for (m, n), label in zip(lines, line_visibility):
        if label == HIDDEN:
            if vis[m] == 1 and vis[n] == 1:
                raise WireframeError(
                    f"line ({m},{n}) labeled hidden but both endpoints are visible"
                )
            touches_hidden[m] = True
            touches_hidden[n] = True
        elif label == VISIBLE:
            if vis[m] == 0 or vis[n] == 0:
                raise WireframeError(
                    f"line ({m},{n}) labeled visible but has a hidden endpoint"
                )
        else:
            raise WireframeError(f"unknown line label {label!r}")
    classes = []
    for j in range(len(vis)):
        if vis[j] == 0:
            classes.append(HIDDEN)
        elif touches_hidden[j]:
            classes.append(FLEETING)
        else:
            classes.append(VISIBLE)
    return classes


@dataclass
class WireframeGraph:
    """Junction/line graph with optional visibility labels.

    junctions3d : (J, 3) float array, camera- or world-frame coordinates
    junctions2d : (J, 2) float array of pixel coordinates, or None
    lines       : (L, 2) int array of endpoint indices, stored m < n
    junction_visibility : (J,) int array of {0, 1}, or None before labeling
    junction_class      : list of per-junction class strings, or None
    line_visibility     : list of per-line class strings, or None
    """

    junctions3d: np.ndarray
    lines: np.ndarray
    junctions2d: np.ndarray | None = None
    junction_visibility: np.ndarray | None = None
    junction_class: list[str] | None = field(default=None)
    line_visibility: list[str] | None = field(default=None)

    def __post_init__(self):
        self.junctions3d = np.asarray(self.junctions3d, dtype=float).reshape(-1, 3)
        self.lines = np.asarray(self.lines, dtype=int).reshape(-1, 2)
        # canonical undirected storage: smaller index first
        self.lines = np.sort(self.lines, axis=1)
        if self.junctions2d is not None:
            self.junctions2d = np.asarray(self.junctions2d, dtype=float).reshape(-1, 2)
        if self.junction_visibility is not None:
            self.junction_visibility = np.asarray(self.junction_visibility, dtype=int)

    @property
    def n_junctions(self):
        return len(self.junctions3d)

    @property
    def n_lines(self):
        return len(self.lines)

    def with_visibility(self, junction_visibility) -> "WireframeGraph":
        """Return a copy labeled from the given per-junction visibility."""
        vis = np.asarray(junction_visibility, dtype=int)
        if len(vis) != self.n_junctions:
            raise WireframeError(
                f"visibility length {len(vis)} != junction count {self.n_junctions}"
            )
        line_vis = classify_line_visibility(self.lines, vis)
        classes = classify_junctions(vis, line_vis, self.lines)
        return WireframeGraph(
            junctions3d=self.junctions3d.copy(),
            lines=self.lines.copy(),
            junctions2d=None if self.junctions2d is None else self.junctions2d.copy(),
            junction_visibility=vis.copy(),
            junction_class=classes,
            line_visibility=line_vis,
        )

    def class_counts(self):
        """(n_visible, n_fleeting, n_hidden) junction counts."""
        if self.junction_class is None:
            raise WireframeError("graph has no junction classes")
        return (
            self.junction_class.count(VISIBLE),
            self.junction_class.count(FLEETING),
            self.junction_class.count(HIDDEN),
        )


def adjacency_matrix(graph: WireframeGraph) -> np.ndarray:
    """Binary symmetric adjacency matrix of the line set, zero diagonal."""
    n = graph.n_junctions
    adj = np.zeros((n, n), dtype=np.uint8)
    for m, k in graph.lines:
        adj[m, k] = 1
        adj[k, m] = 1
    return adj


def validate(graph: WireframeGraph) -> list[str]:
    """Check every structural invariant; return a list of violations.

    An empty list means the graph is valid. Violations are diagnostic
    strings carrying the offending indices; nothing raises.
    """
    problems = []
    n = graph.n_junctions
    seen = set()
    degree = np.zeros(n, dtype=int)
    for idx, (m, k) in enumerate(graph.lines):
        if not (0 <= m < n and 0 <= k < n):
            problems.append(f"line {idx} ({m},{k}): index out of range [0,{n})")
            continue
        if m == k:
            problems.append(f"line {idx} ({m},{k}): self-loop")
            continue
        key = (min(m, k), max(m, k))
        if key in seen:
            problems.append(f"line {idx} ({m},{k}): duplicate edge")
        seen.add(key)
        degree[m] += 1
        degree[k] += 1
        length = np.linalg.norm(graph.junctions3d[m] - graph.junctions3d[k])
        if length < MIN_LINE_LENGTH:
            problems.append(f"line {idx} ({m},{k}): degenerate length {length:g}")
    for j in np.nonzero(degree == 0)[0]:
        problems.append(f"junction {j}: degree 0")

    if graph.junction_visibility is not None:
        vis = graph.junction_visibility
        if len(vis) != n:
            problems.append(f"visibility length {len(vis)} != junction count {n}")
        elif not np.all((vis == 0) | (vis == 1)):
            problems.append("visibility flags outside {0,1}")
        else:
            if graph.line_visibility is not None:
                expect = classify_line_visibility(graph.lines, vis)
                for idx, (got, want) in enumerate(zip(graph.line_visibility, expect)):
                    if got != want:
                        problems.append(f"line {idx}: label {got!r}, endpoint rule says {want!r}")
            if graph.junction_class is not None and graph.line_visibility is not None:
                try:
                    expect = classify_junctions(vis, graph.line_visibility, graph.lines)
                except WireframeError as exc:
                    problems.append(f"junction classes unrecoverable: {exc}")
                else:
                    for j, (got, want) in enumerate(zip(graph.junction_class, expect)):
                        if got != want:
                            problems.append(f"junction {j}: class {got!r}, rule says {want!r}")
    return problems
