"""Minimal-cost bipartite assignment: O(n^3) Hungarian + exhaustive oracle.

The Hungarian solver is the potentials/augmenting-path formulation and
assigns every row when rows <= columns.  If rows exceed columns the
matrix is padded with sentinel columns and the padded assignments are
dropped, leaving a partial (still injective) mapping.

`brute_force_matching` enumerates every injection for small instances
and is the test oracle; both report the cost as the row-order sum of the
matched entries so optimal costs compare exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

BRUTE_FORCE_MAX_ROWS = 8


class MatchingError(ValueError):
    pass


@dataclass
class Assignment:
    mapping: dict  # row -> column
    cost: float

    def pairs(self):
        return sorted(self.mapping.items())


def _matched_cost(cost: np.ndarray, mapping: dict) -> float:
    total = 0.0
    for i in sorted(mapping):
        total += float(cost[i, mapping[i]])
    return total


def hungarian(cost_matrix) -> Assignment:
    """Optimal injective assignment of rows to columns, minimizing cost."""
    cost = np.asarray(cost_matrix, dtype=float)
    if cost.ndim != 2 or cost.size == 0:
        raise MatchingError(f"cost matrix must be 2-D and non-empty, got shape {cost.shape}")
    if not np.all(np.isfinite(cost)):
        raise MatchingError("cost matrix contains non-finite entries")
    rows, cols = cost.shape
    padded = 0
    if rows > cols:
        # sentinel columns soak up the surplus rows and are dropped below
        sentinel = abs(cost).max() * rows + 1.0
        pad = np.full((rows, rows - cols), sentinel)
        cost_w = np.hstack([cost, pad])
        padded = rows - cols
    else:
        cost_w = cost
    n, m = cost_w.shape

    # potentials u (rows), v (columns); match[j] = row assigned to column j
    INF = float("inf")
    u = np.zeros(n + 1)
    v = np.zeros(m + 1)
    match = np.full(m + 1, n, dtype=int)  # index n = virtual unmatched row
    for i in range(n):
        match[m] = i
        j0 = m
        minv = np.full(m, INF)
        way = np.zeros(m, dtype=int)
        used = np.zeros(m + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = match[j0]
            delta = INF
            j1 = -1
            for j in range(m):
                if used[j]:
                    continue
                cur = cost_w[i0, j] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(m + 1):
                if used[j]:
                    u[match[j]] += delta
                    v[j] -= delta
                elif minv[j] != INF:
                    minv[j] -= delta
            j0 = j1
            if match[j0] == n:
                break
        while j0 != m:
            j1 = way[j0]
            match[j0] = match[j1]
            j0 = j1

    mapping = {}
    for j in range(m):
        i = match[j]
        if i < n and j < cols:
            mapping[int(i)] = int(j)
    if padded == 0 and len(mapping) != rows:
        raise MatchingError("internal error: incomplete assignment")
    return Assignment(mapping=mapping, cost=_matched_cost(cost, mapping))


def brute_force_matching(cost_matrix) -> Assignment:
    """Exhaustive minimum over injections; ties pick the lexicographically
    smallest assignment. Only for rows <= 8."""
    cost = np.asarray(cost_matrix, dtype=float)
    if cost.ndim != 2 or cost.size == 0:
        raise MatchingError(f"cost matrix must be 2-D and non-empty, got shape {cost.shape}")
    rows, cols = cost.shape
    if rows > BRUTE_FORCE_MAX_ROWS:
        raise MatchingError(f"brute force limited to {BRUTE_FORCE_MAX_ROWS} rows, got {rows}")
    if rows > cols:
        raise MatchingError("brute force needs rows <= columns")
    if not np.all(np.isfinite(cost)):
        raise MatchingError("cost matrix contains non-finite entries")
    perms = np.asarray(list(permutations(range(cols), rows)), dtype=int)
    totals = cost[np.arange(rows)[None, :], perms].sum(axis=1)
    best = int(np.argmin(totals))  # first minimum = lexicographically smallest
    mapping = {i: int(perms[best, i]) for i in range(rows)}
    return Assignment(mapping=mapping, cost=_matched_cost(cost, mapping))
