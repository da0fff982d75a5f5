"""Brute-force reference for Dowker persistence on tiny graphs.

Deliberately naive and independent from the fast path: dense weight matrix,
every vertex subset of size <= 3, exhaustive witness search, and the
textbook left-to-right column reduction over all dimensions at once.
"""
from __future__ import annotations

from itertools import combinations
from typing import Tuple

from .graph import WeightedDigraph
from .persistence import PersistenceDiagram

MAX_NODES = 12
_INF = float("inf")


class OracleTooLarge(ValueError):
    pass


def naive_oracle_pd(g: WeightedDigraph, kind: str = "sink"
                    ) -> Tuple[PersistenceDiagram, PersistenceDiagram]:
    n = g.node_count
    if n > MAX_NODES:
        raise OracleTooLarge(f"naive oracle is limited to {MAX_NODES} nodes, got {n}")
    if kind not in ("sink", "source"):
        raise ValueError(kind)

    # rel[b][w]: weight with which member b relates to witness w
    rel = [[_INF] * n for _ in range(n)]
    for s, t, x in zip(g.sources.tolist(), g.targets.tolist(), g.weights.tolist()):
        if kind == "sink":
            rel[s][t] = min(rel[s][t], x)
        else:
            rel[t][s] = min(rel[t][s], x)

    simplices = []
    for size in (1, 2, 3):
        for sigma in combinations(range(n), size):
            value = _INF
            for w in range(n):
                value = min(value, max(rel[b][w] for b in sigma))
            if value < _INF:
                simplices.append((value, size - 1, sigma))
    simplices.sort()

    index = {s[2]: i for i, s in enumerate(simplices)}
    columns = []
    for value, dim, sigma in simplices:
        if dim == 0:
            columns.append(set())
        else:
            columns.append({index[face] for face in combinations(sigma, dim)})

    low_owner = {}
    for j in range(len(columns)):
        col = columns[j]
        while col and max(col) in low_owner:
            col = col ^ columns[low_owner[max(col)]]
        columns[j] = col
        if col:
            low_owner[max(col)] = j

    points = {0: [], 1: []}
    paired_rows = set(low_owner)
    for i, (value, dim, sigma) in enumerate(simplices):
        if columns[i] or dim > 1:
            continue
        if i in paired_rows:
            death = simplices[low_owner[i]][0]
            points[dim].append((value, death))
        else:
            points[dim].append((value, None))
    return (PersistenceDiagram(0, tuple(points[0])),
            PersistenceDiagram(1, tuple(points[1])))
