"""Source and sink line graphs of a weighted digraph.

Nodes of both line graphs are the edge ids of the original graph. Two line
graph nodes are adjacent when the original edges share a source node (source
line graph) or a target node (sink line graph).
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import List, NamedTuple, Tuple

import numpy as np
import scipy.sparse as sp

from .graph import WeightedDigraph

SOURCE = "source"
SINK = "sink"
KINDS = (SOURCE, SINK)


def check_kind(kind: str) -> str:
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    return kind


@dataclass(frozen=True, eq=False)
class LineGraph:
    kind: str
    node_weight: np.ndarray
    pairs: Tuple[Tuple[int, int], ...]  # unordered pairs (a < b), sorted

    @property
    def node_count(self) -> int:
        return len(self.node_weight)

    @property
    def edge_count(self) -> int:
        return len(self.pairs)

    def neighbors(self) -> List[List[int]]:
        nbrs: List[List[int]] = [[] for _ in range(self.node_count)]
        for a, b in self.pairs:
            nbrs[a].append(b)
            nbrs[b].append(a)
        for row in nbrs:
            row.sort()
        return nbrs

    def adjacency(self) -> sp.csr_matrix:
        """Symmetric 0/1 adjacency matrix (float64)."""
        n = self.node_count
        if not self.pairs:
            return sp.csr_matrix((n, n), dtype=np.float64)
        a = np.array(self.pairs, dtype=np.int64)
        rows = np.concatenate([a[:, 0], a[:, 1]])
        cols = np.concatenate([a[:, 1], a[:, 0]])
        data = np.ones(len(rows), dtype=np.float64)
        return sp.csr_matrix((data, (rows, cols)), shape=(n, n))

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "nodes": [{"id": i, "weight": w} for i, w in enumerate(self.node_weight.tolist())],
            "edges": [list(p) for p in self.pairs],
        }


def _line_graph(kind: str, shared: np.ndarray, weights: np.ndarray) -> LineGraph:
    groups = defaultdict(list)
    for eid, node in enumerate(shared.tolist()):
        groups[node].append(eid)
    pairs = set()
    for members in groups.values():
        # members are already ascending edge ids
        for i, a in enumerate(members):
            for b in members[i + 1:]:
                pairs.add((a, b))
    w = np.array(weights, dtype=np.float64)
    w.setflags(write=False)
    return LineGraph(kind, w, tuple(sorted(pairs)))


def build_line_graphs(g: WeightedDigraph) -> Tuple[LineGraph, LineGraph]:
    """Return ``(source_line_graph, sink_line_graph)`` for ``g``."""
    if g.edge_count == 0:
        raise ValueError("line graphs need at least one edge")
    return (_line_graph(SOURCE, g.sources, g.weights),
            _line_graph(SINK, g.targets, g.weights))


class LineGraphStats(NamedTuple):
    nodes: int
    edges: int
    max_degree: int


def line_graph_stats(lg: LineGraph) -> LineGraphStats:
    deg = np.zeros(lg.node_count, dtype=np.int64)
    for a, b in lg.pairs:
        deg[a] += 1
        deg[b] += 1
    return LineGraphStats(lg.node_count, lg.edge_count, int(deg.max()) if len(deg) else 0)
