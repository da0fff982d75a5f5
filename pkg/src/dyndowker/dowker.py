"""Filtered 2-skeleton of the Dowker sink and source complexes.

For the sink complex a set of nodes spans a simplex at level ``delta`` when
some witness node receives an edge of weight ``<= delta`` from every member.
The source complex swaps the edge direction. The filtration value of a
simplex is therefore ``min_w max_{b in simplex} weight(b -> w)``.

Simplices are enumerated per witness and reduced with a vectorised group-min,
so the cost is dominated by ``sum_w C(deg(w), 3)``.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Dict, NamedTuple, Optional, Tuple

import numpy as np

from .graph import WeightedDigraph
from .linegraph import SINK, SOURCE, check_kind


class SkeletonTooLarge(RuntimeError):
    """Raised when the number of candidate simplices exceeds the configured cap."""


class FilteredSimplex(NamedTuple):
    vertices: Tuple[int, ...]
    value: float
    dim: int

    def sort_key(self):
        return (self.value, self.dim, self.vertices)


@dataclass(frozen=True, eq=False)
class DowkerSkeleton:
    """Simplices of dimension 0, 1 and 2, each block sorted by ``(value, vertices)``.

    ``cells[k]`` is an ``(n_k, k + 1)`` array of strictly increasing vertex
    ids and ``values[k]`` the matching filtration values.
    """

    kind: str
    cells: Tuple[np.ndarray, np.ndarray, np.ndarray]
    values: Tuple[np.ndarray, np.ndarray, np.ndarray]

    def __len__(self):
        return sum(len(v) for v in self.values)

    def count(self, dim: int) -> int:
        return len(self.values[dim])

    @cached_property
    def simplices(self) -> Tuple[FilteredSimplex, ...]:
        """All simplices in filtration order ``(value, dim, vertices)``."""
        out = []
        for dim in range(3):
            for verts, x in zip(self.cells[dim].tolist(), self.values[dim].tolist()):
                out.append(FilteredSimplex(tuple(verts), x, dim))
        out.sort(key=FilteredSimplex.sort_key)
        return tuple(out)

    def of_dim(self, dim: int):
        return [FilteredSimplex(tuple(v), x, dim)
                for v, x in zip(self.cells[dim].tolist(), self.values[dim].tolist())]

    def value_map(self) -> Dict[Tuple[int, ...], float]:
        return {s.vertices: s.value for s in self.simplices}

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "simplices": [{"v": list(s.vertices), "value": s.value, "dim": s.dim}
                          for s in self.simplices],
        }


def _orient(g: WeightedDigraph, kind: str):
    """(witness, member, weight) arrays for the requested complex."""
    check_kind(kind)
    if kind == SINK:
        return g.targets, g.sources, g.weights
    return g.sources, g.targets, g.weights


_COMBOS: Dict[Tuple[int, int], np.ndarray] = {}


def _combos(d: int, k: int) -> np.ndarray:
    key = (d, k)
    if key not in _COMBOS:
        _COMBOS[key] = np.array(list(combinations(range(d), k)), dtype=np.int64).reshape(-1, k)
    return _COMBOS[key]


def candidate_count(g: WeightedDigraph, kind: str = SINK) -> int:
    """Number of (witness, simplex) candidates the enumeration will visit."""
    wit, _, _ = _orient(g, kind)
    if len(wit) <= 64:
        deg = Counter(wit.tolist()).values()
        return sum(d + d * (d - 1) // 2 + d * (d - 1) * (d - 2) // 6 for d in deg)
    deg = np.bincount(wit, minlength=g.node_count).astype(np.int64)
    return int(np.sum(deg + deg * (deg - 1) // 2 + deg * (deg - 1) * (deg - 2) // 6))


def _group_min(cells: np.ndarray, vals: np.ndarray):
    """Deduplicate rows of ``cells`` keeping the minimum value, then sort."""
    k = cells.shape[1]
    if len(vals) == 0:
        return np.zeros((0, k), dtype=np.int64), np.zeros(0, dtype=np.float64)
    # lexsort keys: last is primary
    order = np.lexsort((vals,) + tuple(cells[:, j] for j in reversed(range(k))))
    cells, vals = cells[order], vals[order]
    first = np.ones(len(vals), dtype=bool)
    first[1:] = np.any(cells[1:] != cells[:-1], axis=1)
    cells, vals = cells[first], vals[first]
    order = np.lexsort(tuple(cells[:, j] for j in reversed(range(k))) + (vals,))
    return cells[order], vals[order]


# below this many candidates numpy call overhead outweighs vectorisation
SMALL_CANDIDATES = 2000


def _pack(k: int, best: Dict[tuple, float]):
    items = sorted(best.items(), key=lambda kv: (kv[1], kv[0]))
    cells = np.array([c for c, _ in items], dtype=np.int64).reshape(-1, k + 1)
    vals = np.array([x for _, x in items], dtype=np.float64)
    cells.setflags(write=False)
    vals.setflags(write=False)
    return cells, vals


def _build_small(kind: str, wit, mem, w) -> DowkerSkeleton:
    by_witness: Dict[int, list] = {}
    for a, b, x in zip(wit.tolist(), mem.tolist(), w.tolist()):
        by_witness.setdefault(a, []).append((b, x))
    b0: Dict[tuple, float] = {}
    b1: Dict[tuple, float] = {}
    b2: Dict[tuple, float] = {}
    for members in by_witness.values():
        members.sort()
        d = len(members)
        for i in range(d):
            u, xu = members[i]
            old = b0.get((u,))
            if old is None or xu < old:
                b0[(u,)] = xu
            for j in range(i + 1, d):
                v, xv = members[j]
                xuv = xu if xu > xv else xv
                key = (u, v)
                old = b1.get(key)
                if old is None or xuv < old:
                    b1[key] = xuv
                for k in range(j + 1, d):
                    z, xz = members[k]
                    x = xuv if xuv > xz else xz
                    key = (u, v, z)
                    old = b2.get(key)
                    if old is None or x < old:
                        b2[key] = x
    packed = [_pack(k, table) for k, table in enumerate((b0, b1, b2))]
    return DowkerSkeleton(kind, tuple(c for c, _ in packed), tuple(v for _, v in packed))


def build_skeleton(g: WeightedDigraph, kind: str = SINK,
                   max_candidates: Optional[int] = None) -> DowkerSkeleton:
    """All simplices of dimension <= 2 with a finite min-max witness value.

    ``max_candidates`` bounds the number of witness/simplex candidates and
    raises :class:`SkeletonTooLarge` beyond it.
    """
    wit, mem, w = _orient(g, kind)
    total = candidate_count(g, kind)
    if max_candidates is not None and total > max_candidates:
        raise SkeletonTooLarge(f"{total} candidate simplices exceed cap {max_candidates}")
    if total <= SMALL_CANDIDATES:
        return _build_small(kind, wit, mem, w)
    return _build_vectorised(kind, wit, mem, w)


def _build_vectorised(kind: str, wit, mem, w) -> DowkerSkeleton:
    order = np.lexsort((mem, wit))
    wit, mem, w = wit[order], mem[order], w[order]
    starts = np.flatnonzero(np.r_[True, wit[1:] != wit[:-1]]) if len(wit) else np.zeros(0, int)
    degrees = np.diff(np.r_[starts, len(wit)])

    cells = [[mem.reshape(-1, 1)], [], []]
    vals = [[w], [], []]
    for d in np.unique(degrees).tolist():
        if d < 2:
            continue
        # rows: one witness each, members ascending by id
        idx = starts[degrees == d][:, None] + np.arange(d)[None, :]
        m, x = mem[idx], w[idx]
        for k in (2, 3):
            if d < k:
                continue
            c = _combos(d, k)
            cells[k - 1].append(m[:, c].reshape(-1, k))
            vals[k - 1].append(x[:, c].max(axis=2).reshape(-1))

    out_cells, out_vals = [], []
    for k in range(3):
        if cells[k]:
            cc = np.concatenate(cells[k]).astype(np.int64)
            vv = np.concatenate(vals[k]).astype(np.float64)
        else:
            cc = np.zeros((0, k + 1), dtype=np.int64)
            vv = np.zeros(0, dtype=np.float64)
        cc, vv = _group_min(cc, vv)
        cc.setflags(write=False)
        vv.setflags(write=False)
        out_cells.append(cc)
        out_vals.append(vv)
    return DowkerSkeleton(kind, tuple(out_cells), tuple(out_vals))


def skeleton_at(sk: DowkerSkeleton, delta: float) -> DowkerSkeleton:
    """Sub-skeleton of simplices present at filtration level ``delta``."""
    keep = [v <= delta for v in sk.values]
    return DowkerSkeleton(sk.kind,
                          tuple(c[m] for c, m in zip(sk.cells, keep)),
                          tuple(v[m] for v, m in zip(sk.values, keep)))


__all__ = [
    "SINK", "SOURCE", "FilteredSimplex", "DowkerSkeleton", "SkeletonTooLarge",
    "build_skeleton", "skeleton_at", "candidate_count",
]
