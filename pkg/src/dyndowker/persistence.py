"""Exact 0- and 1-dimensional persistence of Dowker filtrations.

PD0 comes from a union-find pass with the elder rule. PD1 comes from a mod-2
coboundary reduction over edge columns; edges that merged components in the
union-find pass are cleared, and most remaining columns resolve as apparent
pairs without any column addition.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, List, NamedTuple, Optional, Tuple

import numpy as np

from .dowker import DowkerSkeleton, build_skeleton
from .graph import WeightedDigraph
from .linegraph import SINK, SOURCE, check_kind

PAIRED = "paired"
UNPAIRED = "unpaired"
DISAPPEARING = "disappearing"


class PDPoint(NamedTuple):
    birth: float
    death: Optional[float]  # None is an infinite death

    @property
    def essential(self) -> bool:
        return self.death is None

    @property
    def persistence(self) -> float:
        return float("inf") if self.death is None else self.death - self.birth

    def sort_key(self):
        return (self.birth, self.death is None, 0.0 if self.death is None else self.death)

    def to_json(self):
        return [self.birth, "inf" if self.death is None else self.death]


@dataclass(frozen=True)
class PersistenceDiagram:
    dim: int
    points: Tuple[PDPoint, ...]

    def __post_init__(self):
        pts = tuple(sorted((PDPoint(float(b), None if d is None else float(d))
                            for b, d in self.points), key=PDPoint.sort_key))
        for p in pts:
            if p.death is not None and p.death < p.birth:
                raise ValueError(f"death before birth: {p}")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def positive(self) -> "PersistenceDiagram":
        """Drop zero-persistence points."""
        return PersistenceDiagram(self.dim, tuple(p for p in self.points if p.death != p.birth))

    def multiset(self) -> Counter:
        return Counter(self.points)

    def as_array(self, cap: Optional[float] = 1.0) -> np.ndarray:
        """``(n, 2)`` float array; infinite deaths become ``cap``."""
        if cap is None:
            cap = np.inf
        arr = np.array([(p.birth, cap if p.death is None else p.death) for p in self.points],
                       dtype=np.float64)
        return arr.reshape(-1, 2)

    def to_json(self) -> dict:
        return {"dim": self.dim, "points": [p.to_json() for p in self.points]}

    @classmethod
    def from_json(cls, obj: dict) -> "PersistenceDiagram":
        pts = []
        for b, d in obj["points"]:
            pts.append((float(b), None if d in ("inf", None) else float(d)))
        return cls(int(obj["dim"]), tuple(pts))


class EdgePoint(NamedTuple):
    point: PDPoint
    cls: str


@dataclass(frozen=True)
class EdgePointMap:
    """One 0-dimensional diagram point per original edge id."""

    entries: Tuple[EdgePoint, ...]

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, eid: int) -> EdgePoint:
        return self.entries[eid]

    def classes(self) -> List[str]:
        return [e.cls for e in self.entries]

    def as_array(self, cap: float = 1.0) -> np.ndarray:
        return np.array([(e.point.birth, cap if e.point.death is None else e.point.death)
                         for e in self.entries], dtype=np.float64).reshape(-1, 2)

    def to_json(self) -> dict:
        return {str(i): {"point": e.point.to_json(), "class": e.cls}
                for i, e in enumerate(self.entries)}


class _UnionFind:
    """Union-find keyed by vertex id, where each root remembers its oldest vertex."""

    def __init__(self):
        self.parent: Dict[int, int] = {}
        self.key: Dict[int, tuple] = {}

    def add(self, v, key):
        self.parent[v] = v
        self.key[v] = key

    def find(self, v):
        parent = self.parent
        root = v
        while parent[root] != root:
            root = parent[root]
        while parent[v] != root:
            parent[v], v = root, parent[v]
        return root


def _pd0_pass(sk: DowkerSkeleton):
    """Union-find over the skeleton in filtration order.

    Returns per-vertex births and deaths (``None`` for essential classes) and
    a boolean mask over edge simplices marking those that merged components.
    """
    uf = _UnionFind()
    birth: Dict[int, float] = {}
    death: Dict[int, Optional[float]] = {}
    # vertex keys are fixed at birth, so adding every vertex up front is
    # equivalent to interleaving them with edges
    for (v,), x in zip(sk.cells[0].tolist(), sk.values[0].tolist()):
        uf.add(v, (x, v))
        birth[v] = x
        death[v] = None
    merging = np.zeros(sk.count(1), dtype=bool)
    for i, ((a, b), x) in enumerate(zip(sk.cells[1].tolist(), sk.values[1].tolist())):
        ra, rb = uf.find(a), uf.find(b)
        if ra == rb:
            continue
        # elder rule: the root with the larger (birth, vertex) key dies
        if uf.key[ra] > uf.key[rb]:
            ra, rb = rb, ra
        death[rb] = x
        uf.parent[rb] = ra
        merging[i] = True
    return birth, death, merging


def pd0(g: WeightedDigraph, kind: str = SINK,
        skeleton: Optional[DowkerSkeleton] = None) -> PersistenceDiagram:
    sk = skeleton if skeleton is not None else build_skeleton(g, kind)
    birth, death, _ = _pd0_pass(sk)
    return PersistenceDiagram(0, tuple((birth[v], death[v]) for v in birth))


def _classify(t: float, d: Optional[float]) -> str:
    if d is None:
        return UNPAIRED
    return PAIRED if d > t else DISAPPEARING


def pd0_with_edge_map(g: WeightedDigraph, kind: str = SINK,
                      skeleton: Optional[DowkerSkeleton] = None, _pass=None
                      ) -> Tuple[PersistenceDiagram, EdgePointMap]:
    """PD0 of the Dowker filtration plus the per-edge point assignment.

    Edges are scanned by ``(weight, edge id)``. The first edge touching a
    complex vertex (its source for ``sink``, its target for ``source``)
    inherits that vertex's point; every other edge gets ``(t, t)``.
    """
    check_kind(kind)
    sk = skeleton if skeleton is not None else build_skeleton(g, kind)
    birth, death, _ = _pass if _pass is not None else _pd0_pass(sk)
    diagram = PersistenceDiagram(0, tuple((birth[v], death[v]) for v in birth))

    member = g.sources if kind == SINK else g.targets
    w = g.weights
    order = np.lexsort((np.arange(g.edge_count), w))
    entries: List[Optional[EdgePoint]] = [None] * g.edge_count
    seen = set()
    for eid in order.tolist():
        t = float(w[eid])
        v = int(member[eid])
        if v not in seen:
            seen.add(v)
            d = death[v]
            entries[eid] = EdgePoint(PDPoint(t, d), _classify(t, d))
        else:
            entries[eid] = EdgePoint(PDPoint(t, t), DISAPPEARING)
    return diagram, EdgePointMap(tuple(entries))


def _coface_lists(sk: DowkerSkeleton, n: int):
    """CSR layout of the triangles containing each edge, ascending."""
    edges, tris = sk.cells[1], sk.cells[2]
    ne, nt = len(edges), len(tris)
    if nt == 0:
        return np.zeros(ne + 1, dtype=np.int64), np.zeros(0, dtype=np.int64)
    ecode = edges[:, 0] * n + edges[:, 1]
    eorder = np.argsort(ecode)
    scode = ecode[eorder]
    faces = np.concatenate([tris[:, [0, 1]], tris[:, [0, 2]], tris[:, [1, 2]]])
    fpos = eorder[np.searchsorted(scode, faces[:, 0] * n + faces[:, 1])]
    tid = np.tile(np.arange(nt, dtype=np.int64), 3)
    order = np.lexsort((tid, fpos))
    indptr = np.zeros(ne + 1, dtype=np.int64)
    np.cumsum(np.bincount(fpos, minlength=ne), out=indptr[1:])
    return indptr, tid[order]


# below this many triangles plain Python sets beat numpy column arithmetic
SMALL_TRIANGLES = 500


def _pd1_small(sk: DowkerSkeleton, merging: List[bool]):
    """Same reduction as :func:`pd1` with columns held as Python sets."""
    eindex = {tuple(e): i for i, e in enumerate(sk.cells[1].tolist())}
    cof: List[List[int]] = [[] for _ in range(len(eindex))]
    for t, (a, b, c) in enumerate(sk.cells[2].tolist()):
        cof[eindex[(a, b)]].append(t)
        cof[eindex[(a, c)]].append(t)
        cof[eindex[(b, c)]].append(t)
    evals = sk.values[1].tolist()
    tvals = sk.values[2].tolist()
    owner: Dict[int, set] = {}
    points = []
    for e in range(len(evals) - 1, -1, -1):
        if merging[e]:
            continue
        col = set(cof[e])
        while col:
            p = min(col)
            if p not in owner:
                owner[p] = col
                points.append((evals[e], tvals[p]))
                break
            col ^= owner[p]
        else:
            points.append((evals[e], None))
    return points


def pd1(g: WeightedDigraph, kind: str = SINK,
        skeleton: Optional[DowkerSkeleton] = None, _pass=None) -> PersistenceDiagram:
    """PD1 by coboundary reduction with clearing.

    Edge columns are visited in reverse filtration order; edges that merged
    components in the PD0 pass are skipped. Each column's pivot is its
    earliest triangle, and pairs coincide with those of the boundary
    reduction.
    """
    sk = skeleton if skeleton is not None else build_skeleton(g, kind)
    _, _, merging = _pass if _pass is not None else _pd0_pass(sk)
    if sk.count(2) <= SMALL_TRIANGLES:
        return PersistenceDiagram(1, tuple(_pd1_small(sk, merging.tolist())))
    indptr, cof = _coface_lists(sk, max(g.node_count, 1))
    evals = sk.values[1].tolist()
    tvals = sk.values[2].tolist()
    merging = merging.tolist()
    owner: Dict[int, np.ndarray] = {}  # pivot triangle -> reduced coboundary, sorted
    points = []
    for e in range(len(evals) - 1, -1, -1):
        if merging[e]:
            continue
        col = cof[indptr[e]:indptr[e + 1]]
        if len(col) == 0:
            points.append((evals[e], None))
            continue
        p = int(col[0])
        while p in owner:
            col = np.setxor1d(col, owner[p], assume_unique=True)
            if len(col) == 0:
                break
            p = int(col[0])
        if len(col) == 0:
            points.append((evals[e], None))
        else:
            owner[p] = col
            points.append((evals[e], tvals[p]))
    return PersistenceDiagram(1, tuple(points))


def diagrams(g: WeightedDigraph, kind: str = SINK
             ) -> Tuple[PersistenceDiagram, PersistenceDiagram, EdgePointMap]:
    """PD0, PD1 and the edge map from a single skeleton build."""
    sk = build_skeleton(g, kind)
    shared = _pd0_pass(sk)
    d0, emap = pd0_with_edge_map(g, kind, skeleton=sk, _pass=shared)
    return d0, pd1(g, kind, skeleton=sk, _pass=shared), emap


def pd_pair(g: WeightedDigraph, kind: str = SINK
            ) -> Tuple[PersistenceDiagram, PersistenceDiagram]:
    """PD0 and PD1 from a single skeleton build and a single union-find pass."""
    sk = build_skeleton(g, kind)
    shared = _pd0_pass(sk)
    birth, death, _ = shared
    d0 = PersistenceDiagram(0, tuple((birth[v], death[v]) for v in birth))
    return d0, pd1(g, kind, skeleton=sk, _pass=shared)


class DualityReport(NamedTuple):
    pd0_match: bool
    pd1_match: bool

    def to_json(self) -> dict:
        return {"pd0_match": self.pd0_match, "pd1_match": self.pd1_match}


def check_duality(g: WeightedDigraph) -> DualityReport:
    """Compare positive-persistence sink and source diagrams as multisets."""
    si0, si1, _ = diagrams(g, SINK)
    so0, so1, _ = diagrams(g, SOURCE)
    return DualityReport(
        si0.positive().multiset() == so0.positive().multiset(),
        si1.positive().multiset() == so1.positive().multiset(),
    )


def symmetric_pd0(g: WeightedDigraph) -> PersistenceDiagram:
    """PD0 of the undirected weighted graph (vertex born at its lightest edge)."""
    pair_weight: Dict[Tuple[int, int], float] = {}
    for s, t, x in g.edges():
        key = (s, t) if s < t else (t, s)
        old = pair_weight.get(key)
        if old is None or x < old:
            pair_weight[key] = x
    vbirth: Dict[int, float] = {}
    for (a, b), x in pair_weight.items():
        for v in (a, b):
            if v not in vbirth or x < vbirth[v]:
                vbirth[v] = x
    uf = _UnionFind()
    death: Dict[int, Optional[float]] = {}
    for v in vbirth:
        uf.add(v, (vbirth[v], v))
        death[v] = None
    for (a, b), x in sorted(pair_weight.items(), key=lambda kv: (kv[1], kv[0])):
        ra, rb = uf.find(a), uf.find(b)
        if ra == rb:
            continue
        if uf.key[ra] > uf.key[rb]:
            ra, rb = rb, ra
        death[uf.key[rb][1]] = x
        uf.parent[rb] = ra
    return PersistenceDiagram(0, tuple((vbirth[v], death[v]) for v in vbirth))


def same_multiset(a: Iterable[PDPoint], b: Iterable[PDPoint]) -> bool:
    return Counter(a) == Counter(b)
