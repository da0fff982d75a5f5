"""Seeded synthetic temporal digraphs."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .graph import TemporalDigraph

FAMILIES = ("random_temporal", "diffusion_tree", "fig1b_triple", "star", "cycle")

RANDOM_LABEL = 0
DIFFUSION_LABEL = 1

# 5-node diffusion subgraph: the root shares to two nodes whose cascades
# converge, then reach a final node along two routes
TRIPLE_EDGES: Tuple[Tuple[int, int, float], ...] = (
    (0, 1, 1.0), (0, 2, 4.0), (1, 3, 2.0), (2, 3, 5.0), (3, 4, 3.0), (1, 4, 6.0),
)
TRIPLE_SWAP = (4, 5)  # edges whose timestamps trade places in G_b
TRIPLE_REVERSE = 2  # edge flipped in G_c


class GeneratorError(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    count: int = 1
    nodes: int = 10
    edges: Optional[int] = None  # defaults to 2 * nodes for random graphs
    seed: int = 0
    params: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise GeneratorError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.count < 1 or self.nodes < 1:
            raise GeneratorError("count and nodes must be positive")
        if self.edges is not None and self.edges < 1:
            raise GeneratorError("edges must be positive")


def random_temporal(nodes: int, edges: int, rng: np.random.Generator,
                    label: Optional[int] = RANDOM_LABEL) -> TemporalDigraph:
    """Uniform simple digraph with ``edges`` distinct arcs and uniform times."""
    if nodes < 2:
        raise GeneratorError("random graphs need at least two nodes")
    capacity = nodes * (nodes - 1)
    if edges > capacity:
        raise GeneratorError(f"{edges} edges do not fit in a simple digraph on {nodes} nodes")
    codes = rng.choice(capacity, size=edges, replace=False)
    src = codes // (nodes - 1)
    off = codes % (nodes - 1)
    dst = off + (off >= src)
    times = rng.random(edges)
    return TemporalDigraph(nodes, src, dst, times, label)


def diffusion_tree(nodes: int, rng: np.random.Generator,
                   label: Optional[int] = DIFFUSION_LABEL, rate: float = 1.0) -> TemporalDigraph:
    """Cascade from a root: each new node is reached by an earlier one later in time.

    Node ids are shuffled so the root carries no special id.
    """
    if nodes < 2:
        raise GeneratorError("a cascade needs at least two nodes")
    perm = rng.permutation(nodes)
    reached = np.zeros(nodes)
    src, dst, times = [], [], []
    for i in range(1, nodes):
        parent = int(rng.integers(0, i))
        reached[i] = reached[parent] + rng.exponential(1.0 / rate)
        src.append(perm[parent])
        dst.append(perm[i])
        times.append(reached[i])
    return TemporalDigraph(nodes, np.array(src), np.array(dst), np.array(times), label)


def star(k: int = 3) -> TemporalDigraph:
    """Leaves ``1..k`` each point at sink ``k + 1`` at times ``0.1 * i``; node 0 is unused."""
    if k < 1:
        raise GeneratorError("star needs at least one leaf")
    edges = [(i, k + 1, round(0.1 * i, 10)) for i in range(1, k + 1)]
    return TemporalDigraph.from_edges(edges, node_count=k + 2)


def cycle(k: int = 4) -> TemporalDigraph:
    """Ring of ``k`` members joined through ``k`` witness sinks.

    Member ``i`` and member ``i + 1`` both point at witness ``k + i`` at time
    ``0.1 * (i + 1)``, so the sink complex is a ``k``-cycle that never fills.
    """
    if k < 3:
        raise GeneratorError("cycle needs at least three members")
    edges = []
    for i in range(k):
        w = k + i
        t = round(0.1 * (i + 1), 10)
        edges.append((i, w, t))
        edges.append(((i + 1) % k, w, t))
    return TemporalDigraph.from_edges(edges, node_count=2 * k)


def fig1b_triple() -> List[TemporalDigraph]:
    """``G_a``, ``G_b`` with two timestamps swapped, and ``G_c`` with one edge reversed.

    All three share the same undirected zero-dimensional barcode but have
    different directed (sink) diagrams.
    """
    base = list(TRIPLE_EDGES)
    i, j = TRIPLE_SWAP
    swapped = list(base)
    swapped[i] = (base[i][0], base[i][1], base[j][2])
    swapped[j] = (base[j][0], base[j][1], base[i][2])
    flipped = list(base)
    s, t, x = base[TRIPLE_REVERSE]
    flipped[TRIPLE_REVERSE] = (t, s, x)
    return [TemporalDigraph.from_edges(e, node_count=5, label=k)
            for k, e in enumerate((base, swapped, flipped))]


def generate(spec: GeneratorSpec) -> List[TemporalDigraph]:
    """Deterministic dataset for ``spec``; graph ``i`` only depends on ``(seed, i)``."""
    fam = spec.family
    if fam == "fig1b_triple":
        return fig1b_triple()
    if fam == "star":
        return [star(spec.nodes) for _ in range(spec.count)]
    if fam == "cycle":
        return [cycle(spec.nodes) for _ in range(spec.count)]
    out = []
    for i in range(spec.count):
        rng = np.random.default_rng([spec.seed, i])
        if fam == "random_temporal":
            e = spec.edges if spec.edges is not None else 2 * spec.nodes
            out.append(random_temporal(spec.nodes, e, rng))
        else:
            out.append(diffusion_tree(spec.nodes, rng, rate=float(spec.params.get("rate", 1.0))))
    return out


def two_class_dataset(count: int, min_nodes: int, max_nodes: int,
                      seed: int = 0) -> List[TemporalDigraph]:
    """Alternating diffusion cascades and random digraphs with matched sizes.

    Each random graph gets the same node and edge count as a cascade would,
    so neither size nor density separates the classes.
    """
    if count < 1 or min_nodes < 2 or max_nodes < min_nodes:
        raise GeneratorError("invalid two-class dataset size")
    out = []
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        n = int(rng.integers(min_nodes, max_nodes + 1))
        if i % 2 == 0:
            out.append(diffusion_tree(n, rng))
        else:
            out.append(random_temporal(n, n - 1, rng))
    return out


def random_graphs(count: int, node_range: Tuple[int, int], edge_range: Tuple[int, int],
                  seed: int = 0) -> List[TemporalDigraph]:
    """Random digraphs with sizes drawn per graph; edges are clipped to capacity."""
    out = []
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        n = int(rng.integers(node_range[0], node_range[1] + 1))
        e = int(rng.integers(edge_range[0], edge_range[1] + 1))
        out.append(random_temporal(n, min(e, n * (n - 1)), rng, label=None))
    return out
