"""Temporal directed graphs: ingestion, export and filtration weights."""
from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np


class GraphFormatError(ValueError):
    """Raised when an edge list cannot be parsed or yields no edges."""


def _frozen(a, dtype) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TemporalDigraph:
    """Directed graph whose edges carry a timestamp.

    At most one edge is kept per ordered pair and self-loops are not allowed.
    """

    node_count: int
    sources: np.ndarray
    targets: np.ndarray
    times: np.ndarray
    label: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "sources", _frozen(self.sources, np.int64))
        object.__setattr__(self, "targets", _frozen(self.targets, np.int64))
        object.__setattr__(self, "times", _frozen(self.times, np.float64))
        n = self.node_count
        if not (len(self.sources) == len(self.targets) == len(self.times)):
            raise ValueError("edge arrays have different lengths")
        if len(self.sources) and (
            self.sources.min() < 0 or self.targets.min() < 0
            or self.sources.max() >= n or self.targets.max() >= n
        ):
            raise ValueError("node id out of range")
        if np.any(self.sources == self.targets):
            raise ValueError("self-loops are not allowed")
        if len(set(zip(self.sources.tolist(), self.targets.tolist()))) != len(self.sources):
            raise ValueError("duplicate (source, target) pair")
        if not np.all(np.isfinite(self.times)):
            raise ValueError("non-finite timestamp")

    @property
    def edge_count(self) -> int:
        return len(self.sources)

    def edges(self) -> Iterable[Tuple[int, int, float]]:
        return zip(self.sources.tolist(), self.targets.tolist(), self.times.tolist())

    @classmethod
    def from_edges(cls, edges: Iterable[Tuple[int, int, float]],
                   node_count: Optional[int] = None,
                   label: Optional[int] = None) -> "TemporalDigraph":
        """Build a graph from raw triples, dropping self-loops and keeping the
        earliest time for repeated ordered pairs. Edge order follows first
        appearance."""
        first: dict = {}
        max_id = -1
        for s, t, time in edges:
            s, t, time = int(s), int(t), float(time)
            max_id = max(max_id, s, t)
            if s == t:
                continue
            if (s, t) in first:
                first[(s, t)] = min(first[(s, t)], time)
            else:
                first[(s, t)] = time
        n = max_id + 1 if node_count is None else node_count
        pairs = list(first)
        return cls(
            node_count=n,
            sources=[p[0] for p in pairs],
            targets=[p[1] for p in pairs],
            times=[first[p] for p in pairs],
            label=label,
        )

    def reversed(self) -> "TemporalDigraph":
        return TemporalDigraph(self.node_count, self.targets, self.sources, self.times, self.label)


@dataclass(frozen=True, eq=False)
class WeightedDigraph:
    """Directed graph with filtration weights in [0, 1]; edge ids are row positions."""

    node_count: int
    sources: np.ndarray
    targets: np.ndarray
    weights: np.ndarray
    label: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "sources", _frozen(self.sources, np.int64))
        object.__setattr__(self, "targets", _frozen(self.targets, np.int64))
        object.__setattr__(self, "weights", _frozen(self.weights, np.float64))
        if not (len(self.sources) == len(self.targets) == len(self.weights)):
            raise ValueError("edge arrays have different lengths")
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("non-finite weight")

    @property
    def edge_count(self) -> int:
        return len(self.sources)

    def edges(self) -> Iterable[Tuple[int, int, float]]:
        return zip(self.sources.tolist(), self.targets.tolist(), self.weights.tolist())

    def reversed(self) -> "WeightedDigraph":
        return WeightedDigraph(self.node_count, self.targets, self.sources, self.weights, self.label)

    @classmethod
    def from_edges(cls, edges: Sequence[Tuple[int, int, float]],
                   node_count: Optional[int] = None,
                   label: Optional[int] = None) -> "WeightedDigraph":
        """Direct construction from (source, target, weight) triples, mostly for tests.

        Same dedup and self-loop rules as :meth:`TemporalDigraph.from_edges`,
        but weights are taken as given rather than normalised.
        """
        g = TemporalDigraph.from_edges(edges, node_count=node_count, label=label)
        return cls(g.node_count, g.sources, g.targets, g.times, label)


def normalize_weights(g: TemporalDigraph) -> WeightedDigraph:
    """Map edge times affinely onto [0, 1]; a constant-time graph maps to all zeros."""
    if g.edge_count == 0:
        raise GraphFormatError("cannot normalise a graph without edges")
    t = g.times
    lo, hi = t.min(), t.max()
    if hi > lo:
        w = (t - lo) / (hi - lo)
    else:
        w = np.zeros_like(t)
    return WeightedDigraph(g.node_count, g.sources, g.targets, w, g.label)


def _parse_node(tok: str):
    try:
        return int(tok)
    except ValueError:
        return tok


def parse_edge_list(text: str, *, source: str = "<string>",
                    label: Optional[int] = None) -> TemporalDigraph:
    declared_nodes = None
    raw = []
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            body = stripped[1:].split()
            if len(body) == 2 and body[0] == "nodes":
                try:
                    declared_nodes = int(body[1])
                except ValueError:
                    raise GraphFormatError(f"{source}:{lineno}: bad node header") from None
            continue
        parts = stripped.split("#", 1)[0].split()
        if len(parts) != 3:
            raise GraphFormatError(f"{source}:{lineno}: expected 'source target time'")
        try:
            time = float(parts[2])
        except ValueError:
            raise GraphFormatError(f"{source}:{lineno}: bad timestamp {parts[2]!r}") from None
        if not np.isfinite(time):
            raise GraphFormatError(f"{source}:{lineno}: non-finite timestamp")
        raw.append((_parse_node(parts[0]), _parse_node(parts[1]), time))

    ids = {x for s, t, _ in raw for x in (s, t)}
    if declared_nodes is not None:
        if not all(isinstance(x, int) and 0 <= x < declared_nodes for x in ids):
            raise GraphFormatError(f"{source}: node id outside declared range")
        index = {x: x for x in ids}
        n = declared_nodes
    else:
        ordered = sorted(ids, key=lambda x: (isinstance(x, str), x))
        index = {x: i for i, x in enumerate(ordered)}
        n = len(ordered)
    g = TemporalDigraph.from_edges(
        ((index[s], index[t], time) for s, t, time in raw), node_count=n, label=label)
    if g.edge_count == 0:
        raise GraphFormatError(f"{source}: no edges")
    return g


def read_labels(path: os.PathLike) -> dict:
    """Read a sidecar label file of ``graph_id label`` lines."""
    labels = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(f"{path}:{lineno}: expected 'graph_id label'")
        try:
            labels[parts[0]] = int(parts[1])
        except ValueError:
            raise GraphFormatError(f"{path}:{lineno}: label must be an integer") from None
    return labels


LABEL_FILE = "labels.txt"


def load_edge_list(path: os.PathLike, has_labels: bool = False) -> TemporalDigraph:
    """Load a whitespace-separated ``source target time`` file.

    Node ids are re-indexed densely in sorted order unless a ``# nodes N``
    header is present, in which case ids are kept verbatim. With
    ``has_labels`` the label is looked up by file stem in ``labels.txt``
    beside the file.
    """
    path = Path(path)
    label = None
    if has_labels:
        labels = read_labels(path.parent / LABEL_FILE)
        if path.stem not in labels:
            raise GraphFormatError(f"{path}: no label for graph id {path.stem!r}")
        label = labels[path.stem]
    return parse_edge_list(path.read_text(), source=str(path), label=label)


def format_edge_list(g: TemporalDigraph) -> str:
    lines = [f"# nodes {g.node_count}"]
    lines += [f"{s} {t} {time!r}" for s, t, time in g.edges()]
    return "\n".join(lines) + "\n"


def write_edge_list(g: TemporalDigraph, path: os.PathLike) -> None:
    Path(path).write_text(format_edge_list(g))


def write_dataset(graphs: Sequence[TemporalDigraph], directory: os.PathLike,
                  prefix: str = "graph") -> list:
    """Write graphs as ``<prefix>_<i>.tsv`` plus a label sidecar; returns the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    width = max(4, len(str(len(graphs))))
    paths, label_lines = [], []
    for i, g in enumerate(graphs):
        gid = f"{prefix}_{i:0{width}d}"
        p = directory / f"{gid}.tsv"
        write_edge_list(g, p)
        paths.append(p)
        if g.label is not None:
            label_lines.append(f"{gid} {g.label}")
    if label_lines:
        (directory / LABEL_FILE).write_text("\n".join(label_lines) + "\n")
    return paths


def load_dataset(directory: os.PathLike) -> list:
    """Load every ``*.tsv`` in a directory (sorted by name), with labels if present."""
    directory = Path(directory)
    has_labels = (directory / LABEL_FILE).exists()
    files = sorted(directory.glob("*.tsv"))
    if not files:
        raise GraphFormatError(f"{directory}: no .tsv graphs found")
    return [load_edge_list(p, has_labels=has_labels) for p in files]
