"""Distances between persistence diagrams and persistence images."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.special import ndtr

from .persistence import PersistenceDiagram

DIAGONAL = -1
INF_CAP = 1.0

DiagramLike = Union[PersistenceDiagram, np.ndarray, list]


def as_points(d: DiagramLike, cap: float = INF_CAP) -> np.ndarray:
    """Finite ``(n, 2)`` array of (birth, death); infinite deaths become ``cap``."""
    if isinstance(d, PersistenceDiagram):
        return d.as_array(cap)
    arr = np.asarray(d, dtype=np.float64).reshape(-1, 2).copy()
    arr[~np.isfinite(arr[:, 1]), 1] = cap
    return arr


@dataclass(frozen=True)
class Matching:
    """Optimal plan as ``(i, j)`` pairs; ``DIAGONAL`` marks a diagonal projection."""

    pairs: Tuple[Tuple[int, int], ...]

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self):
        return len(self.pairs)


def diagonal_cost(points: np.ndarray) -> np.ndarray:
    """Squared distance of each point to its orthogonal projection on the diagonal."""
    return 0.5 * (points[:, 1] - points[:, 0]) ** 2


def optimal_matching(a: np.ndarray, b: np.ndarray) -> Tuple[float, List[Tuple[int, int]]]:
    """Exact 2-Wasserstein matching between two finite point arrays.

    Returns the total squared cost and the list of matched index pairs
    (positions into ``a`` and ``b``; ``DIAGONAL`` for the diagonal).
    """
    n, m = len(a), len(b)
    if n == 0 and m == 0:
        return 0.0, []
    da, db = diagonal_cost(a), diagonal_cost(b)
    big = np.inf
    cost = np.zeros((n + m, m + n))
    if n and m:
        cost[:n, :m] = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
    # a_i -> diagonal slot i, b_j -> diagonal slot j; diagonal-to-diagonal is free
    cost[:n, m:] = big
    cost[:n, m:][np.arange(n), np.arange(n)] = da
    cost[n:, :m] = big
    cost[n:, :m][np.arange(m), np.arange(m)] = db
    rows, cols = linear_sum_assignment(cost)
    pairs = []
    costs = []
    for r, c in zip(rows.tolist(), cols.tolist()):
        if r < n and c < m:
            pairs.append((r, c))
        elif r < n:
            pairs.append((r, DIAGONAL))
        elif c < m:
            pairs.append((DIAGONAL, c))
        else:
            continue
        costs.append(float(cost[r, c]))
    # fsum is order independent, which keeps the distance exactly symmetric
    return math.fsum(costs), pairs


def wasserstein2(a: DiagramLike, b: DiagramLike, *, cap: float = INF_CAP,
                 keep_zero: bool = False) -> Tuple[float, Matching]:
    """2-Wasserstein distance with squared Euclidean ground cost.

    Zero-persistence points are ignored unless ``keep_zero`` is set; matching
    indices always refer to positions in the inputs as given.
    """
    pa, pb = as_points(a, cap), as_points(b, cap)
    ia = np.arange(len(pa))
    ib = np.arange(len(pb))
    if not keep_zero:
        ka, kb = pa[:, 1] != pa[:, 0], pb[:, 1] != pb[:, 0]
        pa, ia, pb, ib = pa[ka], ia[ka], pb[kb], ib[kb]
    total, pairs = optimal_matching(pa, pb)
    mapped = tuple(sorted(
        (int(ia[i]) if i != DIAGONAL else DIAGONAL, int(ib[j]) if j != DIAGONAL else DIAGONAL)
        for i, j in pairs))
    return float(np.sqrt(max(total, 0.0))), Matching(mapped)


def wd(a: DiagramLike, b: DiagramLike, **kw) -> float:
    return wasserstein2(a, b, **kw)[0]


@dataclass(frozen=True)
class ImageConfig:
    height: int = 20
    width: int = 20
    sigma: float = 0.05
    birth_range: Tuple[float, float] = (0.0, 1.0)
    pers_range: Tuple[float, float] = (0.0, 1.0)
    cap: float = INF_CAP

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise ValueError("image dimensions must be positive")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not (self.birth_range[1] > self.birth_range[0] and self.pers_range[1] > self.pers_range[0]):
            raise ValueError("empty image bounds")


@dataclass(frozen=True, eq=False)
class PersistenceImage:
    grid: np.ndarray  # (height, width); rows index persistence, columns birth
    birth_range: Tuple[float, float]
    pers_range: Tuple[float, float]
    sigma: float

    def to_csv(self) -> str:
        return "\n".join(",".join(repr(float(x)) for x in row) for row in self.grid) + "\n"


def _pixel_mass(edges: np.ndarray, centers: np.ndarray, sigma: float) -> np.ndarray:
    """Gaussian mass of each pixel interval, shape (n_points, n_pixels)."""
    z = (edges[None, :] - centers[:, None]) / sigma
    cdf = ndtr(z)
    return np.diff(cdf, axis=1)


def persistence_image(d: DiagramLike, cfg: Optional[ImageConfig] = None) -> PersistenceImage:
    """Rasterise a diagram in (birth, persistence) coordinates.

    Each point contributes its persistence (linear weight) times the mass of
    an isotropic Gaussian over each pixel, so the grid total equals the
    weighted Gaussian mass falling inside the bounds.
    """
    cfg = cfg or ImageConfig()
    pts = as_points(d, cfg.cap)
    grid = np.zeros((cfg.height, cfg.width))
    if len(pts):
        birth = pts[:, 0]
        pers = pts[:, 1] - pts[:, 0]
        weight = pers
        bx = np.linspace(cfg.birth_range[0], cfg.birth_range[1], cfg.width + 1)
        py = np.linspace(cfg.pers_range[0], cfg.pers_range[1], cfg.height + 1)
        mx = _pixel_mass(bx, birth, cfg.sigma)  # (n, W)
        my = _pixel_mass(py, pers, cfg.sigma)  # (n, H)
        grid = np.einsum("n,nh,nw->hw", weight, my, mx)
    return PersistenceImage(grid, cfg.birth_range, cfg.pers_range, cfg.sigma)


def pie(a: PersistenceImage, b: PersistenceImage) -> float:
    """Total squared pixel difference between two persistence images."""
    ga = a.grid if isinstance(a, PersistenceImage) else np.asarray(a)
    gb = b.grid if isinstance(b, PersistenceImage) else np.asarray(b)
    if ga.shape != gb.shape:
        raise ValueError(f"image shapes differ: {ga.shape} vs {gb.shape}")
    return float(np.sum((ga - gb) ** 2))
