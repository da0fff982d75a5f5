"""Two-branch line-graph network with edge fusion and three prediction heads.

Each layer updates an edge state on the source and sink line graphs in
parallel (self transform plus summed linear messages from neighbours, then
ReLU), and fuses the two branch states through a linear map on their
concatenation. The fused state feeds both branches of the next layer.
"""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from . import autodiff as ad
from .graph import WeightedDigraph
from .linegraph import LineGraph, build_line_graphs
from .metrics import DIAGONAL, optimal_matching

FORMAT_VERSION = 1
RELU_BIAS = 0.01


class ModelShapeError(ValueError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    hidden: int = 32
    layers: int = 3
    classes: int = 2
    share_branches: bool = False
    pooling: str = "max"
    seed: int = 0

    def __post_init__(self):
        if self.hidden < 1 or self.layers < 1 or self.classes < 1:
            raise ValueError("hidden, layers and classes must be positive")
        if self.pooling not in ("max", "mean"):
            raise ValueError("pooling must be 'max' or 'mean'")


@dataclass
class ModelState:
    config: ModelConfig
    params: Dict[str, np.ndarray]
    moments: Dict[str, Tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)
    step: int = 0

    def copy(self) -> "ModelState":
        return ModelState(self.config, {k: v.copy() for k, v in self.params.items()},
                          {k: (m.copy(), v.copy()) for k, (m, v) in self.moments.items()},
                          self.step)

    def shapes(self) -> Dict[str, Tuple[int, ...]]:
        return {k: v.shape for k, v in self.params.items()}


def _branches(cfg: ModelConfig) -> Tuple[str, str]:
    return ("br", "br") if cfg.share_branches else ("so", "si")


def init_model(cfg: ModelConfig = ModelConfig()) -> ModelState:
    """Glorot-uniform weights drawn from ``cfg.seed``.

    Biases feeding a ReLU start at ``RELU_BIAS`` so that all-zero input rows
    (the earliest edge has weight 0) do not sit exactly on the kink.
    """
    rng = np.random.default_rng(cfg.seed)
    d = cfg.hidden

    def glorot(n_in, n_out):
        limit = np.sqrt(6.0 / (n_in + n_out))
        return rng.uniform(-limit, limit, size=(n_in, n_out))

    params: Dict[str, np.ndarray] = {}
    for m in range(cfg.layers):
        d_in = 1 if m == 0 else d
        for br in dict.fromkeys(_branches(cfg)):
            params[f"layer{m}.{br}.self"] = glorot(d_in, d)
            params[f"layer{m}.{br}.msg"] = glorot(d_in, d)
            params[f"layer{m}.{br}.bias"] = np.full((1, d), RELU_BIAS)
        params[f"layer{m}.fuse.weight"] = glorot(2 * d, d)
        params[f"layer{m}.fuse.bias"] = np.full((1, d), RELU_BIAS)
    for head, out in (("pd0", 2), ("pd1", 2), ("label", cfg.classes)):
        params[f"{head}.w1"] = glorot(d, d)
        params[f"{head}.b1"] = np.full((1, d), RELU_BIAS)
        params[f"{head}.w2"] = glorot(d, out)
        params[f"{head}.b2"] = np.zeros((1, out))
    return ModelState(cfg, params)


def zero_model(cfg: ModelConfig = ModelConfig()) -> ModelState:
    ms = init_model(cfg)
    return ModelState(cfg, {k: np.zeros_like(v) for k, v in ms.params.items()})


def swap_branches(ms: ModelState) -> ModelState:
    """Exchange source and sink parameter blocks (fusion rows included)."""
    out = ms.copy()
    if ms.config.share_branches:
        # the fusion input is still ordered [source | sink]
        pass
    else:
        for m in range(ms.config.layers):
            for part in ("self", "msg", "bias"):
                a, b = f"layer{m}.so.{part}", f"layer{m}.si.{part}"
                out.params[a], out.params[b] = ms.params[b].copy(), ms.params[a].copy()
    d = ms.config.hidden
    for m in range(ms.config.layers):
        w = ms.params[f"layer{m}.fuse.weight"]
        out.params[f"layer{m}.fuse.weight"] = np.vstack([w[d:], w[:d]])
    out.moments = {}
    return out


@dataclass(frozen=True, eq=False)
class GraphInputs:
    """Everything the network needs about one graph, precomputed once."""

    graph: WeightedDigraph
    adj_so: sp.csr_matrix
    adj_si: sp.csr_matrix
    agg: sp.csr_matrix  # union neighbourhood weighted by neighbour filtration value
    h0: np.ndarray

    @property
    def edge_count(self) -> int:
        return self.graph.edge_count


def init_features(g: WeightedDigraph) -> np.ndarray:
    """Initial edge state: the filtration weight, as an ``(E, 1)`` column."""
    return np.asarray(g.weights, dtype=np.float64).reshape(-1, 1).copy()


def prepare(g: WeightedDigraph, line_graphs: Optional[Tuple[LineGraph, LineGraph]] = None
            ) -> GraphInputs:
    lg_so, lg_si = line_graphs if line_graphs is not None else build_line_graphs(g)
    a_so, a_si = lg_so.adjacency(), lg_si.adjacency()
    union = ((a_so + a_si) > 0).astype(np.float64)
    agg = (union @ sp.diags(np.asarray(g.weights, dtype=np.float64))).tocsr()
    return GraphInputs(g, a_so, a_si, agg, init_features(g))


def _as_params(ms: ModelState) -> Dict[str, ad.Tensor]:
    return {k: ad.Tensor(v) for k, v in ms.params.items()}


def _encode(p: Dict[str, ad.Tensor], cfg: ModelConfig, x: GraphInputs) -> ad.Tensor:
    so, si = _branches(cfg)
    h = ad.Tensor(x.h0)
    for m in range(cfg.layers):
        states = []
        for br, adj in ((so, x.adj_so), (si, x.adj_si)):
            msg = ad.spmm(adj, h @ p[f"layer{m}.{br}.msg"])
            states.append(ad.relu(h @ p[f"layer{m}.{br}.self"] + msg + p[f"layer{m}.{br}.bias"]))
        fused = ad.concat(states, axis=1) @ p[f"layer{m}.fuse.weight"] + p[f"layer{m}.fuse.bias"]
        h = ad.relu(fused)
    return h


def _mlp(p, head: str, h: ad.Tensor) -> ad.Tensor:
    hidden = ad.relu(h @ p[f"{head}.w1"] + p[f"{head}.b1"])
    return hidden @ p[f"{head}.w2"] + p[f"{head}.b2"]


def _pd0_head(p, h):
    return ad.sort_pairs(ad.sigmoid(_mlp(p, "pd0", h)))


def _pd1_head(p, x: GraphInputs, h):
    return ad.sort_pairs(ad.sigmoid(_mlp(p, "pd1", ad.spmm(x.agg, h))))


def _label_head(p, cfg: ModelConfig, h):
    pooled = ad.max_rows(h) if cfg.pooling == "max" else ad.mean_rows(h)
    return _mlp(p, "label", pooled)


def _check_inputs(x: GraphInputs, d_in: int = 1):
    e = x.edge_count
    if x.h0.shape != (e, d_in) or x.adj_so.shape != (e, e) or x.adj_si.shape != (e, e):
        raise ModelShapeError("line graphs and initial features disagree on edge count")


def sslgnn_forward(ms: ModelState, lg_so: LineGraph, lg_si: LineGraph,
                   h0: np.ndarray) -> np.ndarray:
    """Fused edge embeddings ``(E, hidden)`` after the last layer."""
    if lg_so.node_count != lg_si.node_count:
        raise ModelShapeError("source and sink line graphs have different node sets")
    h0 = np.asarray(h0, dtype=np.float64).reshape(-1, 1) if np.ndim(h0) == 1 else np.asarray(h0)
    if h0.shape[0] != lg_so.node_count:
        raise ModelShapeError(f"{h0.shape[0]} feature rows for {lg_so.node_count} line-graph nodes")
    x = GraphInputs(None, lg_so.adjacency(), lg_si.adjacency(), None, h0)
    return _encode(_as_params(ms), ms.config, x).value


def embed(ms: ModelState, x: GraphInputs) -> np.ndarray:
    _check_inputs(x)
    return _encode(_as_params(ms), ms.config, x).value


def predict_pd0(ms: ModelState, H: np.ndarray) -> np.ndarray:
    """One (birth, death) point per edge, birth <= death, inside [0, 1]."""
    return _pd0_head(_as_params(ms), ad.Tensor(H)).value


def predict_pd1(ms: ModelState, x, H: np.ndarray) -> np.ndarray:
    """One candidate (birth, death) point per edge from its weighted neighbourhood.

    ``x`` is either prepared :class:`GraphInputs` or the graph itself.
    """
    if isinstance(x, WeightedDigraph):
        x = prepare(x)
    return _pd1_head(_as_params(ms), x, ad.Tensor(H)).value


def predict_label(ms: ModelState, H: np.ndarray) -> np.ndarray:
    """Class scores (logits) of the pooled edge embeddings."""
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] == 0:
        raise ValueError("cannot pool an empty graph")
    return _label_head(_as_params(ms), ms.config, ad.Tensor(H)).value.reshape(-1)


@dataclass
class Prediction:
    pd0: np.ndarray
    pd1: np.ndarray
    scores: np.ndarray


def predict(ms: ModelState, x: GraphInputs) -> Prediction:
    p = _as_params(ms)
    _check_inputs(x)
    h = _encode(p, ms.config, x)
    return Prediction(_pd0_head(p, h).value, _pd1_head(p, x, h).value,
                      _label_head(p, ms.config, h).value.reshape(-1))


def wd2_term(pred: ad.Tensor, gt: np.ndarray) -> ad.Tensor:
    """Squared 2-Wasserstein distance, differentiable through a fixed matching.

    Predicted points are all kept; zero-persistence ground-truth points are
    dropped since their diagonal cost is zero.
    """
    gt = np.asarray(gt, dtype=np.float64).reshape(-1, 2)
    gt = gt[gt[:, 1] != gt[:, 0]]
    _, pairs = optimal_matching(pred.value, gt)
    to_gt = [(i, j) for i, j in pairs if i != DIAGONAL and j != DIAGONAL]
    to_diag = [i for i, j in pairs if j == DIAGONAL and i != DIAGONAL]
    gt_diag = [j for i, j in pairs if i == DIAGONAL]
    loss = ad.Tensor(0.5 * float(np.sum((gt[gt_diag, 1] - gt[gt_diag, 0]) ** 2)))
    if to_gt:
        ii = np.array([i for i, _ in to_gt])
        jj = np.array([j for _, j in to_gt])
        loss = loss + ad.square(pred[ii] - gt[jj]).sum()
    if to_diag:
        ii = np.array(to_diag)
        sel = pred[ii]
        gap = sel[:, 1] - sel[:, 0]
        loss = loss + 0.5 * ad.square(gap).sum()
    return loss


def cross_entropy(scores: ad.Tensor, label: int) -> ad.Tensor:
    return -(ad.log_softmax(scores)[0, int(label)])


class LossParts(dict):
    pass


def sample_loss(p, cfg: ModelConfig, x: GraphInputs, gt0: np.ndarray, gt1: np.ndarray,
                label: Optional[int], label_weight: float):
    h = _encode(p, cfg, x)
    w0 = wd2_term(_pd0_head(p, h), gt0)
    w1 = wd2_term(_pd1_head(p, x, h), gt1)
    loss = w0 + w1
    ce = None
    if label is not None and label_weight > 0:
        ce = cross_entropy(_label_head(p, cfg, h), label)
        loss = loss + label_weight * ce
    return loss, w0, w1, ce


def joint_loss(ms: ModelState, batch, label_weight: float = 1.0
               ) -> Tuple[float, Dict[str, np.ndarray]]:
    """Mean joint loss over ``batch`` and the gradient for every parameter.

    ``batch`` holds ``(GraphInputs, gt_pd0, gt_pd1, label)`` tuples with
    ground-truth deaths already capped.
    """
    p = {k: ad.parameter(v) for k, v in ms.params.items()}
    total = None
    for x, gt0, gt1, label in batch:
        loss, *_ = sample_loss(p, ms.config, x, gt0, gt1, label, label_weight)
        total = loss if total is None else total + loss
    total = total * (1.0 / len(batch))
    total.backward()
    grads = {k: (t.grad if t.grad is not None else np.zeros_like(t.value)) for k, t in p.items()}
    return float(total.value), grads


def loss_value(ms: ModelState, batch, label_weight: float = 1.0) -> float:
    p = _as_params(ms)
    vals = [float(sample_loss(p, ms.config, x, g0, g1, y, label_weight)[0].value)
            for x, g0, g1, y in batch]
    return float(np.mean(vals))


def save_model(ms: ModelState, path: os.PathLike) -> None:
    """Write an ``.npz`` archive with a JSON header and every tensor verbatim."""
    header = {
        "version": FORMAT_VERSION,
        "config": asdict(ms.config),
        "step": ms.step,
        "shapes": {k: list(v.shape) for k, v in ms.params.items()},
        "order": list(ms.params),
    }
    arrays = {f"param/{k}": v for k, v in ms.params.items()}
    for k, (m, v) in ms.moments.items():
        arrays[f"m/{k}"] = m
        arrays[f"v/{k}"] = v
    with open(path, "wb") as fh:
        np.savez(fh, __header__=np.array(json.dumps(header)), **arrays)


def load_model(path: os.PathLike, like: Optional[ModelState] = None) -> ModelState:
    """Read a model written by :func:`save_model`.

    With ``like`` the stored tensor shapes must match it exactly.
    """
    with np.load(path, allow_pickle=False) as z:
        header = json.loads(str(z["__header__"]))
        if header.get("version") != FORMAT_VERSION:
            raise ModelShapeError(f"unsupported model format version {header.get('version')}")
        cfg = ModelConfig(**header["config"])
        params = {k: z[f"param/{k}"].copy() for k in header["order"]}
        moments = {k: (z[f"m/{k}"].copy(), z[f"v/{k}"].copy())
                   for k in header["order"] if f"m/{k}" in z.files}
    for k, shape in header["shapes"].items():
        if list(params[k].shape) != shape:
            raise ModelShapeError(f"{k}: stored shape {params[k].shape} != header {shape}")
    if like is not None:
        want, got = like.shapes(), {k: v.shape for k, v in params.items()}
        if want != got:
            diff = sorted(k for k in set(want) | set(got) if want.get(k) != got.get(k))
            raise ModelShapeError(f"parameter shapes differ for {diff[:5]}")
    return ModelState(cfg, params, moments, header["step"])


def parameter_names(ms: ModelState) -> List[str]:
    return list(ms.params)


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-8) -> float:
    """``||a - n|| / max(||a||, ||n||, floor)`` over a whole tensor."""
    scale = max(float(np.linalg.norm(analytic)), float(np.linalg.norm(numeric)), floor)
    return float(np.linalg.norm(analytic - numeric)) / scale


def gradient_check(ms: ModelState, batch, label_weight: float = 1.0, step: float = 1e-4
                   ) -> Dict[str, float]:
    """Relative error of the tape gradient against central differences, per tensor."""
    _, grads = joint_loss(ms, batch, label_weight)
    probe = ms.copy()
    errors = {}
    for name, value in probe.params.items():
        numeric = np.zeros_like(value)
        for idx in np.ndindex(value.shape):
            old = value[idx]
            value[idx] = old + step
            up = loss_value(probe, batch, label_weight)
            value[idx] = old - step
            down = loss_value(probe, batch, label_weight)
            value[idx] = old
            numeric[idx] = (up - down) / (2 * step)
        errors[name] = relative_error(grads[name], numeric)
    return errors
