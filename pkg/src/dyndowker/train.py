"""Minibatch training with Adam, evaluation, and the two-class benchmark."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .graph import TemporalDigraph, WeightedDigraph, normalize_weights
from .metrics import ImageConfig, persistence_image, pie, wd
from .model import GraphInputs, ModelConfig, ModelState, init_model, joint_loss, predict, prepare
from .persistence import diagrams
from .linegraph import SINK

HISTORY_FIELDS = ("epoch", "train_loss", "test_wd0", "test_wd1", "accuracy")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 8
    lr: float = 1e-3
    label_weight: float = 1.0
    seed: int = 0
    inf_cap: float = 1.0
    test_fraction: float = 0.2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")
        if not self.lr >= 0:
            raise ValueError("learning rate must be non-negative")
        if not self.label_weight >= 0:
            raise ValueError("label_weight must be non-negative")
        if not 0 <= self.test_fraction < 1:
            raise ValueError("test_fraction must lie in [0, 1)")


@dataclass(frozen=True, eq=False)
class Sample:
    inputs: GraphInputs
    gt0: np.ndarray
    gt1: np.ndarray
    label: Optional[int]

    def as_tuple(self):
        return self.inputs, self.gt0, self.gt1, self.label


def make_sample(g, cap: float = 1.0, kind: str = SINK) -> Sample:
    """Exact diagrams become the regression targets (deaths capped at ``cap``)."""
    wg = normalize_weights(g) if isinstance(g, TemporalDigraph) else g
    d0, d1, _ = diagrams(wg, kind)
    return Sample(prepare(wg), d0.as_array(cap), d1.as_array(cap), wg.label)


def make_samples(graphs: Iterable, cap: float = 1.0) -> List[Sample]:
    return [make_sample(g, cap) for g in graphs]


def split_indices(n: int, test_fraction: float, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Seeded shuffle, then the last ``round(n * test_fraction)`` indices are held out."""
    order = np.random.default_rng([seed, 1]).permutation(n)
    n_test = int(round(n * test_fraction))
    if n_test >= n:
        n_test = n - 1
    return np.sort(order[: n - n_test]), np.sort(order[n - n_test:])


def adam_step(ms: ModelState, grads, cfg: TrainConfig) -> None:
    ms.step += 1
    b1, b2 = cfg.beta1, cfg.beta2
    c1 = 1.0 - b1 ** ms.step
    c2 = 1.0 - b2 ** ms.step
    for k in ms.params:
        g = grads[k]
        m, v = ms.moments.get(k, (np.zeros_like(g), np.zeros_like(g)))
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        ms.moments[k] = (m, v)
        if cfg.lr:
            ms.params[k] = ms.params[k] - cfg.lr * (m / c1) / (np.sqrt(v / c2) + cfg.eps)


@dataclass(frozen=True)
class Evaluation:
    wd0: float
    wd1: float
    pie0: float
    pie1: float
    accuracy: Optional[float]
    baseline_wd0: float

    def to_json(self) -> dict:
        return {"wd0": self.wd0, "wd1": self.wd1, "pie0": self.pie0, "pie1": self.pie1,
                "accuracy": self.accuracy, "baseline_wd0": self.baseline_wd0}


def evaluate(ms: ModelState, samples: Sequence[Sample], cap: float = 1.0,
             image: Optional[ImageConfig] = None) -> Evaluation:
    """Mean WD and PIE of predicted against exact diagrams, plus label accuracy.

    ``baseline_wd0`` scores the constant predictor that puts every point at
    (0.5, 0.5).
    """
    if not samples:
        return Evaluation(float("nan"), float("nan"), float("nan"), float("nan"), None, float("nan"))
    image = image or ImageConfig(cap=cap)
    wd0s, wd1s, pie0s, pie1s, base, hits, labelled = [], [], [], [], [], 0, 0
    for s in samples:
        p = predict(ms, s.inputs)
        wd0s.append(wd(p.pd0, s.gt0, cap=cap))
        wd1s.append(wd(p.pd1, s.gt1, cap=cap))
        pie0s.append(pie(persistence_image(p.pd0, image), persistence_image(s.gt0, image)))
        pie1s.append(pie(persistence_image(p.pd1, image), persistence_image(s.gt1, image)))
        base.append(wd(np.full((s.inputs.edge_count, 2), 0.5), s.gt0, cap=cap))
        if s.label is not None:
            labelled += 1
            hits += int(np.argmax(p.scores)) == s.label
    acc = hits / labelled if labelled else None
    return Evaluation(float(np.mean(wd0s)), float(np.mean(wd1s)), float(np.mean(pie0s)),
                      float(np.mean(pie1s)), acc, float(np.mean(base)))


def train(ms: ModelState, dataset: Sequence[Sample], cfg: TrainConfig = TrainConfig(),
          test: Optional[Sequence[Sample]] = None, log: Optional[io.TextIOBase] = None
          ) -> Tuple[ModelState, List[dict]]:
    """Train a copy of ``ms``; returns it with one history row per epoch.

    Without an explicit ``test`` set the data is split by ``cfg.test_fraction``.
    """
    if not dataset:
        raise ValueError("empty dataset")
    if test is None and cfg.test_fraction > 0 and len(dataset) > 1:
        tr, te = split_indices(len(dataset), cfg.test_fraction, cfg.seed)
        train_set = [dataset[i] for i in tr]
        test = [dataset[i] for i in te]
    else:
        train_set = list(dataset)
        test = list(test or [])
    ms = ms.copy()
    rng = np.random.default_rng([cfg.seed, 2])
    writer = None
    if log is not None:
        writer = csv.DictWriter(log, fieldnames=HISTORY_FIELDS, lineterminator="\n")
        writer.writeheader()
    history = []
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(len(train_set))
        losses = []
        for start in range(0, len(order), cfg.batch_size):
            batch = [train_set[i].as_tuple() for i in order[start:start + cfg.batch_size]]
            loss, grads = joint_loss(ms, batch, cfg.label_weight)
            losses.append(loss * len(batch))
            adam_step(ms, grads, cfg)
        ev = evaluate(ms, test, cfg.inf_cap) if test else None
        row = {
            "epoch": epoch,
            "train_loss": float(np.sum(losses) / len(train_set)),
            "test_wd0": ev.wd0 if ev else float("nan"),
            "test_wd1": ev.wd1 if ev else float("nan"),
            "accuracy": (ev.accuracy if ev and ev.accuracy is not None else float("nan")),
        }
        history.append(row)
        if writer is not None:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return ms, history


def history_csv(history: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=HISTORY_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in history:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def classify(ms: ModelState, samples: Sequence[Sample]) -> List[int]:
    return [int(np.argmax(predict(ms, s.inputs).scores)) for s in samples]


def cross_validate(samples: Sequence[Sample], model_cfg: ModelConfig, cfg: TrainConfig,
                   folds: int = 5) -> List[float]:
    """Per-fold test accuracy of ``folds``-fold cross-validation with a seeded split."""
    n = len(samples)
    if folds < 2 or n < folds:
        raise ValueError("need at least two folds and one sample per fold")
    order = np.random.default_rng([cfg.seed, 3]).permutation(n)
    parts = np.array_split(order, folds)
    scores = []
    for k in range(folds):
        held = set(parts[k].tolist())
        tr = [samples[i] for i in range(n) if i not in held]
        te = [samples[i] for i in sorted(held)]
        ms, _ = train(init_model(model_cfg), tr, cfg, test=[])
        pred = classify(ms, te)
        scores.append(float(np.mean([p == s.label for p, s in zip(pred, te)])))
    return scores
