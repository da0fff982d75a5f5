"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 bad input data, 3 a checked
invariant failed.
"""
from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path
from typing import Any, Callable, List, Optional, Sequence

import numpy as np

from . import generators as gen
from .graph import (GraphFormatError, WeightedDigraph, load_dataset, load_edge_list,
                    normalize_weights, write_dataset)
from .linegraph import KINDS, SINK, build_line_graphs
from .metrics import ImageConfig, persistence_image, wasserstein2
from .model import ModelConfig, ModelShapeError, init_model, load_model, predict, prepare, save_model
from .oracle import naive_oracle_pd
from .persistence import PersistenceDiagram, check_duality, diagrams, pd_pair
from .train import TrainConfig, cross_validate, evaluate, history_csv, make_samples, train

CONFIG_ENV = "DYNDOWKER_CONFIG"
CONFIG_SECTION = "dyndowker"

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class InvariantError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


class Settings:
    """Flag values with config-file fallbacks; an explicit flag always wins."""

    def __init__(self, args: argparse.Namespace, config: configparser.SectionProxy):
        self.args = args
        self.config = config

    def get(self, name: str, cast: Callable = str, default: Any = None):
        val = getattr(self.args, name, None)
        if val is not None:
            return val
        if name in self.config:
            raw = self.config[name]
            if cast is bool:
                return self.config.getboolean(name)
            return cast(raw)
        return default


def load_config(path: Optional[str]) -> configparser.SectionProxy:
    cp = configparser.ConfigParser()
    path = path or os.environ.get(CONFIG_ENV)
    if path:
        if not Path(path).is_file():
            raise GraphFormatError(f"config file not found: {path}")
        cp.read(path)
    if not cp.has_section(CONFIG_SECTION):
        cp.add_section(CONFIG_SECTION)
    return cp[CONFIG_SECTION]


def _map(fn, items: Sequence, workers: int) -> List:
    """Map in input order, optionally over a process pool."""
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _graph_files(paths: Sequence[str]) -> List[Path]:
    files: List[Path] = []
    for p in map(Path, paths):
        if p.is_dir():
            found = sorted(p.glob("*.tsv"))
            if not found:
                raise GraphFormatError(f"{p}: no .tsv graphs found")
            files.extend(found)
        elif p.is_file():
            files.append(p)
        else:
            raise GraphFormatError(f"no such file: {p}")
    return files


def _load_graphs(paths: Sequence[str]):
    out = []
    for p in paths:
        if Path(p).is_dir():
            out.extend(load_dataset(p))
        elif Path(p).is_file():
            has_labels = (Path(p).parent / "labels.txt").exists()
            out.append(load_edge_list(p, has_labels=has_labels))
        else:
            raise GraphFormatError(f"no such file: {p}")
    return out


def _load_weighted(path: Path, weights: str = "normalize"):
    """Filtration weights from times: affinely normalised, or taken as given."""
    g = load_edge_list(path)
    if weights == "normalize":
        return normalize_weights(g)
    if g.times.min() < 0 or g.times.max() > 1:
        raise GraphFormatError(f"{path}: raw weights must lie in [0, 1]")
    return WeightedDigraph(g.node_count, g.sources, g.targets, g.times, g.label)


# per-file workers (module level so they pickle)

def _pd_record(path: Path, kind: str, weights: str) -> dict:
    d0, d1, emap = diagrams(_load_weighted(path, weights), kind)
    return {"file": path.name, "kind": kind, "pd0": d0.to_json(), "pd1": d1.to_json(),
            "edge_map": emap.to_json()}


def _duality_record(path: Path, weights: str) -> dict:
    rep = check_duality(_load_weighted(path, weights))
    return {"file": path.name, **rep.to_json()}


def _linegraph_record(path: Path, weights: str) -> dict:
    so, si = build_line_graphs(_load_weighted(path, weights))
    return {"file": path.name, "source": so.to_json(), "sink": si.to_json()}


def _single_or_list(records: List[dict]):
    if len(records) == 1:
        rec = dict(records[0])
        rec.pop("file")
        return rec
    return records


def cmd_linegraph(s: Settings) -> int:
    recs = _map(partial(_linegraph_record, weights=s.get("weights", str, "normalize")),
                _graph_files(s.args.graphs), s.get("workers", int, 1))
    _emit(dumps(_single_or_list(recs)), s.args.out)
    return EXIT_OK


def cmd_pd(s: Settings) -> int:
    kind = s.get("kind", str, SINK)
    if kind not in KINDS:
        raise UsageError(f"unknown kind {kind!r}")
    recs = _map(partial(_pd_record, kind=kind, weights=s.get("weights", str, "normalize")),
                _graph_files(s.args.graphs), s.get("workers", int, 1))
    _emit(dumps(_single_or_list(recs)), s.args.out)
    return EXIT_OK


def cmd_duality(s: Settings) -> int:
    recs = _map(partial(_duality_record, weights=s.get("weights", str, "normalize")),
                _graph_files(s.args.graphs), s.get("workers", int, 1))
    _emit(dumps(_single_or_list(recs)), s.args.out)
    if not all(r["pd0_match"] and r["pd1_match"] for r in recs):
        raise InvariantError("sink and source diagrams differ")
    return EXIT_OK


def _read_diagrams(path: str) -> dict:
    """``{dim: diagram}`` from a diagram file or a ``pd`` output record."""
    try:
        obj = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise GraphFormatError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"{path}: invalid JSON ({exc})") from None
    try:
        if "points" in obj:
            d = PersistenceDiagram.from_json(obj)
            return {d.dim: d}
        return {int(k[2:]): PersistenceDiagram.from_json(obj[k]) for k in ("pd0", "pd1") if k in obj}
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphFormatError(f"{path}: not a persistence diagram ({exc})") from None


def cmd_wdist(s: Settings) -> int:
    a, b = _read_diagrams(s.args.a), _read_diagrams(s.args.b)
    cap = s.get("cap", float, 1.0)
    dims = sorted(set(a) & set(b))
    if not dims:
        raise GraphFormatError("the two files share no diagram dimension")
    recs = [{"a": s.args.a, "b": s.args.b, "dim": k, "wd": wasserstein2(a[k], b[k], cap=cap)[0]}
            for k in dims]
    _emit(dumps(recs[0] if len(recs) == 1 else recs), s.args.out)
    return EXIT_OK


def cmd_pimage(s: Settings) -> int:
    ds = _read_diagrams(s.args.diagram)
    dim = s.args.dim if s.args.dim is not None else min(ds)
    if dim not in ds:
        raise GraphFormatError(f"no dimension-{dim} diagram in {s.args.diagram}")
    cfg = ImageConfig(height=s.get("resolution", int, 20), width=s.get("resolution", int, 20),
                      sigma=s.get("sigma", float, 0.05), cap=s.get("cap", float, 1.0))
    _emit(persistence_image(ds[dim], cfg).to_csv(), s.args.out)
    return EXIT_OK


def cmd_gen(s: Settings) -> int:
    family = s.get("family", str, "random_temporal")
    seed = s.get("seed", int, 0)
    count = s.get("count", int, 1)
    nodes = s.get("nodes", int, 10)
    if family == "two_class":
        graphs = gen.two_class_dataset(count, nodes, s.get("max_nodes", int, nodes), seed)
    else:
        try:
            spec = gen.GeneratorSpec(family, count=count, nodes=nodes,
                                     edges=s.get("edges", int, None), seed=seed)
        except gen.GeneratorError as exc:
            raise UsageError(str(exc)) from None
        graphs = gen.generate(spec)
    paths = write_dataset(graphs, s.args.out_dir, prefix=family)
    sys.stdout.write(dumps({"graphs": [p.name for p in paths]}))
    return EXIT_OK


def _train_config(s: Settings) -> TrainConfig:
    return TrainConfig(epochs=s.get("epochs", int, 50), batch_size=s.get("batch_size", int, 8),
                       lr=s.get("lr", float, 1e-3), label_weight=s.get("label_weight", float, 1.0),
                       seed=s.get("seed", int, 0), inf_cap=s.get("cap", float, 1.0))


def _model_config(s: Settings) -> ModelConfig:
    return ModelConfig(hidden=s.get("hidden", int, 32), layers=s.get("layers", int, 3),
                       pooling=s.get("pooling", str, "max"), seed=s.get("seed", int, 0))


def cmd_train(s: Settings) -> int:
    cfg = _train_config(s)
    samples = make_samples(_load_graphs(s.args.data), cfg.inf_cap)
    ms, history = train(init_model(_model_config(s)), samples, cfg)
    save_model(ms, s.args.model)
    _emit(history_csv(history), s.args.log)
    return EXIT_OK


def _predict_record(path: Path, model: str) -> dict:
    ms = load_model(model)
    p = predict(ms, prepare(_load_weighted(path)))
    return {"file": path.name, "pd0": p.pd0.tolist(), "pd1": p.pd1.tolist(),
            "scores": p.scores.tolist()}


def cmd_predict(s: Settings) -> int:
    recs = _map(partial(_predict_record, model=s.args.model), _graph_files(s.args.graphs),
                s.get("workers", int, 1))
    _emit(dumps(_single_or_list(recs)), s.args.out)
    return EXIT_OK


def cmd_eval(s: Settings) -> int:
    ms = load_model(s.args.model)
    cap = s.get("cap", float, 1.0)
    ev = evaluate(ms, make_samples(_load_graphs(s.args.data), cap), cap)
    _emit(dumps({"wd0": ev.wd0, "wd1": ev.wd1, "pie0": ev.pie0, "pie1": ev.pie1}), s.args.out)
    return EXIT_OK


def cmd_classify(s: Settings) -> int:
    cfg = _train_config(s)
    samples = make_samples(_load_graphs(s.args.data), cfg.inf_cap)
    if any(x.label is None for x in samples):
        raise GraphFormatError("classification needs a labels.txt beside the graphs")
    scores = cross_validate(samples, _model_config(s), cfg, folds=s.get("folds", int, 5))
    _emit(dumps({"fold_accuracy": scores, "mean_accuracy": float(np.mean(scores))}), s.args.out)
    return EXIT_OK


def bench(count: int, nodes: int, edges: int, seed: int, repeat: int = 3) -> dict:
    """Wall time of the exact engine against the naive oracle on the same graphs.

    Each side is timed ``repeat`` times and the best run kept.
    """
    graphs = [normalize_weights(g) for g in
              gen.random_graphs(count, (nodes, nodes), (edges, edges), seed)]

    def fast():
        for g in graphs:
            pd_pair(g, SINK)

    def slow():
        for g in graphs:
            naive_oracle_pd(g, SINK)

    def best(fn):
        times = []
        for _ in range(repeat):
            t0 = time.perf_counter()
            fn()
            times.append(time.perf_counter() - t0)
        return min(times)

    t_fast, t_slow = best(fast), best(slow)
    return {"graphs": count, "nodes": nodes, "edges": edges, "fast_seconds": t_fast,
            "oracle_seconds": t_slow, "speedup": t_slow / t_fast if t_fast > 0 else float("inf")}


def cmd_bench(s: Settings) -> int:
    rec = bench(s.get("count", int, 50), s.get("nodes", int, 10), s.get("edges", int, 30),
                s.get("seed", int, 0))
    _emit(dumps(rec), s.args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dyndowker", description="Directed persistence of temporal graphs.")
    p.add_argument("--config", help=f"key=value config file ([{CONFIG_SECTION}] section); "
                                    f"defaults to ${CONFIG_ENV}")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_, description=help_)
        sp.set_defaults(func=fn)
        return sp

    def out(sp):
        sp.add_argument("-o", "--out", help="output file (default stdout)")

    def workers(sp):
        sp.add_argument("--workers", type=int, help="parallel processes (default 1)")
        sp.add_argument("--weights", choices=("normalize", "raw"),
                        help="normalize times onto [0, 1] (default) or use them as given")

    sp = add("linegraph", cmd_linegraph, "emit source and sink line graphs as JSON")
    sp.add_argument("graphs", nargs="+", help="edge-list files or directories")
    out(sp), workers(sp)

    sp = add("pd", cmd_pd, "exact persistence diagrams and edge map as JSON")
    sp.add_argument("graphs", nargs="+")
    sp.add_argument("--kind", choices=KINDS)
    out(sp), workers(sp)

    sp = add("duality", cmd_duality, "compare sink and source diagrams")
    sp.add_argument("graphs", nargs="+")
    out(sp), workers(sp)

    sp = add("wdist", cmd_wdist, "2-Wasserstein distance between two diagram files")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.add_argument("--cap", type=float, help="value replacing infinite deaths (default 1.0)")
    out(sp)

    sp = add("pimage", cmd_pimage, "persistence image of a diagram as CSV")
    sp.add_argument("diagram")
    sp.add_argument("--dim", type=int)
    sp.add_argument("--resolution", type=int)
    sp.add_argument("--sigma", type=float)
    sp.add_argument("--cap", type=float)
    out(sp)

    sp = add("gen", cmd_gen, "write a synthetic dataset")
    sp.add_argument("out_dir")
    sp.add_argument("--family", choices=gen.FAMILIES + ("two_class",))
    sp.add_argument("--count", type=int)
    sp.add_argument("--nodes", type=int)
    sp.add_argument("--max-nodes", dest="max_nodes", type=int)
    sp.add_argument("--edges", type=int)
    sp.add_argument("--seed", type=int)

    def train_flags(sp):
        sp.add_argument("--epochs", type=int)
        sp.add_argument("--batch-size", dest="batch_size", type=int)
        sp.add_argument("--lr", type=float)
        sp.add_argument("--label-weight", dest="label_weight", type=float)
        sp.add_argument("--hidden", type=int)
        sp.add_argument("--layers", type=int)
        sp.add_argument("--pooling", choices=("max", "mean"))
        sp.add_argument("--seed", type=int)
        sp.add_argument("--cap", type=float)

    sp = add("train", cmd_train, "train the network on a dataset")
    sp.add_argument("data", nargs="+", help="dataset directories or files")
    sp.add_argument("--model", required=True, help="output model file (.npz)")
    sp.add_argument("--log", help="training history CSV (default stdout)")
    train_flags(sp)

    sp = add("predict", cmd_predict, "predicted diagrams and class scores")
    sp.add_argument("graphs", nargs="+")
    sp.add_argument("--model", required=True)
    out(sp), workers(sp)

    sp = add("eval", cmd_eval, "WD and PIE of predictions against exact diagrams")
    sp.add_argument("data", nargs="+")
    sp.add_argument("--model", required=True)
    sp.add_argument("--cap", type=float)
    out(sp)

    sp = add("classify", cmd_classify, "k-fold classification accuracy on a labelled dataset")
    sp.add_argument("data", nargs="+")
    sp.add_argument("--folds", type=int)
    train_flags(sp)
    out(sp)

    sp = add("bench", cmd_bench, "exact engine against the naive oracle")
    sp.add_argument("--count", type=int)
    sp.add_argument("--nodes", type=int)
    sp.add_argument("--edges", type=int)
    sp.add_argument("--seed", type=int)
    out(sp)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        settings = Settings(args, load_config(args.config))
        return args.func(settings)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except InvariantError as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (GraphFormatError, ModelShapeError, FileNotFoundError, gen.GeneratorError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
