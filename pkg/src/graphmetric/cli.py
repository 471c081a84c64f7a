"""Command line interface: ``train``, ``evaluate`` and ``export-subgraphs``.

Configuration is a plain ``key = value`` file; command line flags override
it. Exit status is 0 on success, 1 on runtime failure and 2 on usage or
configuration errors.
"""

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import asif as asif_mod
from .features import ColumnSpace
from .graphs import (PairSelectionError, load_tu_dataset, select_pair_sets, select_triplets,
                     wl_subtree_kernel)
from .mining import (GraphPatternTree, ItemsetTree, SequenceTree, code_from_text,
                     code_graph, code_pattern_graph, code_to_text, enumerate_for_test,
                     n_vertices, nonoverlap_subsequence_count)
from .postprocess import knn_predict, micro_f1
from .solver import PathConfig, pathwise_optimize


class ConfigError(ValueError):
    pass


DEFAULTS = {
    "dataset_dir": "",
    "dataset_name": "",
    "backend": "graph",
    "feature_mode": "indicator",
    "loss": "pairwise",
    "rules": "wsp+rssp",
    "max_pattern_size": 8,
    "K": 10,
    "L": 1.0,
    "U": 0.0,
    "k_trip": 4,
    "wl_h": 3,
    "n_lambdas": 100,
    "lambda_min_ratio": 0.01,
    "freq": 10,
    "max_iter": 10000,
    "eps": 1e-6,
    "eta": 1.0,
    "seed": 0,
    "train_fraction": 0.6,
    "valid_fraction": 0.2,
    "asif_T": 3,
    "rho": 1.0,
    "threshold": 0.7,
    "dissimilarity": "",
    "dissimilarity_labels": "",
    "output_dir": "model",
}

CHOICES = {
    "backend": ("graph", "itemset", "sequence"),
    "feature_mode": ("indicator", "log-approx", "asif", "sim-asif", "log"),
    "loss": ("pairwise", "triplet"),
    "rules": ("ssp", "rssp", "wsp", "wsp+rssp"),
}


def _coerce(key, raw):
    default = DEFAULTS[key]
    try:
        if isinstance(default, bool):
            return str(raw).lower() in ("1", "true", "yes")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"config key {key!r}: cannot parse {raw!r}") from None
    return str(raw)


def read_config(path):
    cfg = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    with fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in DEFAULTS:
                raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
            cfg[key] = _coerce(key, val)
    return cfg


def resolve_config(args):
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(read_config(args.config))
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, val = (s.strip() for s in item.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError(f"unknown config key {key!r}")
        cfg[key] = _coerce(key, val)
    for key in ("dataset_dir", "dataset_name", "rules", "output_dir", "dissimilarity"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    for key, allowed in CHOICES.items():
        if cfg[key] not in allowed:
            raise ConfigError(f"{key} must be one of {allowed}, got {cfg[key]!r}")
    if cfg["backend"] == "graph" and cfg["feature_mode"] == "log":
        raise ConfigError("feature_mode 'log' applies to the sequence backend; use 'log-approx'")
    if cfg["backend"] != "graph" and cfg["feature_mode"] not in ("indicator", "log"):
        raise ConfigError(f"backend {cfg['backend']} supports feature_mode indicator or log")
    if cfg["backend"] == "itemset" and cfg["feature_mode"] != "indicator":
        raise ConfigError("the itemset backend only has indicator features")
    if not cfg["eta"] > 0:
        raise ConfigError("eta must be positive")
    if cfg["U"] > cfg["L"]:
        raise ConfigError("U must not exceed L")
    if not 0 < cfg["train_fraction"] < 1 or not 0 <= cfg["valid_fraction"] < 1 \
            or cfg["train_fraction"] + cfg["valid_fraction"] >= 1:
        raise ConfigError("train_fraction and valid_fraction must leave room for a test split")
    return cfg


def dump_config(cfg, fh):
    for key in DEFAULTS:
        fh.write(f"{key} = {cfg[key]}\n")


# data -------------------------------------------------------------------------

def load_records(path):
    """``label<TAB>item item ...`` per line, for the itemset and sequence backends."""
    ys, rows = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            if "\t" not in line:
                raise ConfigError(f"{path}:{lineno}: expected label<TAB>items")
            label, items = line.rstrip("\n").split("\t", 1)
            ys.append(label)
            rows.append([int(v) for v in items.split()])
    names = sorted(set(ys))
    y = np.array([names.index(v) for v in ys])
    return rows, y, names


def load_data(cfg):
    d = cfg["dataset_dir"]
    if not d or not os.path.isdir(d):
        raise ConfigError(f"dataset directory not found: {d!r}")
    if not cfg["dataset_name"]:
        raise ConfigError("dataset_name is required")
    if cfg["backend"] == "graph":
        ds = load_tu_dataset(d, cfg["dataset_name"])
        return ds.graphs, ds.y, ds
    path = os.path.join(d, cfg["dataset_name"] + ".txt")
    if not os.path.exists(path):
        raise ConfigError(f"missing dataset file: {os.path.basename(path)}")
    rows, y, _ = load_records(path)
    return rows, y, None


def split_indices(y, seed, train_fraction, valid_fraction):
    """Class-stratified random split into train, validation and test index lists."""
    rng = np.random.default_rng(seed)
    tr, va, te = [], [], []
    for c in np.unique(y):
        idx = rng.permutation(np.flatnonzero(np.asarray(y) == c))
        n_tr = int(round(train_fraction * len(idx)))
        n_va = int(round(valid_fraction * len(idx)))
        tr += idx[:n_tr].tolist()
        va += idx[n_tr:n_tr + n_va].tolist()
        te += idx[n_tr + n_va:].tolist()
    return sorted(tr), sorted(va), sorted(te)


def bag_kernel(rows, n_items=None):
    n_items = n_items or 1 + max((max(r) for r in rows if r), default=-1)
    B = np.zeros((len(rows), n_items))
    for i, r in enumerate(rows):
        for v in r:
            B[i, v] += 1
    return B @ B.T


def build_dissimilarity(cfg, graphs, dataset):
    if cfg["dissimilarity"]:
        names = dataset.vertex_label_names if dataset is not None else None
        labels = cfg["dissimilarity_labels"] or None
        return asif_mod.load_dissimilarity(cfg["dissimilarity"], labels, names)
    n_labels = dataset.n_vertex_labels if dataset is not None else None
    return asif_mod.build_dissimilarity_from_adjacency(graphs, n_labels)


def build_tree(cfg, samples, dissimilarity=None):
    mode = cfg["feature_mode"]
    if cfg["backend"] == "itemset":
        return ItemsetTree(samples, cfg["max_pattern_size"])
    if cfg["backend"] == "sequence":
        return SequenceTree(samples, cfg["max_pattern_size"], mode)
    scorer = None
    if mode in ("asif", "sim-asif"):
        scorer = asif_mod.make_scorer(
            mode, cfg["asif_T"], dissimilarity,
            asif_mod.SimAsifConfig(cfg["asif_T"], cfg["rho"], cfg["threshold"] or None))
    return GraphPatternTree(samples, cfg["max_pattern_size"], mode, scorer)


def feature_matrix(cfg, keys, samples, dissimilarity=None):
    """Values of the given pattern keys in arbitrary samples."""
    X = np.zeros((len(samples), len(keys)))
    mode = cfg["feature_mode"]
    if cfg["backend"] == "itemset":
        for j, key in enumerate(keys):
            s = set(key)
            X[:, j] = [float(s <= set(r)) for r in samples]
        return X
    if cfg["backend"] == "sequence":
        for j, key in enumerate(keys):
            for i, r in enumerate(samples):
                c = nonoverlap_subsequence_count(key, r)
                X[i, j] = float(c > 0) if mode == "indicator" else math.log1p(c)
        return X
    if mode in ("asif", "sim-asif"):
        scorer = asif_mod.make_scorer(
            mode, cfg["asif_T"], dissimilarity,
            asif_mod.SimAsifConfig(cfg["asif_T"], cfg["rho"], cfg["threshold"] or None))
        pats = [code_pattern_graph(k) for k in keys]
        for i, g in enumerate(samples):
            for j, p in enumerate(pats):
                X[i, j] = scorer(p, g)
        return X
    col = {k: j for j, k in enumerate(keys)}
    for i, g in enumerate(samples):
        for code, val in enumerate_for_test(keys, g, mode).items():
            X[i, col[code]] = val
    return X


def key_to_text(cfg, key):
    return code_to_text(key) if cfg["backend"] == "graph" else " ".join(map(str, key))


def key_from_text(cfg, text):
    if cfg["backend"] == "graph":
        return code_from_text(text)
    return tuple(int(v) for v in text.split())


# commands ---------------------------------------------------------------------

def cmd_train(cfg, out=None):
    out = out or sys.stdout
    samples, y, dataset = load_data(cfg)
    tr, va, te = split_indices(y, cfg["seed"], cfg["train_fraction"], cfg["valid_fraction"])
    train = [samples[i] for i in tr]
    ytr = y[tr]
    if cfg["backend"] == "graph":
        kernel = wl_subtree_kernel(train, cfg["wl_h"])
    else:
        kernel = bag_kernel(train, 1 + max((max(r) for r in samples if r), default=-1))
    try:
        if cfg["loss"] == "pairwise":
            columns = ColumnSpace.from_pairs(
                select_pair_sets(kernel, ytr, cfg["K"], cfg["L"], cfg["U"]))
        else:
            columns = ColumnSpace.from_triplets(
                select_triplets(kernel, ytr, cfg["k_trip"]), len(tr))
    except PairSelectionError as exc:
        raise ConfigError(f"training split: {exc}") from None
    dis = None
    if cfg["feature_mode"] == "sim-asif":
        dis = build_dissimilarity(cfg, train, dataset)
    tree = build_tree(cfg, train, dis)
    pcfg = PathConfig(n_lambdas=cfg["n_lambdas"], lambda_min_ratio=cfg["lambda_min_ratio"],
                      freq=cfg["freq"], max_iter=cfg["max_iter"], eps=cfg["eps"],
                      eta=cfg["eta"], rules=cfg["rules"])
    res = pathwise_optimize(tree, columns, pcfg, log=lambda s: print(s, file=out))

    od = cfg["output_dir"]
    os.makedirs(od, exist_ok=True)
    with open(os.path.join(od, "config.txt"), "w") as fh:
        dump_config(cfg, fh)
    with open(os.path.join(od, "split.json"), "w") as fh:
        json.dump({"seed": cfg["seed"], "train": tr, "valid": va, "test": te}, fh)
    used = sorted({k for w in res.weights for k in w})
    pid = {k: j for j, k in enumerate(used)}
    with open(os.path.join(od, "patterns.tsv"), "w") as fh:
        fh.write("pattern_id\tsize\tpattern\n")
        for k in used:
            node = tree.nodes[k]
            fh.write(f"{pid[k]}\t{node.size}\t{key_to_text(cfg, node.key)}\n")
    with open(os.path.join(od, "weights.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda_index", "lambda", "pattern_id", "weight"])
        for i, (lam, ws) in enumerate(zip(res.lambdas, res.weights)):
            for k in sorted(ws):
                w.writerow([i, repr(float(lam)), pid[k], repr(ws[k])])
    res.write_stats_csv(os.path.join(od, "stats.csv"), os.path.join(od, "timings.csv"))
    names = {"vertex": [], "edge": []}
    if dataset is not None:
        names = {"vertex": [str(v) for v in dataset.vertex_label_names],
                 "edge": [str(v) for v in dataset.edge_label_names]}
    with open(os.path.join(od, "labels.json"), "w") as fh:
        json.dump(names, fh)
    if dis is not None:
        np.savetxt(os.path.join(od, "dissimilarity.txt"), dis)
    print(f"wrote {od}: {len(used)} patterns over {len(res.lambdas)} lambdas, "
          f"{len(tree.nodes)} tree nodes created", file=out)
    return 0


def load_bundle(model_dir):
    if not os.path.isdir(model_dir):
        raise ConfigError(f"model directory not found: {model_dir!r}")
    cfg = dict(DEFAULTS)
    cfg.update(read_config(os.path.join(model_dir, "config.txt")))
    with open(os.path.join(model_dir, "split.json")) as fh:
        split = json.load(fh)
    keys = {}
    with open(os.path.join(model_dir, "patterns.tsv")) as fh:
        next(fh)
        for line in fh:
            pid, _, text = line.rstrip("\n").split("\t")
            keys[int(pid)] = key_from_text(cfg, text)
    lambdas, weights = {}, {}
    with open(os.path.join(model_dir, "weights.csv")) as fh:
        for row in csv.DictReader(fh):
            i = int(row["lambda_index"])
            lambdas[i] = float(row["lambda"])
            weights.setdefault(i, {})[int(row["pattern_id"])] = float(row["weight"])
    n = cfg["n_lambdas"]
    return cfg, split, keys, [weights.get(i, {}) for i in range(n)]


def _label_names(model_dir):
    path = os.path.join(model_dir, "labels.json")
    if not os.path.exists(path):
        return {"vertex": [], "edge": []}
    with open(path) as fh:
        return json.load(fh)


def describe_pattern(cfg, key, names=None):
    """Readable form of a pattern: vertices with labels, then labelled edges."""
    if cfg["backend"] != "graph":
        sep = ", " if cfg["backend"] == "itemset" else " -> "
        return ("{" if cfg["backend"] == "itemset" else "<") + sep.join(map(str, key)) + (
            "}" if cfg["backend"] == "itemset" else ">")
    names = names or {"vertex": [], "edge": []}

    def name(table, i):
        return table[i] if i < len(table) else str(i)

    labels, _ = code_graph(key)
    verts = " ".join(f"v{v}:{name(names['vertex'], l)}" for v, l in enumerate(labels))
    edges = " ".join(f"v{min(a, b)}-v{max(a, b)}:{name(names['edge'], le)}"
                     for a, b, _, le, _ in key)
    return f"{verts} | {edges}"


def evaluate_bundle(model_dir, k_grid=tuple(range(1, 50, 2)), dataset_dir=None):
    cfg, split, keys, weights = load_bundle(model_dir)
    if dataset_dir:
        cfg["dataset_dir"] = dataset_dir
    samples, y, dataset = load_data(cfg)
    dis = None
    if cfg["feature_mode"] == "sim-asif":
        dis = np.loadtxt(os.path.join(model_dir, "dissimilarity.txt"), ndmin=2)
    order = sorted(keys)
    X = feature_matrix(cfg, [keys[p] for p in order], samples, dis)
    tr, va, te = split["train"], split["valid"], split["test"]
    rows = []
    best = None
    for i, ws in enumerate(weights):
        m = np.array([ws.get(p, 0.0) for p in order])
        Z = X * np.sqrt(m)
        for k in k_grid:
            if k > len(tr):
                continue
            f_va = micro_f1(y[va], knn_predict(Z[tr], y[tr], Z[va], k)) if va else math.nan
            rows.append((i, k, int((m > 0).sum()), f_va))
            score = -1 if math.isnan(f_va) else f_va
            if best is None or score > best[0]:
                best = (score, i, k)
    _, bi, bk = best
    m = np.array([weights[bi].get(p, 0.0) for p in order])
    Z = X * np.sqrt(m)
    f_te = micro_f1(y[te], knn_predict(Z[tr], y[tr], Z[te], bk))
    return {"lambda_index": bi, "k": bk, "nonzeros": int((m > 0).sum()),
            "valid_micro_f1": best[0], "test_micro_f1": f_te}, rows


def cmd_evaluate(args, out=None):
    out = out or sys.stdout
    summary, rows = evaluate_bundle(args.model, dataset_dir=args.dataset_dir)
    with open(os.path.join(args.model, "evaluation.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda_index", "k", "nonzeros", "valid_micro_f1"])
        w.writerows(rows)
    with open(os.path.join(args.model, "evaluation.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
    for key, val in summary.items():
        print(f"{key}: {val}", file=out)
    return 0


def cmd_export(args, out=None):
    out = out or sys.stdout
    cfg, _, keys, weights = load_bundle(args.model)
    i = args.lambda_index if args.lambda_index is not None else len(weights) - 1
    if not 0 <= i < len(weights):
        raise ConfigError(f"lambda index {i} outside 0..{len(weights) - 1}")
    ranked = sorted(weights[i].items(), key=lambda kv: (-kv[1], kv[0]))
    if args.top:
        ranked = ranked[:args.top]
    names = _label_names(args.model)
    print("rank\tweight\tsize\tcode\tstructure", file=out)
    for r, (pid, w) in enumerate(ranked, 1):
        key = keys[pid]
        size = n_vertices(key) if cfg["backend"] == "graph" else len(key)
        print(f"{r}\t{w:.6g}\t{size}\t{key_to_text(cfg, key)}\t"
              f"{describe_pattern(cfg, key, names)}", file=out)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="graphmetric",
                                description="Sparse pattern-weighted metric learning.")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="fit weights along the regularisation path")
    t.add_argument("--config", help="key = value configuration file")
    t.add_argument("--dataset-dir", dest="dataset_dir")
    t.add_argument("--dataset-name", dest="dataset_name")
    t.add_argument("--rules", choices=CHOICES["rules"])
    t.add_argument("--output", dest="output_dir")
    t.add_argument("--dissimilarity", help="label dissimilarity matrix for sim-asif")
    t.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override one configuration key (repeatable)")
    t.add_argument("--dump-config", action="store_true",
                   help="print the resolved configuration and exit")

    e = sub.add_parser("evaluate", help="k-NN micro-F1 of a trained model")
    e.add_argument("model", help="directory written by train")
    e.add_argument("--dataset-dir", dest="dataset_dir")

    x = sub.add_parser("export-subgraphs", help="list selected patterns by weight")
    x.add_argument("model")
    x.add_argument("--lambda-index", type=int)
    x.add_argument("--top", type=int)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        if args.command == "train":
            cfg = resolve_config(args)
            if args.dump_config:
                dump_config(cfg, sys.stdout)
                return 0
            return cmd_train(cfg)
        if args.command == "evaluate":
            return cmd_evaluate(args)
        return cmd_export(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
