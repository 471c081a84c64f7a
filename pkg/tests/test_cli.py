import csv
import io
import json
import os

import numpy as np
import pytest

from conftest import write_tu
from graphmetric import cli
from graphmetric.mining import code_from_text, code_to_text

A, B = 0, 1


def fixture_graphs():
    graphs, classes = [], []
    for i in range(10):
        n = 3 + i % 3
        edges = [(v, v + 1, 0) for v in range(n - 1)]
        labels = [A] * n
        if i % 2:
            labels.append(B)
            edges.append((i % n, n, 0))
        graphs.append((labels, edges))
        classes.append(i % 2)
    return graphs, classes


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("fix")
    write_tu(d, "FIX", *fixture_graphs())
    return d


def train(data_dir, out, *extra):
    argv = ["train", "--dataset-dir", str(data_dir), "--dataset-name", "FIX", "--output", str(out),
            "--set", "K=1", "--set", "max_pattern_size=4", *extra]
    return cli.main(argv)


@pytest.fixture(scope="module")
def model(data_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("model")
    assert train(data_dir, out) == 0
    return out


def read_weights(model_dir):
    keys = {}
    with open(os.path.join(model_dir, "patterns.tsv")) as fh:
        next(fh)
        for line in fh:
            pid, _, text = line.rstrip("\n").split("\t")
            keys[pid] = text
    out = {}
    with open(os.path.join(model_dir, "weights.csv")) as fh:
        for row in csv.DictReader(fh):
            out[(int(row["lambda_index"]), keys[row["pattern_id"]])] = float(row["weight"])
    return out


def test_train_writes_full_grid(model):
    for name in ("config.txt", "split.json", "patterns.tsv", "weights.csv", "stats.csv",
                 "timings.csv", "labels.json"):
        assert (model / name).exists()
    with open(model / "stats.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [int(r["index"]) for r in rows] == list(range(100))
    assert all(float(r["relative_gap"]) <= 1e-6 for r in rows)
    split = json.loads((model / "split.json").read_text())
    assert sorted(split["train"] + split["valid"] + split["test"]) == list(range(10))
    assert len(split["train"]) == 6


def test_rule_sets_give_same_weights(data_dir, model, tmp_path):
    assert train(data_dir, tmp_path, "--rules", "ssp") == 0
    a, b = read_weights(model), read_weights(tmp_path)
    for key in set(a) | set(b):
        assert abs(a.get(key, 0.0) - b.get(key, 0.0)) <= 1e-5


def test_deterministic_outputs(data_dir, tmp_path):
    assert train(data_dir, tmp_path) == 0
    first = {name: (tmp_path / name).read_bytes() for name in os.listdir(tmp_path)}
    assert train(data_dir, tmp_path) == 0
    for name, content in first.items():
        if name != "timings.csv":
            assert (tmp_path / name).read_bytes() == content, name


def test_evaluate_perfect_separation(model, capsys):
    assert cli.main(["evaluate", str(model)]) == 0
    summary = json.loads((model / "evaluation.json").read_text())
    assert summary["test_micro_f1"] == 1.0
    with open(model / "evaluation.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert {"lambda_index", "k", "nonzeros", "valid_micro_f1"} <= set(rows[0])
    assert {r["nonzeros"] for r in rows if r["lambda_index"] == "0"} == {"0"}


def test_test_time_features_match_training(data_dir):
    cfg = dict(cli.DEFAULTS, dataset_dir=str(data_dir), dataset_name="FIX", max_pattern_size=4)
    graphs, y, _ = cli.load_data(cfg)
    for mode in ("indicator", "log-approx"):
        cfg["feature_mode"] = mode
        tree = cli.build_tree(cfg, graphs)
        nodes = tree.expand_all()
        X = cli.feature_matrix(cfg, [n.key for n in nodes], graphs)
        assert np.array_equal(X, np.column_stack([n.column for n in nodes]))


def test_export_sorted_and_round_trips(model, capsys):
    assert cli.main(["export-subgraphs", str(model)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].split("\t")[:4] == ["rank", "weight", "size", "code"]
    weights = [float(l.split("\t")[1]) for l in lines[1:]]
    assert weights and weights == sorted(weights, reverse=True)
    for line in lines[1:]:
        text = line.split("\t")[3]
        assert code_to_text(code_from_text(text)) == text
        assert "|" in line.split("\t")[4]


def test_export_zero_model_is_empty(model, capsys):
    assert cli.main(["export-subgraphs", str(model), "--lambda-index", "0"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 1


def test_usage_errors_exit_2(data_dir, tmp_path, capsys):
    assert cli.main(["train", "--dataset-dir", str(tmp_path / "missing"),
                     "--dataset-name", "FIX", "--output", str(tmp_path / "o")]) == 2
    assert "dataset directory" in capsys.readouterr().err
    assert cli.main(["train", "--dataset-dir", str(data_dir), "--dataset-name", "FIX",
                     "--set", "bogus=1"]) == 2
    assert "bogus" in capsys.readouterr().err
    assert train(data_dir, tmp_path / "o", "--set", "K=5") == 2
    assert cli.main(["evaluate", str(tmp_path / "nothing")]) == 2
    assert cli.main(["frobnicate"]) == 2


def test_config_file_and_dump(data_dir, tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"# fixture run\ndataset_dir = {data_dir}\ndataset_name = FIX\nK = 1\n")
    assert cli.main(["train", "--config", str(cfg), "--dump-config"]) == 0
    out = capsys.readouterr().out
    assert "K = 1" in out and "n_lambdas = 100" in out and "train_fraction = 0.6" in out
    cfg.write_text("nonsense_key = 3\n")
    assert cli.main(["train", "--config", str(cfg)]) == 2
    assert "nonsense_key" in capsys.readouterr().err


def test_itemset_backend(tmp_path):
    lines = [f"{i % 2}\t{' '.join(map(str, [0, 1] + ([2] if i % 2 else [3])))}" for i in range(10)]
    (tmp_path / "items.txt").write_text("\n".join(lines) + "\n")
    out = tmp_path / "m"
    assert cli.main(["train", "--dataset-dir", str(tmp_path), "--dataset-name", "items",
                     "--output", str(out), "--set", "backend=itemset", "--set", "K=1",
                     "--set", "n_lambdas=10"]) == 0
    summary, _ = cli.evaluate_bundle(str(out))
    assert summary["test_micro_f1"] == 1.0
