import csv
import json
import os
from pathlib import Path

import numpy as np
import pytest

from netcoh import standardize, write_edge_list
from netcoh.cli import main
from netcoh.simulate import dense_block_graph
from util import dense_rnc_solve

DATA = Path(__file__).parent / "data"
EDGES = str(DATA / "toy_edges.txt")
TOY = str(DATA / "toy_data.csv")


def _read_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]


def _load_toy():
    header, rows = _read_csv(TOY)
    arr = np.array([[float(x) for x in row] for row in rows])
    return arr[:, :2], arr[:, 2]


def test_fit_reproduces_golden_model(tmp_path):
    rc = main(["fit", "--family", "linear", "--edges", EDGES,
               "--data", TOY, "--lambda", "0.5", "--out", str(tmp_path)])
    assert rc == 0
    got = json.load(open(tmp_path / "model.json"))
    golden = json.load(open(DATA / "golden_model.json"))
    assert got == golden
    # and the golden values agree with the dense normal-equations oracle
    from netcoh import read_edge_list
    g = read_edge_list(EDGES, n=12)
    X, Y = _load_toy()
    a, b = dense_rnc_solve(g, standardize(X), Y, lam=0.5)
    np.testing.assert_allclose(golden["alpha_hat"], a, atol=1e-8)
    np.testing.assert_allclose(golden["beta_hat"], b, atol=1e-8)
    assert (tmp_path / "fitted.csv").exists()
    manifest = json.load(open(tmp_path / "manifest.json"))
    assert manifest["command"] == "fit"
    assert len(manifest["inputs"]) == 2
    for digest in manifest["inputs"].values():
        assert len(digest) == 64


def test_predict_reproduces_golden(tmp_path):
    rc = main(["predict", "--model", str(DATA / "golden_model.json"),
               "--edges", str(DATA / "toy_edges_enlarged.txt"),
               "--data", str(DATA / "toy_newdata.csv"),
               "--out", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "predictions.csv").read_text() == \
        (DATA / "golden_predictions.csv").read_text()


def test_predict_rejects_training_id_collision(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("id,x1,x2\n3,0.1,0.2\n")
    rc = main(["predict", "--model", str(DATA / "golden_model.json"),
               "--edges", str(DATA / "toy_edges_enlarged.txt"),
               "--data", str(bad), "--out", str(tmp_path)])
    assert rc == 2


def test_missing_lambda_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["fit", "--family", "linear", "--edges", EDGES, "--data", TOY])
    assert exc.value.code == 64


def test_unknown_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 64


def test_cox_all_censored_exits_2(tmp_path, capsys):
    data = tmp_path / "surv.csv"
    with open(data, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "event", "x1", "x2"])
        rng = np.random.default_rng(0)
        for _ in range(12):
            w.writerow([rng.uniform(1, 5), 0, rng.normal(), rng.normal()])
    rc = main(["fit", "--family", "cox", "--edges", EDGES,
               "--data", data.as_posix(), "--lambda", "0.1",
               "--out", str(tmp_path)])
    assert rc == 2
    assert "event" in capsys.readouterr().err


def test_nonexistent_estimator_exits_2(tmp_path, capsys):
    edges = tmp_path / "edges.txt"
    edges.write_text("0 1\n2 3\n")
    data = tmp_path / "data.csv"
    data.write_text("x1,y\n1.0,0.1\n1.0,0.2\n-1.0,0.3\n-1.0,0.4\n")
    rc = main(["fit", "--family", "linear", "--edges", str(edges),
               "--data", str(data), "--lambda", "0.5",
               "--out", str(tmp_path)])
    assert rc == 2
    assert "set --gamma > 0" in capsys.readouterr().err


def test_cv_command_is_reproducible(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    args = ["cv", "--family", "linear", "--edges", EDGES, "--data", TOY,
            "--k", "3", "--grid", "0.01,0.1,1", "--seed", "11"]
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert (out1 / "cv.json").read_text() == (out2 / "cv.json").read_text()
    report = json.load(open(out1 / "cv.json"))
    assert report["selected_lambda"] in (0.01, 0.1, 1.0)


def test_simulate_figure2_schema(tmp_path):
    rc = main(["simulate", "--figure", "2", "--scale", "0.5", "--n", "60",
               "--reps", "2", "--k", "3", "--out", str(tmp_path)])
    assert rc == 0
    header, rows = _read_csv(tmp_path / "results.csv")
    assert header == ["s", "rep", "method", "family", "lambda",
                      "imp_alpha", "imp_beta", "imp_pred", "error"]
    assert {row[2] for row in rows} == {"rnc", "null", "oracle"}
    assert len(rows) == 6


def test_sparsify_certificate(tmp_path):
    edges = tmp_path / "dense.txt"
    write_edge_list(dense_block_graph(90), edges)
    rc = main(["sparsify", "--edges", str(edges), "--epsilon", "0.1",
               "--seed", "0", "--out", str(tmp_path)])
    assert rc == 0
    cert = json.load(open(tmp_path / "certificate.json"))
    assert cert["verified"] is True
    assert cert["measured_epsilon"] <= 0.1
    assert (tmp_path / "sparsified_edges.txt").exists()


def test_theory_command_block_structure_instance(tmp_path):
    # expected-adjacency instance: three complete 100-node components
    # with edge weight 0.05; the report's existence constant is ~ 0.5
    rng = np.random.default_rng(1)
    rows = []
    for b in range(3):
        for i in range(100 * b, 100 * b + 100):
            for j in range(i + 1, 100 * b + 100):
                rows.append(f"{i} {j} 0.05")
    edges = tmp_path / "edges.txt"
    edges.write_text("\n".join(rows) + "\n")
    data = tmp_path / "data.csv"
    X = standardize(rng.normal(size=(300, 2)))
    alpha = rng.normal(np.repeat([-1.0, 0.0, 1.0], 100), 0.1)
    with open(data, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x1", "x2", "alpha"])
        for i in range(300):
            w.writerow([repr(float(X[i, 0])), repr(float(X[i, 1])),
                        repr(float(alpha[i]))])
    rc = main(["theory", "--edges", str(edges), "--data", str(data),
               "--lambda", "0.1", "--sigma", "0.5", "--out", str(tmp_path)])
    assert rc == 0
    report = json.load(open(tmp_path / "theory.json"))
    assert report["nu"] == pytest.approx(0.5, abs=0.1)
    assert "bounds" in report


def test_threads_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("NETCOH_THREADS", "1")
    rc = main(["cv", "--family", "linear", "--edges", EDGES, "--data", TOY,
               "--k", "3", "--grid", "0.1,1", "--threads", "4",
               "--out", str(tmp_path)])
    assert rc == 0
