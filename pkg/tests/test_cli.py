"""Command-line surface: subcommands, file formats, determinism, errors."""

import csv
import json
from pathlib import Path

import numpy as np
import pytest

from kmedians import weiszfeld_median
from kmedians.cli import load_csv, main


def run_cli(*args) -> int:
    return main([str(a) for a in args])


def write_blobs_csv(path: Path, n_per=40, with_truth=True):
    rng = np.random.default_rng(0)
    pts = np.vstack([
        np.array([-10.0, 0.0]) + rng.normal(size=(n_per, 2)),
        np.array([10.0, 0.0]) + rng.normal(size=(n_per, 2)),
    ])
    labels = np.repeat([0, 1], n_per)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["x0", "x1"] + (["label"] if with_truth else []))
        for p, lab in zip(pts, labels):
            w.writerow([repr(float(p[0])), repr(float(p[1]))]
                       + ([int(lab)] if with_truth else []))
    return pts


def tree_bytes(root: Path) -> dict:
    return {p.relative_to(root).as_posix(): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file()}


# ---------------------------------------------------------------------------
# cluster


def test_cluster_two_blobs(tmp_path):
    data = tmp_path / "data.csv"
    write_blobs_csv(data)
    out = tmp_path / "run"
    assert run_cli("cluster", "--input", data, "--k", 2, "--out", out) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["command"] == "cluster"
    assert report["evaluation"]["ari"] == 1.0
    labels = [int(r["label"]) for r in csv.DictReader(open(out / "labels.csv"))]
    assert len(set(labels)) == 2 and len(labels) == 80


def test_cluster_k1_is_geometric_median(tmp_path):
    rng = np.random.default_rng(1)
    pts = rng.normal(size=(60, 2))
    data = tmp_path / "data.csv"
    with open(data, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["x0", "x1"])
        for p in pts:
            w.writerow([repr(float(p[0])), repr(float(p[1]))])
    out = tmp_path / "run"
    assert run_cli("cluster", "--input", data, "--k", 1, "--median-tol", 1e-10,
                   "--out", out) == 0
    report = json.loads((out / "report.json").read_text())
    center = np.array(report["clustering"]["centers"][0])
    expected = weiszfeld_median(pts, tol=1e-10).point
    assert np.linalg.norm(center - expected) <= 1e-6


def test_cluster_empty_file_fails(tmp_path):
    data = tmp_path / "empty.csv"
    data.write_text("")
    assert run_cli("cluster", "--input", data, "--k", 2, "--out", tmp_path / "o") == 3


def test_cluster_requires_k(tmp_path):
    data = tmp_path / "data.csv"
    write_blobs_csv(data)
    assert run_cli("cluster", "--input", data, "--out", tmp_path / "o") == 2


def test_cluster_rejects_unknown_algorithm(tmp_path):
    data = tmp_path / "data.csv"
    write_blobs_csv(data)
    assert run_cli("cluster", "--input", data, "--k", 2, "--algorithm", "spectral",
                   "--out", tmp_path / "o") == 2


def test_input_and_scenario_conflict(tmp_path):
    data = tmp_path / "data.csv"
    write_blobs_csv(data)
    assert run_cli("cluster", "--input", data, "--scenario", "s2", "--k", 2,
                   "--out", tmp_path / "o") == 2


def test_malformed_row_reports_line(tmp_path, capsys):
    data = tmp_path / "bad.csv"
    data.write_text("x0,x1\n1.0,2.0\n3.0,oops\n")
    assert run_cli("cluster", "--input", data, "--k", 1, "--out", tmp_path / "o") == 3
    assert "row 3" in capsys.readouterr().err


def test_header_required(tmp_path):
    data = tmp_path / "noheader.csv"
    data.write_text("1.0,2.0\n3.0,4.0\n")
    with pytest.raises(ValueError, match="header"):
        load_csv(str(data))


# ---------------------------------------------------------------------------
# select


def test_select_slope_two_blobs(tmp_path):
    data = tmp_path / "data.csv"
    write_blobs_csv(data)
    out = tmp_path / "run"
    assert run_cli("select", "--input", data, "--method", "slope", "--k-max", 6,
                   "--out", out) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["selection"]["k_hat"] == 2
    assert report["selection"]["slope_constant"] > 0
    assert (out / "curve.csv").exists()
    assert (out / "windows.csv").exists()
    proj_rows = list(csv.DictReader(open(out / "projection.csv")))
    assert len(proj_rows) == 80 and set(proj_rows[0]) == {"pc1", "pc2", "label"}


def test_select_s2_slope_offline_finds_4(tmp_path):
    out = tmp_path / "run"
    assert run_cli("select", "--scenario", "s2", "--method", "slope", "--k-max", 15,
                   "--seed", 1, "--out", out) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["selection"]["k_hat"] == 4
    assert report["evaluation"]["centroid_l1_error"] < 2.0


def test_select_gap_and_silhouette_write_curves(tmp_path):
    data = tmp_path / "data.csv"
    write_blobs_csv(data)
    for method in ("gap", "silhouette"):
        out = tmp_path / method
        assert run_cli("select", "--input", data, "--method", method, "--k-max", 4,
                       "--algorithm", "online", "--gap-b", 4, "--out", out) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["selection"]["method"] == method
        rows = list(csv.DictReader(open(out / "curve.csv")))
        assert [int(r["k"]) for r in rows] == report["selection"]["ks"]


def test_select_method_none_clusters(tmp_path):
    data = tmp_path / "data.csv"
    write_blobs_csv(data)
    out = tmp_path / "run"
    assert run_cli("select", "--input", data, "--method", "none", "--k", 2,
                   "--out", out) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["selection"] is None
    assert report["clustering"]["k"] == 2
    assert (out / "labels.csv").exists()
    # the report echo re-runs through the select parser
    out2 = tmp_path / "rerun"
    assert run_cli("--config", out / "report.json", "--out", out2) == 0
    assert json.loads((out2 / "report.json").read_text())["clustering"]["k"] == 2


def test_select_flag_conflicts(tmp_path):
    data = tmp_path / "data.csv"
    write_blobs_csv(data)
    assert run_cli("select", "--input", data, "--method", "slope", "--k", 2,
                   "--out", tmp_path / "o") == 2
    assert run_cli("select", "--input", data, "--method", "slope",
                   "--out", tmp_path / "o") == 2


# ---------------------------------------------------------------------------
# simulate


def test_simulate_s3_shape(tmp_path):
    out = tmp_path / "run"
    assert run_cli("simulate", "--scenario", "s3", "--seed", 4, "--out", out) == 0
    rows = list(csv.DictReader(open(out / "dataset.csv")))
    assert len(rows) == 2500
    assert set(rows[0]) == {"x0", "x1", "x2", "x3", "label", "contaminated"}


def test_simulate_contamination_fraction(tmp_path):
    out = tmp_path / "run"
    assert run_cli("simulate", "--scenario", "s2", "--rho", 0.1, "--law", "t1",
                   "--seed", 4, "--out", out) == 0
    rows = list(csv.DictReader(open(out / "dataset.csv")))
    assert sum(int(r["contaminated"]) for r in rows) == 200


def test_simulate_roundtrips_through_load(tmp_path):
    out = tmp_path / "run"
    assert run_cli("simulate", "--scenario", "s2", "--rho", 0.05, "--seed", 9,
                   "--out", out) == 0
    points, labels, mask = load_csv(str(out / "dataset.csv"))
    assert points.shape == (2000, 3)
    assert mask.sum() == 100
    assert (labels[mask] == -1).all()


# ---------------------------------------------------------------------------
# bench


def test_bench_small_sphere(tmp_path):
    out = tmp_path / "run"
    assert run_cli("bench", "--scenario", "sphere10", "--points-per-cluster", 20,
                   "--trials", 2, "--k-max", 12, "--rho", "0,0.25",
                   "--algorithm", "online,kmeans", "--seed", 5, "--out", out) == 0
    rows = list(csv.DictReader(open(out / "summary.csv")))
    assert len(rows) == 4  # 2 algorithms x 2 rho values
    for row in rows:
        assert int(row["trials"]) == 2
        assert 0 <= int(row["n_correct"]) <= 2
        assert -1.0 <= float(row["ari_mean"]) <= 1.0
    assert {r["algorithm"] for r in rows} == {"online", "kmeans"}


# ---------------------------------------------------------------------------
# evaluate


def test_evaluate_labels(tmp_path):
    data = tmp_path / "data.csv"
    write_blobs_csv(data)
    pred = tmp_path / "pred.csv"
    with open(pred, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["label"])
        for lab in np.repeat([1, 0], 40):
            w.writerow([lab])
    out = tmp_path / "run"
    assert run_cli("evaluate", "--input", data, "--labels", pred, "--out", out) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["evaluation"]["ari"] == 1.0


# ---------------------------------------------------------------------------
# determinism and config round-trip


def test_select_deterministic_outputs(tmp_path):
    data = tmp_path / "data.csv"
    write_blobs_csv(data)
    out = tmp_path / "run"
    snapshots = []
    for _ in range(2):
        assert run_cli("select", "--input", data, "--method", "slope", "--k-max", 5,
                       "--seed", 3, "--out", out) == 0
        snapshots.append(tree_bytes(out))
    assert snapshots[0] == snapshots[1]


def test_report_json_roundtrips_losslessly(tmp_path):
    data = tmp_path / "data.csv"
    write_blobs_csv(data)
    out = tmp_path / "run"
    assert run_cli("cluster", "--input", data, "--k", 2, "--out", out) == 0
    text = (out / "report.json").read_text()
    assert json.dumps(json.loads(text), indent=2) + "\n" == text


def test_config_roundtrip_reproduces_run(tmp_path, monkeypatch):
    cwd_a = tmp_path / "wa"
    cwd_b = tmp_path / "wb"
    for d in (cwd_a, cwd_b):
        d.mkdir()
    data = tmp_path / "data.csv"
    write_blobs_csv(data)

    monkeypatch.chdir(cwd_a)
    assert run_cli("select", "--input", data, "--method", "slope", "--k-max", 5,
                   "--seed", 8, "--out", "run") == 0
    first = tree_bytes(cwd_a / "run")

    monkeypatch.chdir(cwd_b)
    assert run_cli("--config", cwd_a / "run" / "report.json") == 0
    second = tree_bytes(cwd_b / "run")
    assert first == second
