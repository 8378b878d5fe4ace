"""Command-line interface.

Subcommands: cluster (fixed k), select (choose k), simulate (write
synthetic datasets), bench (repeated-trial summaries), evaluate (score a
labeling against ground truth). Every run writes a JSON report whose
`config` block, fed back through --config, reproduces the run exactly;
all outputs are byte-deterministic given the seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from ._utils import spawn_rng
from .clustering import ALGORITHMS, AsgConfig, InitMethod, run_clustering
from .evaluation import adjusted_rand_index, centroid_l1_error, summarize_trials
from .selection import run_selection
from .simulation import (
    ContaminationSpec,
    LabeledDataset,
    MixtureSpec,
    contaminate,
    make_scenario,
    sample_mixture,
    sphere_centers,
)

log = logging.getLogger("kmedians")

_DATA_STREAM = 51
_CONTAM_STREAM = 52
_SPHERE_STREAM = 53
_RUN_STREAM = 54

_SCENARIO_KTRUE = {"s1": 1, "s2": 4, "s3": 5, "sphere10": 10}
_SCENARIO_KMAX = {"s1": 10, "s2": 15, "s3": 15, "sphere10": 20}

_LAWS = {
    "t1": dict(law="student", df=1),
    "t2": dict(law="student", df=2),
    "uniform": dict(law="uniform", low=-10.0, high=10.0),
}


def derive_seed(*keys: int) -> int:
    return int(spawn_rng(*keys).integers(2**63))


# ---------------------------------------------------------------------------
# dataset I/O


def load_csv(path: str):
    """Read a points CSV: numeric columns plus optional label/contaminated.

    Returns (points, labels or None, mask or None). The header row is
    required; parse failures report the offending row number.
    """
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if all(_is_number(h) for h in header):
            raise ValueError(f"{path}: header row required (first row is numeric)")
        label_col = header.index("label") if "label" in header else None
        mask_col = header.index("contaminated") if "contaminated" in header else None
        coord_cols = [i for i in range(len(header)) if i not in (label_col, mask_col)]
        if not coord_cols:
            raise ValueError(f"{path}: no coordinate columns")
        pts, labels, mask = [], [], []
        for rownum, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(f"{path}: row {rownum}: expected {len(header)} fields, "
                                 f"got {len(row)}")
            try:
                pts.append([float(row[i]) for i in coord_cols])
                if label_col is not None:
                    labels.append(int(float(row[label_col])))
                if mask_col is not None:
                    mask.append(float(row[mask_col]) != 0.0)
            except ValueError:
                raise ValueError(f"{path}: row {rownum}: non-numeric field") from None
        if not pts:
            raise ValueError(f"{path}: no data rows")
    points = np.array(pts)
    return (points,
            np.array(labels, dtype=int) if label_col is not None else None,
            np.array(mask, dtype=bool) if mask_col is not None else None)


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def load_labels_csv(path: str) -> np.ndarray:
    """Read a predicted-labels CSV: the 'label' column, or a single column."""
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if "label" in header:
            idx = header.index("label")
        elif len(header) == 1:
            idx = 0
        else:
            raise ValueError(f"{path}: expected a 'label' column")
        out = []
        for rownum, row in enumerate(reader, start=2):
            try:
                out.append(int(float(row[idx])))
            except (ValueError, IndexError):
                raise ValueError(f"{path}: row {rownum}: bad label") from None
    if not out:
        raise ValueError(f"{path}: no data rows")
    return np.array(out, dtype=int)


def write_dataset_csv(path: Path, data: LabeledDataset):
    d = data.points.shape[1]
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow([f"x{i}" for i in range(d)] + ["label", "contaminated"])
        for row, lab, con in zip(data.points, data.true_labels, data.contaminated):
            w.writerow([repr(float(v)) for v in row] + [int(lab), int(con)])


def _write_csv(path: Path, header: list[str], rows):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                        for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_report(out_dir: Path, report: dict) -> Path:
    path = out_dir / "report.json"
    path.write_text(json.dumps(_jsonable(report), indent=2) + "\n", encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# shared config plumbing


def _dataset_from_args(args) -> tuple[np.ndarray, np.ndarray | None, np.ndarray | None, dict]:
    """Resolve --input / --scenario (+ contamination) into points and truth."""
    if args.input and args.scenario:
        raise ConfigError("--input and --scenario are mutually exclusive")
    if args.input:
        points, labels, mask = load_csv(args.input)
        return points, labels, mask, {"source": args.input, "truth_centers": None}
    if not args.scenario:
        raise ConfigError("one of --input or --scenario is required")
    data, truth_centers = _make_scenario_data(args.scenario, args.seed,
                                              args.points_per_cluster)
    rho = getattr(args, "rho", 0.0) or 0.0
    if rho > 0:
        spec = ContaminationSpec(rho=rho, **_LAWS[args.law])
        data = contaminate(data, spec, seed=derive_seed(args.seed, _CONTAM_STREAM))
    return data.points, data.true_labels, data.contaminated, {
        "source": args.scenario, "truth_centers": truth_centers}


def _make_scenario_data(scenario: str, seed: int, points_per_cluster: int | None):
    data_seed = derive_seed(seed, _DATA_STREAM)
    if scenario == "sphere10":
        centers = sphere_centers(10, 10.0, 5, seed=derive_seed(seed, _SPHERE_STREAM))
        ppc = points_per_cluster or 500
        return sample_mixture(MixtureSpec(centers, ppc), seed=data_seed), centers
    data = make_scenario(scenario, seed=data_seed)
    centers = None
    if scenario == "s1":
        centers = np.full((1, 10), 0.5)
    else:
        centers = np.array(data.spec["centers"])
    return data, centers


def _check_algorithm(name: str):
    if name not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {name!r}; expected one of {ALGORITHMS}")


def _algo_params(args) -> dict:
    cfg = AsgConfig(c_gamma=args.c_gamma, alpha=args.alpha, passes=args.passes)
    init = InitMethod(kind=args.init, gini_threshold=args.gini_threshold)
    return dict(init=init, cfg=cfg, max_iter=args.max_iter, n_start=args.n_start,
                median_tol=args.median_tol)


def _evaluation_block(labels, true_labels, mask, est_centers, truth_centers):
    if true_labels is None:
        return None
    block = {"ari": adjusted_rand_index(true_labels, labels)}
    if mask is not None and mask.any():
        keep = ~mask
        if keep.sum() >= 2:
            block["ari_uncontaminated"] = adjusted_rand_index(true_labels[keep], labels[keep])
    if truth_centers is not None and est_centers is not None:
        block["centroid_l1_error"] = centroid_l1_error(truth_centers, est_centers)
    return block


def _clustering_block(result) -> dict:
    sizes = np.bincount(result.labels, minlength=result.centers.shape[0])
    return {
        "algorithm": result.algorithm,
        "k": int(result.centers.shape[0]),
        "centers": result.centers,
        "cluster_sizes": sizes,
        "distortion": result.distortion,
        "iterations": result.iterations,
        "restarts_used": result.restarts_used,
    }


def _selection_block(report) -> dict:
    block = {
        "method": report.method,
        "k_hat": report.k_hat,
        "ks": report.ks,
        "criterion_values": report.criterion_values,
    }
    if report.slope_constant is not None:
        block["slope_constant"] = report.slope_constant
        block["chosen_window"] = report.chosen_window
        block["window_table"] = [list(t) for t in report.window_table]
        block["flags"] = list(report.flags)
    return block


def pca_projection(points: np.ndarray) -> np.ndarray:
    """First two principal components of the centered data, sign-fixed."""
    x = points - points.mean(axis=0)
    _, _, vt = np.linalg.svd(x, full_matrices=False)
    if vt.shape[0] < 2:
        vt = np.vstack([vt, np.zeros((2 - vt.shape[0], x.shape[1]))])
    comps = vt[:2].copy()
    for i in range(2):
        j = int(np.argmax(np.abs(comps[i])))
        if comps[i, j] < 0:
            comps[i] = -comps[i]
    return x @ comps.T


class ConfigError(Exception):
    """Invalid flag combination or option value."""


def _echo(args) -> dict:
    skip = {"func", "config", "verbose"}
    return {k: _jsonable(v) for k, v in sorted(vars(args).items()) if k not in skip}


def _prepare_out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# subcommands


def cmd_cluster(args) -> int:
    if args.k is None:
        raise ConfigError("cluster requires --k")
    _check_algorithm(args.algorithm)
    out = _prepare_out(args)
    points, true_labels, mask, meta = _dataset_from_args(args)
    t0 = time.perf_counter()
    result = run_clustering(points, args.k, args.algorithm,
                            seed=derive_seed(args.seed, _RUN_STREAM), **_algo_params(args))
    log.info("cluster: fitted k=%d in %.2fs", args.k, time.perf_counter() - t0)
    _write_csv(out / "labels.csv", ["label"], [[int(v)] for v in result.labels])
    report = {
        "command": args.command,
        "config": _echo(args),
        "selection": None,
        "clustering": _clustering_block(result),
        "evaluation": _evaluation_block(result.labels, true_labels, mask,
                                        result.centers, meta["truth_centers"]),
        "outputs": {"labels": "labels.csv"},
    }
    write_report(out, report)
    return 0


def cmd_select(args) -> int:
    if args.method == "none":
        if args.k is None:
            raise ConfigError("--method none requires --k")
        return cmd_cluster(args)
    if args.k is not None:
        raise ConfigError("--k conflicts with a selection method; use --k-max")
    if args.k_max is None:
        raise ConfigError("select requires --k-max")
    _check_algorithm(args.algorithm)
    out = _prepare_out(args)
    points, true_labels, mask, meta = _dataset_from_args(args)
    t0 = time.perf_counter()
    report_sel, result, curve = run_selection(
        points, args.method, args.k_max, args.algorithm,
        seed=derive_seed(args.seed, _RUN_STREAM), min_window=args.min_window,
        gap_b=args.gap_b, silhouette_metric=args.silhouette_metric, **_algo_params(args))
    log.info("select: method=%s k_hat=%d in %.2fs", args.method, report_sel.k_hat,
             time.perf_counter() - t0)

    outputs = {"labels": "labels.csv", "curve": "curve.csv", "projection": "projection.csv"}
    _write_csv(out / "labels.csv", ["label"], [[int(v)] for v in result.labels])
    if curve is not None:
        _write_csv(out / "curve.csv", ["k", "distortion", "criterion"],
                   zip(curve.ks.tolist(), curve.distortions, report_sel.criterion_values))
        _write_csv(out / "windows.csv", ["window", "slope", "k_hat"],
                   report_sel.window_table)
        outputs["windows"] = "windows.csv"
    else:
        _write_csv(out / "curve.csv", ["k", "criterion"],
                   zip(report_sel.ks.tolist(), report_sel.criterion_values))
    proj = pca_projection(points)
    _write_csv(out / "projection.csv", ["pc1", "pc2", "label"],
               [(p[0], p[1], int(lab)) for p, lab in zip(proj, result.labels)])

    report = {
        "command": args.command,
        "config": _echo(args),
        "selection": _selection_block(report_sel),
        "clustering": _clustering_block(result),
        "evaluation": _evaluation_block(result.labels, true_labels, mask,
                                        result.centers, meta["truth_centers"]),
        "outputs": outputs,
    }
    write_report(out, report)
    return 0


def cmd_simulate(args) -> int:
    if not args.scenario:
        raise ConfigError("simulate requires --scenario")
    out = _prepare_out(args)
    data, _ = _make_scenario_data(args.scenario, args.seed, args.points_per_cluster)
    if args.rho and args.rho > 0:
        spec = ContaminationSpec(rho=args.rho, **_LAWS[args.law])
        data = contaminate(data, spec, seed=derive_seed(args.seed, _CONTAM_STREAM))
    write_dataset_csv(out / "dataset.csv", data)
    report = {
        "command": args.command,
        "config": _echo(args),
        "dataset": {"n": data.points.shape[0], "d": data.points.shape[1],
                    "n_contaminated": int(data.contaminated.sum()), "spec": data.spec},
        "outputs": {"dataset": "dataset.csv"},
    }
    write_report(out, report)
    return 0


def cmd_bench(args) -> int:
    if not args.scenario:
        raise ConfigError("bench requires --scenario")
    trials = args.trials if args.trials is not None else (50 if args.full else 20)
    ppc = args.points_per_cluster or (500 if args.full else 200)
    k_max = args.k_max or _SCENARIO_KMAX[args.scenario]
    k_true = _SCENARIO_KTRUE[args.scenario]
    algorithms = [a.strip() for a in args.algorithm.split(",")]
    if "all" in algorithms:
        algorithms = list(ALGORITHMS)
    for a in algorithms:
        if a not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {a!r}")
    rhos = [float(r) for r in str(args.rho).split(",")] if args.rho else [0.0]

    out = _prepare_out(args)
    rows = []
    for algorithm in algorithms:
        for rho in rhos:
            per_trial = []
            for t in range(trials):
                t0 = time.perf_counter()
                data, truth_centers = _make_scenario_data(
                    args.scenario, derive_seed(args.seed, 61, t), ppc)
                if rho > 0:
                    spec = ContaminationSpec(rho=rho, **_LAWS[args.law])
                    data = contaminate(data, spec, seed=derive_seed(args.seed, 62, t))
                report_sel, result, _ = run_selection(
                    data.points, args.method, k_max, algorithm,
                    seed=derive_seed(args.seed, 63, t), min_window=args.min_window,
                    gap_b=args.gap_b, silhouette_metric=args.silhouette_metric,
                    **_algo_params(args))
                keep = ~data.contaminated
                ari = adjusted_rand_index(data.true_labels[keep], result.labels[keep])
                err = centroid_l1_error(truth_centers, result.centers)
                per_trial.append((report_sel.k_hat, ari, err))
                log.info("bench: %s rho=%g trial=%d k_hat=%d ari=%.3f (%.2fs)",
                         algorithm, rho, t, report_sel.k_hat, ari,
                         time.perf_counter() - t0)
            s = summarize_trials(per_trial, k_true)
            rows.append([args.scenario, args.method, algorithm, args.law, rho,
                         s.trials, s.n_correct, s.k_bar, s.ari_mean, s.l1_error_median])

    _write_csv(out / "summary.csv",
               ["scenario", "method", "algorithm", "law", "rho", "trials",
                "n_correct", "k_bar", "ari_mean", "l1_error_median"], rows)
    report = {
        "command": args.command,
        "config": _echo(args),
        "rows": len(rows),
        "outputs": {"summary": "summary.csv"},
    }
    write_report(out, report)
    return 0


def cmd_evaluate(args) -> int:
    if not args.input:
        raise ConfigError("evaluate requires --input (dataset with a label column)")
    if not args.labels:
        raise ConfigError("evaluate requires --labels")
    out = _prepare_out(args)
    points, true_labels, mask, _ = _dataset_from_args(args)
    if true_labels is None:
        raise ValueError(f"{args.input}: no label column to evaluate against")
    pred = load_labels_csv(args.labels)
    if pred.shape[0] != points.shape[0]:
        raise ValueError(f"{args.labels}: {pred.shape[0]} labels for {points.shape[0]} points")
    block = {"ari": adjusted_rand_index(true_labels, pred), "n": int(points.shape[0])}
    if mask is not None and mask.any() and (~mask).sum() >= 2:
        block["ari_uncontaminated"] = adjusted_rand_index(true_labels[~mask], pred[~mask])
    if args.true_centers and args.pred_centers:
        tc, _, _ = load_csv(args.true_centers)
        pc, _, _ = load_csv(args.pred_centers)
        block["centroid_l1_error"] = centroid_l1_error(tc, pc)
    report = {"command": args.command, "config": _echo(args), "evaluation": block,
              "outputs": {}}
    write_report(out, report)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(p: argparse.ArgumentParser, *, data: bool = True, rho_grid: bool = False):
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--out", default="out", help="output directory (default ./out)")
    p.add_argument("--verbose", action="store_true", help="log progress to stderr")
    if data:
        p.add_argument("--input", help="points CSV (header required; optional "
                                       "label/contaminated columns)")
        p.add_argument("--scenario", choices=["s1", "s2", "s3", "sphere10"],
                       help="generate a named synthetic dataset instead of --input")
        p.add_argument("--points-per-cluster", type=int, default=None,
                       help="override cluster size for sphere10")
        if rho_grid:
            p.add_argument("--rho", default="0",
                           help="comma-separated contamination proportions (default '0')")
        else:
            p.add_argument("--rho", type=float, default=0.0,
                           help="contamination proportion for generated data (default 0)")
        p.add_argument("--law", choices=sorted(_LAWS), default="t1",
                       help="contamination law (default t1)")


def _add_algo(p: argparse.ArgumentParser, *, multi: bool = False):
    p.add_argument("--algorithm", default="offline",
                   help="comma-separated algorithms, or 'all' (default offline)" if multi
                   else "offline | semi_online | online | kmeans (default offline)")
    p.add_argument("--init", choices=["robust_hierarchical", "plus_plus_l1"],
                   default="robust_hierarchical", help="center initialization")
    p.add_argument("--gini-threshold", type=float, default=0.3,
                   help="inequality threshold of the hierarchical init (default 0.3)")
    p.add_argument("--n-start", type=int, default=5,
                   help="restarts for the Lloyd-style algorithms (default 5)")
    p.add_argument("--max-iter", type=int, default=100,
                   help="Lloyd iteration cap (default 100)")
    p.add_argument("--c-gamma", type=float, default=1.0,
                   help="gradient step scale (default 1.0)")
    p.add_argument("--alpha", type=float, default=0.75,
                   help="gradient step decay in (0.5, 1) (default 0.75)")
    p.add_argument("--passes", type=int, default=1,
                   help="stochastic gradient passes per median fit (default 1)")
    p.add_argument("--median-tol", type=float, default=1e-6,
                   help="Weiszfeld displacement tolerance inside Lloyd (default 1e-6)")


def _add_selection(p: argparse.ArgumentParser):
    p.add_argument("--k-max", type=int, default=None, help="largest candidate k")
    p.add_argument("--min-window", type=int, default=None,
                   help="smallest slope-fit window (default max(3, 0.3*k_max))")
    p.add_argument("--gap-b", type=int, default=20,
                   help="reference sets for the gap statistic (default 20)")
    p.add_argument("--silhouette-metric", choices=["euclidean", "manhattan"],
                   default="euclidean", help="distance for silhouette scoring")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kmedians",
        description="Robust K-medians clustering with automatic selection of k.")
    parser.add_argument("--config", help="JSON report or config echo to re-run")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="cluster with a fixed number of clusters")
    _add_common(p)
    _add_algo(p)
    p.add_argument("--k", type=int, required=False, help="number of clusters")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("select", help="choose the number of clusters")
    _add_common(p)
    _add_algo(p)
    _add_selection(p)
    p.add_argument("--method", choices=["slope", "gap", "silhouette", "none"],
                   default="slope", help="selection method (default slope)")
    p.add_argument("--k", type=int, default=None,
                   help="fixed k (only with --method none)")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("simulate", help="write a synthetic dataset to CSV")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="repeated-trial selection benchmark")
    _add_common(p, rho_grid=True)
    _add_algo(p, multi=True)
    _add_selection(p)
    p.add_argument("--method", choices=["slope", "gap", "silhouette"],
                   default="slope", help="selection method (default slope)")
    p.add_argument("--trials", type=int, default=None,
                   help="trials per configuration (default 20; 50 with --full)")
    p.add_argument("--full", action="store_true",
                   help="full-scale protocol: 50 trials, 500 points per cluster")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("evaluate", help="score a labeling against ground truth")
    _add_common(p)
    p.add_argument("--labels", help="CSV with the predicted labels (one column)")
    p.add_argument("--true-centers", help="CSV of true centers (optional)")
    p.add_argument("--pred-centers", help="CSV of estimated centers (optional)")
    p.set_defaults(func=cmd_evaluate)
    return parser


def _config_to_argv(cfg: dict) -> list[str]:
    argv = []
    for key, value in cfg.items():
        if key == "command" or value is None:
            continue
        flag = "--" + key.replace("_", "-")
        if isinstance(value, bool):
            if value:
                argv.append(flag)
        else:
            argv.extend([flag, str(value)])
    return argv


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if "--config" in argv:
        i = argv.index("--config")
        if i + 1 >= len(argv):
            print("error: --config requires a path", file=sys.stderr)
            return 2
        try:
            doc = json.loads(Path(argv[i + 1]).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            print(f"error: --config: {e}", file=sys.stderr)
            return 3
        rest = argv[:i] + argv[i + 2:]
        cfg = doc.get("config", doc)
        command = doc.get("command") or cfg.get("command")
        if rest and not rest[0].startswith("-"):
            command = rest.pop(0)
        if not command:
            print("error: --config document does not name a command", file=sys.stderr)
            return 2
        argv = [command] + _config_to_argv(cfg) + rest

    args = build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr, format="%(message)s",
                        level=logging.INFO if getattr(args, "verbose", False)
                        else logging.WARNING)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
