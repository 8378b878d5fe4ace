"""Choosing the number of clusters.

The main selector minimizes a penalized criterion

    criterion(k) = distortion(k) + 2 * S_hat * sqrt(k / n)

where the constant S_hat is calibrated by the slope heuristic: ordinary
least squares of -distortion(k) on sqrt(k/n) over a suffix window of the
largest k values, with the window chosen by a plateau rule over window
sizes. Gap-statistic and mean-silhouette selectors are provided as
baselines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from ._genie import GenieHierarchy
from ._utils import as_points, spawn_rng
from .clustering import (
    ClusteringResult,
    InitMethod,
    empirical_distortion,
    run_clustering,
)

__all__ = [
    "DistortionCurve",
    "SelectionReport",
    "distortion_curve",
    "penalty_shape",
    "slope_select",
    "gap_select",
    "silhouette_select",
    "mean_silhouette",
    "run_selection",
]

_CURVE_STREAM = 31
_GAP_DATA_STREAM = 11
_GAP_REF_DATA = 12
_GAP_REF_RUN = 13
_SIL_STREAM = 21


@dataclass
class DistortionCurve:
    """Best achieved distortion per candidate k, with the fitted results."""

    n: int
    ks: np.ndarray
    distortions: np.ndarray
    results: list[ClusteringResult] = field(default_factory=list)

    def __post_init__(self):
        self.ks = np.asarray(self.ks, dtype=int)
        self.distortions = np.asarray(self.distortions, dtype=float)
        if self.ks.shape != self.distortions.shape or self.ks.ndim != 1:
            raise ValueError("ks and distortions must be 1-D arrays of equal length")
        if not np.all(np.diff(self.ks) == 1):
            raise ValueError("ks must be contiguous ascending integers")
        if (self.distortions < 0).any():
            raise ValueError("distortions must be nonnegative")

    def result_at(self, k: int) -> ClusteringResult:
        return self.results[int(k) - int(self.ks[0])]


@dataclass
class SelectionReport:
    """Outcome of a selector.

    criterion_values holds, per k in ks: the penalized criterion (slope),
    the gap values (gap), or the mean silhouette (silhouette). The slope
    selector also reports the calibrated constant, the chosen suffix
    window, and a per-window diagnostics table (window size, slope,
    selected k).
    """

    method: str
    k_hat: int
    ks: np.ndarray
    criterion_values: np.ndarray
    slope_constant: float | None = None
    window_table: list[tuple[int, float, int]] | None = None
    chosen_window: int | None = None
    flags: list[str] = field(default_factory=list)


def penalty_shape(k: int, n: int) -> float:
    """Penalty growth in k, up to the calibrated constant: sqrt(k / n)."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    return math.sqrt(k / n)


def _results_over_ks(points, ks, algorithm, seed_key, *, init=None, **params):
    """Fit the algorithm at every k, building the hierarchy init only once."""
    x = as_points(points)
    init = init or InitMethod()
    tree = None
    if init.kind == "robust_hierarchical":
        tree = GenieHierarchy(x, init.gini_threshold)
    results = []
    for k in ks:
        init_k = init
        if tree is not None:
            init_k = InitMethod(kind="provided", provided_centers=tree.centers_at(x, k))
        run_seed = spawn_rng(*seed_key, k).integers(2**63)
        results.append(run_clustering(x, int(k), algorithm, seed=int(run_seed),
                                      init=init_k, **params))
    return results


def distortion_curve(points, k_max: int, algorithm: str = "offline", seed: int = 0, *,
                     k_min: int = 1, init: InitMethod | None = None,
                     **params) -> DistortionCurve:
    """Fit the chosen algorithm for k = k_min..k_max and record the distortions."""
    x = as_points(points)
    if not 1 <= k_max <= x.shape[0]:
        raise ValueError(f"k_max must satisfy 1 <= k_max <= n, got {k_max}")
    if not 1 <= k_min <= k_max:
        raise ValueError(f"k_min must satisfy 1 <= k_min <= k_max, got {k_min}")
    ks = np.arange(k_min, k_max + 1)
    results = _results_over_ks(x, ks, algorithm, (seed, _CURVE_STREAM), init=init, **params)
    return DistortionCurve(n=x.shape[0], ks=ks,
                           distortions=np.array([r.distortion for r in results]),
                           results=results)


def _ols_slope(xv: np.ndarray, yv: np.ndarray) -> float:
    xc = xv - xv.mean()
    return float((xc * (yv - yv.mean())).sum() / (xc * xc).sum())


def slope_select(curve: DistortionCurve, min_window: int | None = None) -> SelectionReport:
    """Select k by the slope-calibrated penalized criterion.

    For every suffix window of the m largest k values (m = min_window ..
    k_max - 1) the slope S(m) of -distortion on sqrt(k/n) is fitted,
    clamped at zero, and k_hat(m) = argmin_k distortion(k) +
    2 S(m) sqrt(k/n) recorded. The k_hat produced by the longest run of
    consecutive window sizes wins (ties: the run reaching the larger m,
    then the smaller k_hat); its largest window is reported.
    """
    ks = curve.ks
    w = curve.distortions
    n_entries = ks.shape[0]
    if n_entries < 3:
        raise ValueError("slope selection needs at least 3 curve points")
    if min_window is None:
        min_window = max(3, int(math.floor(0.3 * int(ks[-1]))))
    m_lo = max(2, min(min_window, n_entries - 1))

    shape = np.sqrt(ks / curve.n)
    flags: list[str] = []
    table: list[tuple[int, float, int]] = []
    for m in range(m_lo, n_entries):
        s = _ols_slope(shape[-m:], -w[-m:])
        if s < 0:
            flags.append(f"window {m}: fitted slope negative, clamped to 0")
            s = 0.0
        crit = w + 2.0 * s * shape
        k_hat_m = int(ks[np.argmin(crit)])
        table.append((m, s, k_hat_m))

    # plateau rule over consecutive window sizes
    runs = []  # (length, last_m, k_hat)
    start = 0
    for i in range(1, len(table) + 1):
        if i == len(table) or table[i][2] != table[start][2]:
            runs.append((i - start, table[i - 1][0], table[start][2]))
            start = i
    runs.sort(key=lambda r: (-r[0], -r[1], r[2]))
    _, chosen_window, k_hat = runs[0]

    s_hat = next(s for m, s, _ in table if m == chosen_window)
    criterion = w + 2.0 * s_hat * shape
    return SelectionReport(method="slope", k_hat=k_hat, ks=ks.copy(),
                           criterion_values=criterion, slope_constant=s_hat,
                           window_table=table, chosen_window=chosen_window, flags=flags)


def _gap(points, k_max, B, algorithm, seed, *, init=None, **params):
    x = as_points(points)
    n, d = x.shape
    if not 1 <= k_max <= n:
        raise ValueError(f"k_max must satisfy 1 <= k_max <= n, got {k_max}")
    if B < 1:
        raise ValueError(f"B must be >= 1, got {B}")
    lo, hi = x.min(axis=0), x.max(axis=0)
    if np.all(hi == lo):
        raise ValueError("degenerate data: zero range in every coordinate")

    ks = np.arange(1, k_max + 1)
    results = _results_over_ks(x, ks, algorithm, (seed, _GAP_DATA_STREAM), init=init, **params)
    w_data = np.array([empirical_distortion(x, r.centers, "l1") for r in results])
    w_ref = np.empty((B, k_max))
    for b in range(B):
        xb = spawn_rng(seed, _GAP_REF_DATA, b).uniform(lo, hi, size=(n, d))
        ref_results = _results_over_ks(xb, ks, algorithm, (seed, _GAP_REF_RUN, b),
                                       init=init, **params)
        w_ref[b] = [empirical_distortion(xb, r.centers, "l1") for r in ref_results]

    # a zero distortion has no log: truncate the candidate range before it
    bad = (w_data <= 0) | (w_ref <= 0).any(axis=0)
    n_valid = int(np.argmax(bad)) if bad.any() else k_max
    if n_valid == 0:
        raise ValueError("distortion vanished at k=1; data has no dispersion to compare")
    ks = ks[:n_valid]
    gap = np.log(w_ref[:, :n_valid]).mean(axis=0) - np.log(w_data[:n_valid])
    sk = np.log(w_ref[:, :n_valid]).std(axis=0, ddof=0) * math.sqrt(1.0 + 1.0 / B)

    k_hat = int(ks[-1])
    for i in range(len(ks) - 1):
        if gap[i] >= gap[i + 1] - sk[i + 1]:
            k_hat = int(ks[i])
            break
    report = SelectionReport(method="gap", k_hat=k_hat, ks=ks, criterion_values=gap)
    return report, results


def gap_select(points, k_max: int, B: int = 20, algorithm: str = "offline",
               seed: int = 0, *, init: InitMethod | None = None,
               **params) -> SelectionReport:
    """Gap statistic: compare log distortion against uniform reference sets.

    Gap(k) = mean_b log W*_b(k) - log W(k) over B reference datasets drawn
    uniformly over the per-coordinate range of the data; the selected k is
    the smallest with Gap(k) >= Gap(k+1) - s_{k+1}.
    """
    report, _ = _gap(points, k_max, B, algorithm, seed, init=init, **params)
    return report


def mean_silhouette(points, labels, metric: str = "euclidean") -> float:
    """Mean silhouette coefficient of a labeling.

    s(i) = (b(i) - a(i)) / max(a(i), b(i)) with a(i) the mean distance to
    the rest of the point's own cluster and b(i) the smallest mean
    distance to another cluster; singletons and all-zero distances score 0.
    """
    x = as_points(points)
    labels = np.asarray(labels)
    if labels.shape[0] != x.shape[0]:
        raise ValueError("labels length does not match points")
    uniq, inv = np.unique(labels, return_inverse=True)
    k = uniq.shape[0]
    if k < 2:
        return 0.0
    metric_name = {"euclidean": "euclidean", "manhattan": "cityblock"}.get(metric)
    if metric_name is None:
        raise ValueError(f"unknown metric {metric!r}; expected 'euclidean' or 'manhattan'")
    dist = cdist(x, x, metric_name)
    onehot = np.zeros((x.shape[0], k))
    onehot[np.arange(x.shape[0]), inv] = 1.0
    counts = onehot.sum(axis=0)
    sums = dist @ onehot

    own = counts[inv]
    a = np.zeros(x.shape[0])
    multi = own > 1
    a[multi] = sums[np.arange(x.shape[0]), inv][multi] / (own[multi] - 1.0)
    mean_to = sums / counts
    mean_to[np.arange(x.shape[0]), inv] = np.inf
    b = mean_to.min(axis=1)

    s = np.zeros(x.shape[0])
    denom = np.maximum(a, b)
    ok = multi & (denom > 0)
    s[ok] = (b[ok] - a[ok]) / denom[ok]
    return float(s.mean())


def _silhouette(points, k_max, metric, algorithm, seed, *, init=None, **params):
    x = as_points(points)
    if k_max < 2:
        raise ValueError(f"silhouette selection needs k_max >= 2, got {k_max}")
    ks = np.arange(2, k_max + 1)
    results = _results_over_ks(x, ks, algorithm, (seed, _SIL_STREAM), init=init, **params)
    scores = np.array([mean_silhouette(x, r.labels, metric) for r in results])
    k_hat = int(ks[np.argmax(scores)])
    report = SelectionReport(method="silhouette", k_hat=k_hat, ks=ks, criterion_values=scores)
    return report, results


def silhouette_select(points, k_max: int, metric: str = "euclidean",
                      algorithm: str = "offline", seed: int = 0, *,
                      init: InitMethod | None = None, **params) -> SelectionReport:
    """Select the k in 2..k_max that maximizes the mean silhouette."""
    report, _ = _silhouette(points, k_max, metric, algorithm, seed, init=init, **params)
    return report


def run_selection(points, method: str, k_max: int, algorithm: str = "offline",
                  seed: int = 0, *, min_window: int | None = None, gap_b: int = 20,
                  silhouette_metric: str = "euclidean", init: InitMethod | None = None,
                  **params):
    """Run a selector and return (report, fitted result at k_hat, curve or None)."""
    if method == "slope":
        curve = distortion_curve(points, k_max, algorithm, seed, init=init, **params)
        report = slope_select(curve, min_window)
        return report, curve.result_at(report.k_hat), curve
    if method == "gap":
        report, results = _gap(points, k_max, gap_b, algorithm, seed, init=init, **params)
        return report, results[report.k_hat - 1], None
    if method == "silhouette":
        report, results = _silhouette(points, k_max, silhouette_metric, algorithm, seed,
                                      init=init, **params)
        return report, results[report.k_hat - 2], None
    raise ValueError(f"unknown selection method {method!r}")
