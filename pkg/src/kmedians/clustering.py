"""K-medians clustering and a K-means baseline.

Three K-medians variants share one L1 objective:

* offline      -- Lloyd iteration, per-cluster Weiszfeld median M-step
* semi_online  -- Lloyd iteration, one averaged-stochastic-gradient pass
                  per cluster as the M-step
* online       -- single sequential pass; each point updates its nearest
                  (averaged) center by a Robbins-Monro step

plus `kmeans` (arithmetic-mean M-step, squared-L2 objective) used as the
non-robust baseline in benchmarks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._genie import GenieHierarchy
from ._utils import as_codebook, as_points, pairwise_distances, spawn_rng
from .geomedian import AsgConfig, _asg_stream, weiszfeld_median

__all__ = [
    "ALGORITHMS",
    "ClusteringResult",
    "InitMethod",
    "assign",
    "empirical_distortion",
    "init_centers",
    "lloyd_kmedians",
    "online_kmedians",
    "kmeans_baseline",
    "run_clustering",
]

ALGORITHMS = ("offline", "semi_online", "online", "kmeans")
INIT_KINDS = ("robust_hierarchical", "plus_plus_l1", "provided")

_INIT_STREAM = 101
_RESTART_STREAM = 102


@dataclass
class ClusteringResult:
    """A fitted codebook with its assignment and achieved distortion.

    `distortion` is the empirical L1 distortion for the K-medians variants
    and the mean squared distance for `kmeans`. `labels` always equals
    `assign(points, centers)` for the returned centers.
    """

    centers: np.ndarray
    labels: np.ndarray
    distortion: float
    iterations: int
    restarts_used: int
    algorithm: str


@dataclass
class InitMethod:
    """Center initialization strategy.

    kind:
      robust_hierarchical -- Gini-constrained single linkage over the MST,
                             coordinate-wise median per cluster (default)
      plus_plus_l1        -- greedy sampling proportional to the distance
                             (not squared) to the nearest chosen center
      provided            -- pass-through of `provided_centers`
    """

    kind: str = "robust_hierarchical"
    gini_threshold: float = 0.3
    provided_centers: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in INIT_KINDS:
            raise ValueError(f"unknown init kind {self.kind!r}; expected one of {INIT_KINDS}")
        if not 0.0 < self.gini_threshold <= 1.0:
            raise ValueError(f"gini_threshold must be in (0, 1], got {self.gini_threshold}")
        if self.kind == "provided" and self.provided_centers is None:
            raise ValueError("provided init requires provided_centers")


def assign(points, codebook) -> np.ndarray:
    """Nearest-center index for every point (ties go to the lowest index)."""
    x = as_points(points)
    c = as_codebook(codebook, d=x.shape[1])
    return np.argmin(pairwise_distances(x, c), axis=1)


def empirical_distortion(points, codebook, norm: str = "l1") -> float:
    """Mean distance (l1) or mean squared distance (squared_l2) to the nearest center."""
    x = as_points(points)
    c = as_codebook(codebook, d=x.shape[1])
    dmin = pairwise_distances(x, c).min(axis=1)
    if norm == "l1":
        return float(dmin.mean())
    if norm == "squared_l2":
        return float((dmin**2).mean())
    raise ValueError(f"unknown norm {norm!r}; expected 'l1' or 'squared_l2'")


def _plus_plus_l1(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    dmin = np.linalg.norm(x - x[chosen[0]], axis=1)
    for _ in range(1, k):
        total = dmin.sum()
        if total > 0:
            idx = int(rng.choice(n, p=dmin / total))
        else:
            # all remaining mass sits on already-chosen values; fall back to
            # a uniform draw over the not-yet-chosen indices
            pool = np.setdiff1d(np.arange(n), np.asarray(chosen))
            idx = int(rng.choice(pool))
        chosen.append(idx)
        dmin = np.minimum(dmin, np.linalg.norm(x - x[idx], axis=1))
    return x[chosen].copy()


def _init_codebook(x: np.ndarray, k: int, method: InitMethod, rng: np.random.Generator) -> np.ndarray:
    if method.kind == "provided":
        c = as_codebook(method.provided_centers, d=x.shape[1])
        if c.shape[0] != k:
            raise ValueError(f"provided codebook has {c.shape[0]} centers, expected {k}")
        return c.copy()
    if method.kind == "plus_plus_l1":
        return _plus_plus_l1(x, k, rng)
    return GenieHierarchy(x, method.gini_threshold).centers_at(x, k)


def init_centers(points, k: int, method: InitMethod | None = None, seed: int = 0) -> np.ndarray:
    """Initial codebook of k centers for the given strategy."""
    x = as_points(points)
    if not 1 <= k <= x.shape[0]:
        raise ValueError(f"k must satisfy 1 <= k <= n, got k={k}, n={x.shape[0]}")
    method = method or InitMethod()
    return _init_codebook(x, k, method, spawn_rng(seed, _INIT_STREAM))


def _repair_empty(x: np.ndarray, centers: np.ndarray, labels: np.ndarray):
    """Re-seed centers that received no points at the farthest-out point.

    Guarantees k live centers whenever the data has k distinct points.
    Returns (centers, labels) with labels recomputed if anything moved.
    """
    k = centers.shape[0]
    counts = np.bincount(labels, minlength=k)
    if (counts > 0).all():
        return centers, labels
    dmin = pairwise_distances(x, centers).min(axis=1)
    for j in np.flatnonzero(counts == 0):
        far = int(np.argmax(dmin))
        centers[j] = x[far]
        dmin = np.minimum(dmin, np.linalg.norm(x - centers[j], axis=1))
    return centers, assign(x, centers)


def _lloyd_once(x, centers, m_step, max_iter):
    """Alternate assignment and M-step until the labels stop changing."""
    centers = centers.copy()
    centers, labels = _repair_empty(x, centers, assign(x, centers))
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        for j in range(centers.shape[0]):
            mask = labels == j
            if mask.any():
                centers[j] = m_step(x[mask], centers[j])
        centers, new_labels = _repair_empty(x, centers, assign(x, centers))
        if np.array_equal(new_labels, labels):
            labels = new_labels
            break
        labels = new_labels
    return centers, labels, iterations


def _best_of_restarts(x, k, init, seed, n_start, run_one, stochastic_mstep):
    """Shared restart driver for the Lloyd-style algorithms.

    Restarts only help when something varies between them; with a
    deterministic init and a deterministic M-step every restart repeats
    the first one, so a single run is performed.
    """
    deterministic = init.kind != "plus_plus_l1" and not stochastic_mstep
    n_start = 1 if deterministic else max(1, n_start)
    fixed_init = None
    if init.kind != "plus_plus_l1":
        fixed_init = _init_codebook(x, k, init, spawn_rng(seed, _INIT_STREAM))

    best = None
    for r in range(n_start):
        rng = spawn_rng(seed, _RESTART_STREAM, r)
        centers0 = fixed_init if fixed_init is not None else _init_codebook(x, k, init, rng)
        out = run_one(centers0, rng)
        if best is None or out[2] < best[2]:
            best = out
    centers, labels, distortion, iterations = best
    return centers, labels, distortion, iterations, n_start


def lloyd_kmedians(points, k: int, backend: str = "weiszfeld", init: InitMethod | None = None,
                   max_iter: int = 100, n_start: int = 5, seed: int = 0,
                   cfg: AsgConfig | None = None, median_tol: float = 1e-6,
                   median_max_iter: int = 100) -> ClusteringResult:
    """Lloyd-style K-medians: alternate nearest-center assignment with a
    per-cluster geometric-median estimate.

    backend 'weiszfeld' recomputes each center by Weiszfeld iteration
    (the offline variant); backend 'asg' makes one averaged stochastic
    gradient pass over the cluster members, warm-started at the previous
    center (the semi-online variant). The best of n_start restarts by
    empirical L1 distortion is returned.
    """
    x = as_points(points)
    if not 1 <= k <= x.shape[0]:
        raise ValueError(f"k must satisfy 1 <= k <= n, got k={k}, n={x.shape[0]}")
    if backend not in ("weiszfeld", "asg"):
        raise ValueError(f"unknown backend {backend!r}; expected 'weiszfeld' or 'asg'")
    init = init or InitMethod()
    cfg = cfg or AsgConfig()

    def run_one(centers0, rng):
        if backend == "weiszfeld":
            def m_step(members, center):
                return weiszfeld_median(members, tol=median_tol,
                                        max_iter=median_max_iter, start=center).point
        else:
            def m_step(members, center):
                m = center.copy()
                m_bar = center.copy()
                count = 1
                for _ in range(cfg.passes):
                    order = rng.permutation(members.shape[0])
                    m, m_bar, count = _asg_stream(members, order, m, m_bar, count,
                                                  cfg.c_gamma, cfg.alpha)
                return m_bar
        centers, labels, iterations = _lloyd_once(x, centers0, m_step, max_iter)
        return centers, labels, empirical_distortion(x, centers, "l1"), iterations

    centers, labels, distortion, iterations, used = _best_of_restarts(
        x, k, init, seed, n_start, run_one, stochastic_mstep=(backend == "asg"))
    algorithm = "offline" if backend == "weiszfeld" else "semi_online"
    return ClusteringResult(centers=centers, labels=labels, distortion=distortion,
                            iterations=iterations, restarts_used=used, algorithm=algorithm)


def online_kmedians(points, k: int, cfg: AsgConfig | None = None,
                    init: InitMethod | None = None, seed: int = 0) -> ClusteringResult:
    """Single-pass sequential K-medians.

    Each point is assigned to the nearest averaged center, which then
    takes a Robbins-Monro step of size c_gamma / (n_r + 1)**alpha toward
    the point; per-center counters start at 1 so the initial centers carry
    one observation's weight in the averages. Costs O(k n d) arithmetic.
    """
    x = as_points(points)
    n, d = x.shape
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= n, got k={k}, n={n}")
    cfg = cfg or AsgConfig()
    init = init or InitMethod()

    m = _init_codebook(x, k, init, spawn_rng(seed, _INIT_STREAM))
    m_bar = m.copy()
    counts = np.ones(k, dtype=np.intp)
    # order stream aligned with asg_median so that k=1 reduces to it exactly
    order = np.random.default_rng(seed).permutation(n)
    for idx in order:
        xi = x[idx]
        r = int(np.argmin(np.linalg.norm(m_bar - xi, axis=1)))
        diff = xi - m[r]
        nrm = np.sqrt(diff @ diff)
        if nrm > 0.0:
            m[r] = m[r] + (cfg.c_gamma / (counts[r] + 1) ** cfg.alpha / nrm) * diff
        m_bar[r] = m_bar[r] + (m[r] - m_bar[r]) / (counts[r] + 1)
        counts[r] += 1

    labels = assign(x, m_bar)
    return ClusteringResult(centers=m_bar, labels=labels,
                            distortion=empirical_distortion(x, m_bar, "l1"),
                            iterations=n, restarts_used=1, algorithm="online")


def kmeans_baseline(points, k: int, init: InitMethod | None = None, max_iter: int = 100,
                    n_start: int = 5, seed: int = 0) -> ClusteringResult:
    """Lloyd K-means (arithmetic-mean M-step, squared-L2 distortion)."""
    x = as_points(points)
    if not 1 <= k <= x.shape[0]:
        raise ValueError(f"k must satisfy 1 <= k <= n, got k={k}, n={x.shape[0]}")
    init = init or InitMethod()

    def run_one(centers0, rng):
        centers, labels, iterations = _lloyd_once(
            x, centers0, lambda members, center: members.mean(axis=0), max_iter)
        return centers, labels, empirical_distortion(x, centers, "squared_l2"), iterations

    centers, labels, distortion, iterations, used = _best_of_restarts(
        x, k, init, seed, n_start, run_one, stochastic_mstep=False)
    return ClusteringResult(centers=centers, labels=labels, distortion=distortion,
                            iterations=iterations, restarts_used=used, algorithm="kmeans")


def run_clustering(points, k: int, algorithm: str, seed: int = 0, *,
                   init: InitMethod | None = None, cfg: AsgConfig | None = None,
                   max_iter: int = 100, n_start: int | None = None,
                   median_tol: float = 1e-6, median_max_iter: int = 100) -> ClusteringResult:
    """Dispatch to one of the four algorithms with shared defaults."""
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
    if algorithm == "online":
        return online_kmedians(points, k, cfg=cfg, init=init, seed=seed)
    n_start = 5 if n_start is None else n_start
    if algorithm == "kmeans":
        return kmeans_baseline(points, k, init=init, max_iter=max_iter,
                               n_start=n_start, seed=seed)
    backend = "weiszfeld" if algorithm == "offline" else "asg"
    return lloyd_kmedians(points, k, backend=backend, init=init, max_iter=max_iter,
                          n_start=n_start, seed=seed, cfg=cfg,
                          median_tol=median_tol, median_max_iter=median_max_iter)
