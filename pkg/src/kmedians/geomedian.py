"""Geometric median estimators.

Two methods for the spatial (L1) median of a finite point set: the
Weiszfeld fixed-point iteration and an averaged stochastic gradient
scheme that processes the points as a stream. Both minimize the mean
Euclidean distance to the data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._utils import as_points, coordinate_median

__all__ = ["MedianEstimate", "AsgConfig", "l1_objective", "weiszfeld_median", "asg_median"]


@dataclass
class MedianEstimate:
    """Output of a median solver.

    point      : the estimate in R^d
    iterations : fixed-point iterations (Weiszfeld) or stream updates (ASG)
    converged  : True when the displacement criterion fired before the
                 iteration cap (Weiszfeld); ASG always completes its stream
    objective  : mean Euclidean distance from the data to `point`
    """

    point: np.ndarray
    iterations: int
    converged: bool
    objective: float


@dataclass
class AsgConfig:
    """Hyperparameters of the averaged stochastic gradient estimator.

    The step before the t-th update is c_gamma / (t + 1) ** alpha, which
    satisfies the usual divergent-sum / summable-square step conditions
    for any alpha in (1/2, 1).
    """

    c_gamma: float = 1.0
    alpha: float = 0.75
    passes: int = 1

    def __post_init__(self):
        if not self.c_gamma > 0:
            raise ValueError(f"c_gamma must be positive, got {self.c_gamma}")
        if not 0.5 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie strictly between 0.5 and 1, got {self.alpha}")
        if self.passes < 1:
            raise ValueError(f"passes must be >= 1, got {self.passes}")


def l1_objective(points, u) -> float:
    """Mean Euclidean distance from the points to u."""
    x = as_points(points)
    u = np.asarray(u, dtype=float).ravel()
    if u.shape[0] != x.shape[1]:
        raise ValueError(f"query dimension {u.shape[0]} does not match data dimension {x.shape[1]}")
    return float(np.linalg.norm(x - u, axis=1).mean())


def _weiszfeld_step(x: np.ndarray, m: np.ndarray) -> np.ndarray:
    """One fixed-point update; points coinciding with the iterate carry no weight.

    When the iterate sits exactly on a data point, jumping to the
    weighted average of the remaining points can increase the objective;
    in that case the iterate stays put (it is then a fixed point and the
    displacement stopping rule terminates). This keeps the objective
    non-increasing along every trajectory.
    """
    d = np.linalg.norm(x - m, axis=1)
    keep = d > 0.0
    if not keep.any():
        # every point sits on the iterate: nothing to move
        return m.copy()
    w = 1.0 / d[keep]
    m_new = (w[:, None] * x[keep]).sum(axis=0) / w.sum()
    if not keep.all():
        if np.linalg.norm(x - m_new, axis=1).mean() > d.mean():
            return m.copy()
    return m_new


def _default_start(x: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """Coordinate-wise median, nudged off the data if it lands on a point.

    The nudge must exceed the displacement stopping threshold, otherwise
    the first fixed-point step (which snaps back toward the coincident
    point) would read as converged while the iterate may still be
    escaping a non-optimal data point.
    """
    start = coordinate_median(x)
    diag = float(np.linalg.norm(x.max(axis=0) - x.min(axis=0)))
    if diag == 0.0:
        return start
    shift = max(1e-9 * diag, 16.0 * tol * (1.0 + float(np.linalg.norm(start))))
    while (np.linalg.norm(x - start, axis=1) == 0.0).any():
        start = start + shift
        shift *= 2.0
    return start


def weiszfeld_median(points, tol: float = 1e-8, max_iter: int = 200, start=None) -> MedianEstimate:
    """Geometric median by Weiszfeld fixed-point iteration.

    Parameters
    ----------
    points : (n, d) array-like, nonempty
    tol : stopping threshold; iteration stops once the displacement
        satisfies ||m_new - m|| <= tol * (1 + ||m||)
    max_iter : iteration cap
    start : optional initial iterate; defaults to the coordinate-wise
        median (perturbed slightly if it coincides with a data point)
    """
    x = as_points(points)
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if start is None:
        m = _default_start(x, tol)
    else:
        m = np.asarray(start, dtype=float).ravel()
        if m.shape[0] != x.shape[1]:
            raise ValueError("start dimension does not match data dimension")

    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        m_new = _weiszfeld_step(x, m)
        if np.linalg.norm(m_new - m) <= tol * (1.0 + np.linalg.norm(m)):
            m = m_new
            converged = True
            break
        m = m_new
    return MedianEstimate(point=m, iterations=it, converged=converged, objective=l1_objective(x, m))


def _asg_stream(x, order, m, m_bar, count, c_gamma, alpha):
    """Run averaged Robbins-Monro updates over one pass of indices.

    `count` plays the role of the per-center counter in the online
    clustering algorithm: the update uses step c_gamma / (count + 1)**alpha
    and folds the fresh iterate into the running average with weight
    1 / (count + 1). Zero-distance points contribute no gradient step but
    still advance the average and the counter.
    """
    for idx in order:
        diff = x[idx] - m
        nrm = np.sqrt(diff @ diff)
        if nrm > 0.0:
            m = m + (c_gamma / (count + 1) ** alpha / nrm) * diff
        m_bar = m_bar + (m - m_bar) / (count + 1)
        count += 1
    return m, m_bar, count


def asg_median(points, cfg: AsgConfig | None = None, seed: int = 0, start=None,
               reshuffle: bool = True) -> MedianEstimate:
    """Geometric median by averaged stochastic gradient.

    Streams through the data in a seed-determined shuffled order for
    cfg.passes passes and returns the running average of the iterates.
    With `reshuffle` the order is redrawn at every pass; otherwise the
    first pass order is reused.
    """
    x = as_points(points)
    if cfg is None:
        cfg = AsgConfig()
    if start is None:
        m = _default_start(x)
    else:
        m = np.asarray(start, dtype=float).ravel()
        if m.shape[0] != x.shape[1]:
            raise ValueError("start dimension does not match data dimension")

    # The order stream must stay aligned with the online clustering
    # algorithm at k=1: first permutation drawn directly from the seed.
    rng = np.random.default_rng(seed)
    order = rng.permutation(x.shape[0])
    m_bar = m.copy()
    count = 1
    for p in range(cfg.passes):
        if p > 0 and reshuffle:
            order = rng.permutation(x.shape[0])
        m, m_bar, count = _asg_stream(x, order, m, m_bar, count, cfg.c_gamma, cfg.alpha)
    return MedianEstimate(point=m_bar, iterations=count - 1, converged=True,
                          objective=l1_objective(x, m_bar))
