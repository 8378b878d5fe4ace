"""Shared validation and small numeric helpers."""

from __future__ import annotations

import numpy as np


def as_points(points) -> np.ndarray:
    """Coerce input to a float (n, d) array and validate it."""
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValueError(f"points must be a 2-D array, got ndim={x.ndim}")
    if x.shape[0] == 0:
        raise ValueError("points must be nonempty")
    if not np.all(np.isfinite(x)):
        raise ValueError("points contain non-finite coordinates")
    return x


def as_codebook(centers, d: int | None = None) -> np.ndarray:
    """Coerce input to a float (k, d) center array and validate it."""
    c = np.asarray(centers, dtype=float)
    if c.ndim == 1:
        c = c[None, :] if d is None or d > 1 else c[:, None]
    if c.ndim != 2 or c.size == 0:
        raise ValueError("codebook must be a nonempty (k, d) array")
    if not np.all(np.isfinite(c)):
        raise ValueError("codebook contains non-finite coordinates")
    if d is not None and c.shape[1] != d:
        raise ValueError(f"codebook dimension {c.shape[1]} does not match data dimension {d}")
    return c


def pairwise_distances(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Euclidean distances between rows of x (n, d) and rows of c (k, d).

    Computed from explicit differences so that coincident rows give an
    exact 0.0 (the dot-product shortcut does not).
    """
    return np.linalg.norm(x[:, None, :] - c[None, :, :], axis=2)


def coordinate_median(x: np.ndarray) -> np.ndarray:
    """Per-coordinate median of the rows of x."""
    return np.median(x, axis=0)


def spawn_rng(*keys: int) -> np.random.Generator:
    """Deterministic generator derived from an integer key path.

    Every independent stream in the package (restart, trial, reference
    set, ...) is keyed as (master_seed, stream_tag, index...) so results
    do not depend on evaluation order.
    """
    return np.random.default_rng([int(k) for k in keys])
