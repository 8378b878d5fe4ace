"""Robust hierarchical initializer.

Single-linkage agglomeration over the Euclidean minimum spanning tree,
modified by an economic-inequality rule: whenever the Gini index of the
current cluster sizes exceeds a threshold, the merge is forced to involve
a cluster of minimal size (cheapest such MST edge). This keeps outliers
from surviving as long-lived singletons and yields initial centers that
are stable under heavy-tailed contamination.
"""

from __future__ import annotations

import numpy as np


def _prim_mst(x: np.ndarray):
    """Minimum spanning tree of the complete Euclidean graph.

    O(n^2) time, O(n) memory; returns (u, v, w) edge arrays.
    """
    n = x.shape[0]
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best_dist = np.linalg.norm(x - x[0], axis=1)
    best_dist[0] = np.inf
    best_from = np.zeros(n, dtype=np.intp)
    eu = np.empty(n - 1, dtype=np.intp)
    ev = np.empty(n - 1, dtype=np.intp)
    ew = np.empty(n - 1, dtype=float)
    for t in range(n - 1):
        j = int(np.argmin(best_dist))
        eu[t], ev[t], ew[t] = best_from[j], j, best_dist[j]
        in_tree[j] = True
        best_dist[j] = np.inf
        d = np.linalg.norm(x - x[j], axis=1)
        upd = ~in_tree & (d < best_dist)
        best_dist[upd] = d[upd]
        best_from[upd] = j
    return eu, ev, ew


def _gini(sizes: np.ndarray) -> float:
    """Gini index of a positive size vector (0 for equal sizes)."""
    c = sizes.shape[0]
    if c <= 1:
        return 0.0
    s = np.sort(sizes)
    i = np.arange(1, c + 1)
    return float(((2 * i - c - 1) * s).sum() / ((c - 1) * s.sum()))


class GenieHierarchy:
    """Full merge sequence of the Gini-constrained single linkage.

    Built once per dataset; partitions for every k are read off the
    recorded merge order, so one hierarchy serves a whole sweep over k.
    """

    def __init__(self, points: np.ndarray, gini_threshold: float = 0.3):
        if not 0.0 < gini_threshold <= 1.0:
            raise ValueError(f"gini_threshold must be in (0, 1], got {gini_threshold}")
        x = np.asarray(points, dtype=float)
        self.n = x.shape[0]
        self.gini_threshold = gini_threshold
        self.merges = self._merge_order(x) if self.n > 1 else []

    def _merge_order(self, x: np.ndarray):
        n = self.n
        eu, ev, ew = _prim_mst(x)
        order = np.argsort(ew, kind="stable")
        eu, ev = eu[order], ev[order]

        label = np.arange(n)          # cluster id per point
        size = np.ones(n, dtype=np.intp)
        active = np.ones(n, dtype=bool)
        alive = np.ones(n - 1, dtype=bool)
        members: list[list[int]] = [[i] for i in range(n)]
        merges: list[tuple[int, int]] = []

        for _ in range(n - 1):
            cu = label[eu]
            cv = label[ev]
            alive &= cu != cv
            if _gini(size[active]) > self.gini_threshold:
                s_min = size[active].min()
                cand = alive & ((size[cu] == s_min) | (size[cv] == s_min))
            else:
                cand = alive
            e = int(np.argmax(cand))  # edges are weight-sorted: first hit is cheapest
            a, b = int(label[eu[e]]), int(label[ev[e]])
            alive[e] = False
            merges.append((int(eu[e]), int(ev[e])))
            if len(members[a]) < len(members[b]):
                a, b = b, a
            for p in members[b]:
                label[p] = a
            members[a].extend(members[b])
            members[b] = []
            size[a] += size[b]
            active[b] = False
        return merges

    def labels_at(self, k: int) -> np.ndarray:
        """Partition into k clusters, labeled 0..k-1 in first-occurrence order."""
        if not 1 <= k <= self.n:
            raise ValueError(f"k must be in [1, {self.n}], got {k}")
        parent = np.arange(self.n)

        def find(i: int) -> int:
            root = i
            while parent[root] != root:
                root = parent[root]
            while parent[i] != root:
                parent[i], i = root, parent[i]
            return root

        for u, v in self.merges[: self.n - k]:
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[rv] = ru
        roots = np.fromiter((find(i) for i in range(self.n)), dtype=np.intp, count=self.n)
        _, labels = np.unique(roots, return_inverse=True)
        # relabel in first-occurrence order for determinism
        first = np.full(labels.max() + 1, -1, dtype=np.intp)
        nxt = 0
        out = np.empty(self.n, dtype=np.intp)
        for i, lab in enumerate(labels):
            if first[lab] < 0:
                first[lab] = nxt
                nxt += 1
            out[i] = first[lab]
        return out

    def centers_at(self, points: np.ndarray, k: int) -> np.ndarray:
        """Coordinate-wise median of each cluster of the k-partition."""
        labels = self.labels_at(k)
        x = np.asarray(points, dtype=float)
        return np.stack([np.median(x[labels == j], axis=0) for j in range(k)])
