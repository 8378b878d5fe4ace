"""Adjusted Rand index, centroid recovery error, trial aggregation."""

import numpy as np
import pytest

from kmedians import adjusted_rand_index, centroid_l1_error, summarize_trials


def brute_force_ari(a, b):
    """Pair-counting oracle: classify every pair as together/apart in each."""
    a, b = np.asarray(a), np.asarray(b)
    n = len(a)
    n11 = n10 = n01 = n00 = 0
    for i in range(n):
        for j in range(i + 1, n):
            sa, sb = a[i] == a[j], b[i] == b[j]
            n11 += sa and sb
            n10 += sa and not sb
            n01 += sb and not sa
            n00 += not sa and not sb
    total = n * (n - 1) // 2
    sum_a, sum_b = n11 + n10, n11 + n01
    num = 2 * total * n11 - 2 * sum_a * sum_b
    denom = total * (sum_a + sum_b) - 2 * sum_a * sum_b
    if denom == 0:
        return 1.0
    return num / denom


def test_ari_identical_up_to_relabeling():
    assert adjusted_rand_index([0, 0, 1, 1], [1, 1, 0, 0]) == 1.0
    assert adjusted_rand_index([0, 0, 1, 1], [0, 0, 1, 1]) == 1.0


def test_ari_crossing_example():
    assert adjusted_rand_index([0, 0, 1, 1], [0, 1, 0, 1]) == -0.5
    assert brute_force_ari([0, 0, 1, 1], [0, 1, 0, 1]) == -0.5


def test_ari_matches_bruteforce_random():
    rng = np.random.default_rng(0)
    for _ in range(30):
        n = int(rng.integers(4, 25))
        a = rng.integers(0, 4, size=n)
        b = rng.integers(0, 3, size=n)
        assert abs(adjusted_rand_index(a, b) - brute_force_ari(a, b)) <= 1e-12


def test_ari_random_labels_near_zero():
    rng = np.random.default_rng(1)
    a = rng.integers(0, 5, size=10_000)
    b = rng.integers(0, 5, size=10_000)
    assert abs(adjusted_rand_index(a, b)) <= 0.02


def test_ari_symmetry_and_relabeling_invariance():
    rng = np.random.default_rng(2)
    for _ in range(100):
        n = int(rng.integers(4, 30))
        a = rng.integers(0, 4, size=n)
        b = rng.integers(0, 4, size=n)
        assert adjusted_rand_index(a, b) == adjusted_rand_index(b, a)
        relabel = rng.permutation(4)
        assert adjusted_rand_index(relabel[a], b) == adjusted_rand_index(a, b)
        if len(np.unique(a)) >= 2:
            assert adjusted_rand_index(a, a) == 1.0


def test_ari_degenerate_partitions():
    assert adjusted_rand_index([0, 1, 2], [5, 6, 7]) == 1.0      # both all-singletons
    assert adjusted_rand_index([0, 0, 0], [1, 1, 1]) == 1.0      # both single block
    assert adjusted_rand_index([0, 1, 2], [0, 0, 0]) == 0.0      # mixed trivial


def test_ari_errors():
    with pytest.raises(ValueError):
        adjusted_rand_index([0, 1], [0, 1, 2])
    with pytest.raises(ValueError):
        adjusted_rand_index([0], [0])


def test_centroid_error_values():
    c = np.array([[0.0, 0.0], [10.0, 0.0]])
    assert centroid_l1_error(c, c) == 0.0
    assert centroid_l1_error(c, c[::-1]) == 0.0
    assert centroid_l1_error([[0.0, 0.0]], [[3.0, 4.0]]) == 5.0
    est = np.array([[1.0, 0.0], [9.0, 0.0], [10.0, 1.0]])
    assert centroid_l1_error(c, est) == 3.0


def test_centroid_error_invariances():
    rng = np.random.default_rng(3)
    true_c = rng.normal(size=(4, 3))
    est_c = rng.normal(size=(6, 3))
    base = centroid_l1_error(true_c, est_c)
    perm_t, perm_e = rng.permutation(4), rng.permutation(6)
    assert centroid_l1_error(true_c[perm_t], est_c[perm_e]) == base
    v = rng.normal(size=3)
    assert abs(centroid_l1_error(true_c + v, est_c + v) - base) <= 1e-9


def test_centroid_error_dimension_mismatch():
    with pytest.raises(ValueError):
        centroid_l1_error(np.zeros((2, 3)), np.zeros((2, 2)))


def test_summarize_single_trial():
    s = summarize_trials([(4, 1.0, 0.0)], k_true=4)
    assert s.trials == 1 and s.n_correct == 1 and s.k_bar == 4.0
    assert s.ari_mean == 1.0 and s.l1_error_median == 0.0


def test_summarize_small_table():
    s = summarize_trials([(4, 0.9, 1.0), (4, 0.8, 2.0), (5, 0.7, 3.0)], k_true=4)
    assert s.n_correct == 2
    assert abs(s.k_bar - 13 / 3) <= 1e-12
    assert abs(s.ari_mean - 0.8) <= 1e-12
    assert s.l1_error_median == 2.0


def test_summarize_against_independent_aggregation():
    rng = np.random.default_rng(4)
    rows = [(int(rng.integers(2, 8)), float(rng.uniform(-1, 1)), float(rng.uniform(0, 9)))
            for _ in range(50)]
    s = summarize_trials(rows, k_true=5)
    # plain-python recomputation
    ks = [r[0] for r in rows]
    aris = sorted(r[1] for r in rows)
    errs = sorted(r[2] for r in rows)
    assert s.n_correct == sum(1 for k in ks if k == 5)
    assert abs(s.k_bar - sum(ks) / 50) <= 1e-12
    assert abs(s.ari_mean - sum(aris) / 50) <= 1e-12
    assert abs(s.l1_error_median - (errs[24] + errs[25]) / 2) <= 1e-12
    assert -1.0 <= s.ari_mean <= 1.0


def test_summarize_empty_rejected():
    with pytest.raises(ValueError):
        summarize_trials([], k_true=3)
