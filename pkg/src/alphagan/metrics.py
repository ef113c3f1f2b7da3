"""Distribution-fitting metrics for one-dimensional samples."""

from __future__ import annotations

import numpy as np

HISTOGRAM_HEADER = ("bin_left", "bin_right", "real_count", "generated_count")


def _sorted_sample(x, name) -> np.ndarray:
    x = np.sort(np.asarray(x, dtype=float).ravel())
    if x.size == 0:
        raise ValueError(f"{name} is empty")
    return x


def wasserstein1_1d(a, b) -> float:
    """Wasserstein-1 distance between two empirical distributions on the line.

    For equal sizes this is the mean absolute difference of order
    statistics. Otherwise the two quantile functions are integrated exactly
    over the union of their breakpoints.
    """
    a = _sorted_sample(a, "a")
    b = _sorted_sample(b, "b")
    n, m = a.size, b.size
    if n == m:
        return float(np.mean(np.abs(a - b)))
    right = np.union1d(np.arange(1, n + 1) / n, np.arange(1, m + 1) / m)
    left = np.concatenate([[0.0], right[:-1]])
    mid = 0.5 * (left + right)
    qa = a[np.minimum((mid * n).astype(np.int64), n - 1)]
    qb = b[np.minimum((mid * m).astype(np.int64), m - 1)]
    return float(np.sum((right - left) * np.abs(qa - qb)))


def ks_statistic(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic sup_x |F_a(x) - F_b(x)|."""
    a = _sorted_sample(a, "a")
    b = _sorted_sample(b, "b")
    # both ECDFs are right-continuous steps, so the sup is attained at a sample point
    pts = np.concatenate([a, b])
    fa = np.searchsorted(a, pts, side="right") / a.size
    fb = np.searchsorted(b, pts, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def discriminator_flatness(d_values) -> float:
    """Mean |D(x) - 0.5|; zero when the discriminator cannot tell sources apart."""
    return float(np.mean(np.abs(np.asarray(d_values, dtype=float) - 0.5)))


def histogram_rows(real, generated, bins: int = 30) -> list[tuple]:
    """Counts of both samples over ``bins`` equal bins spanning the pooled range."""
    real = np.asarray(real, dtype=float).ravel()
    generated = np.asarray(generated, dtype=float).ravel()
    edges = np.histogram_bin_edges(np.concatenate([real, generated]), bins=bins)
    rc, _ = np.histogram(real, edges)
    gc, _ = np.histogram(generated, edges)
    return [(edges[i], edges[i + 1], int(rc[i]), int(gc[i])) for i in range(bins)]
