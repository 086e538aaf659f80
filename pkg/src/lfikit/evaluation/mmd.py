"""Kernel two-sample distance between posterior sample sets."""

from __future__ import annotations

import numpy as np

from ..errors import BandwidthError, ConfigurationError


def _pairwise_sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aa = np.sum(a * a, axis=1)[:, None]
    bb = np.sum(b * b, axis=1)[None, :]
    return np.maximum(aa + bb - 2.0 * (a @ b.T), 0.0)


def median_heuristic_bandwidth(points: np.ndarray, max_points: int = 1000) -> float:
    """Median pairwise Euclidean distance (deterministically subsampled)."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.shape[0] < 2:
        raise ConfigurationError("bandwidth needs at least 2 points")
    if points.shape[0] > max_points:
        idx = np.linspace(0, points.shape[0] - 1, max_points).astype(int)
        points = points[idx]
    d2 = _pairwise_sq_dists(points, points)
    upper = d2[np.triu_indices(points.shape[0], k=1)]
    bw = float(np.median(np.sqrt(upper)))
    if bw == 0.0:
        raise BandwidthError("all points identical; no usable bandwidth")
    return bw


def _kernel_mean(a: np.ndarray, b: np.ndarray, gamma: float,
                 block: int = 2000) -> float:
    total = 0.0
    for lo in range(0, a.shape[0], block):
        chunk = a[lo:lo + block]
        total += float(np.exp(-gamma * _pairwise_sq_dists(chunk, b)).sum())
    return total / (a.shape[0] * b.shape[0])


def mmd(a: np.ndarray, b: np.ndarray, bandwidth: float | None = None) -> float:
    """Square root of the biased (V-statistic) squared maximum mean
    discrepancy with a Gaussian kernel exp(-d^2 / (2 bw^2)).

    The V-statistic makes mmd(a, a) exactly zero. Bandwidth defaults to the
    median heuristic on the pooled points.
    """
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if a.shape[1] != b.shape[1]:
        raise ConfigurationError("sample sets must share dimensionality")
    if a.shape[0] < 2 or b.shape[0] < 2:
        raise ConfigurationError("need at least 2 samples per set")
    if bandwidth is None:
        bandwidth = median_heuristic_bandwidth(np.concatenate([a, b]))
    if bandwidth <= 0:
        raise BandwidthError("bandwidth must be positive")
    gamma = 1.0 / (2.0 * bandwidth * bandwidth)
    sq = (_kernel_mean(a, a, gamma) + _kernel_mean(b, b, gamma)
          - 2.0 * _kernel_mean(a, b, gamma))
    return float(np.sqrt(max(sq, 0.0)))
