"""RBF kernel, its gradients and the median-heuristic bandwidth."""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import pdist

from .errors import DegenerateSamples


def as_samples(samples) -> np.ndarray:
    """Coerce input to a float64 ``(M, d)`` array; 1-D input is one column."""
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValueError(f"expected a 2-D sample matrix, got shape {x.shape}")
    return x


def median_bandwidth(samples) -> float:
    """Median of the pairwise Euclidean distances between samples.

    For an even number of pairs the two middle order statistics are averaged.

    Raises:
        DegenerateSamples: if fewer than two samples are given or the median
            distance is zero.
    """
    x = as_samples(samples)
    if x.shape[0] < 2:
        raise DegenerateSamples("median heuristic needs at least 2 samples")
    sigma = float(np.median(pdist(x, metric="euclidean")))
    if not sigma > 0.0:
        raise DegenerateSamples(
            "median pairwise distance is 0; more than half of the sample pairs "
            "are duplicates"
        )
    return sigma


def rbf_eval(x, y, sigma: float) -> float:
    r"""``k(x, y) = exp(-||x - y||^2 / (2 sigma^2))``."""
    diff = np.atleast_1d(np.asarray(x, dtype=np.float64)) - np.atleast_1d(
        np.asarray(y, dtype=np.float64)
    )
    return float(np.exp(-np.dot(diff, diff) / (2.0 * sigma**2)))


def rbf_grad_first(x, y, sigma: float) -> np.ndarray:
    """Gradient of :func:`rbf_eval` with respect to ``x``.

    The gradient with respect to ``y`` is the negation of this.
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    return -(x - y) / sigma**2 * rbf_eval(x, y, sigma)


def cross_kernel_and_grads(points, samples, sigma: float):
    """Kernel values and first-argument gradients between two point sets.

    Args:
        points: ``(N, d)`` evaluation points.
        samples: ``(M, d)`` kernel centres.
        sigma: bandwidth.

    Returns:
        ``(K, G)`` with ``K[n, m] = k(points[n], samples[m])`` and
        ``G[n, m, :] = grad_x k(points[n], samples[m])``.
    """
    p = as_samples(points)
    s = as_samples(samples)
    diff = p[:, None, :] - s[None, :, :]
    kmat = np.exp(-np.sum(diff * diff, axis=-1) / (2.0 * sigma**2))
    grads = -diff / sigma**2 * kmat[:, :, None]
    return kmat, grads


def cross_kernel(points, samples, sigma: float) -> np.ndarray:
    """Kernel values only; see :func:`cross_kernel_and_grads`."""
    p = as_samples(points)
    s = as_samples(samples)
    diff = p[:, None, :] - s[None, :, :]
    return np.exp(-np.sum(diff * diff, axis=-1) / (2.0 * sigma**2))


def gram_matrix(samples, sigma: float) -> np.ndarray:
    """Symmetric ``(M, M)`` Gram matrix of the RBF kernel.

    Only the upper triangle is computed; the lower triangle is its mirror so
    the result is exactly symmetric, with a unit diagonal.
    """
    x = as_samples(samples)
    m = x.shape[0]
    iu = np.triu_indices(m, k=1)
    diff = x[iu[0]] - x[iu[1]]
    vals = np.exp(-np.sum(diff * diff, axis=-1) / (2.0 * sigma**2))
    gram = np.eye(m)
    gram[iu] = vals
    gram[(iu[1], iu[0])] = vals
    return gram
