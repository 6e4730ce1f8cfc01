"""Spectral Stein gradient estimator.

The score ``g = grad log q`` is expanded in the Nyström eigenfunctions,
``g_i(x) ~ sum_j beta_ij psi_j(x)``. Stein's identity against each
eigenfunction gives ``beta_ij = -E_q[d psi_j / d x_i]``, estimated by the
sample mean over the training points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernel import as_samples
from .spectral import SpectralBasis, build_basis, nystrom_eval, nystrom_eval_and_grad, nystrom_grad


@dataclass(frozen=True)
class ScoreEstimator:
    """A fitted basis plus the ``(J, d)`` coefficient matrix.

    Row ``j`` of ``beta`` holds the coefficients of eigenfunction ``j`` for
    every coordinate.
    """

    basis: SpectralBasis
    beta: np.ndarray

    def __call__(self, points) -> np.ndarray:
        return score(self, points)

    @property
    def dim(self) -> int:
        return self.beta.shape[1]


def coefficients(basis: SpectralBasis) -> np.ndarray:
    """Stein coefficients ``beta = -mean_m grad psi(x^m)``, shape ``(J, d)``."""
    return -nystrom_grad(basis, basis.samples).mean(axis=0)


def fit(samples, sigma=None, j=None, r_bar=None) -> ScoreEstimator:
    """Fit SSGE on ``samples``; arguments as for :func:`build_basis`."""
    basis = build_basis(as_samples(samples), sigma=sigma, j=j, r_bar=r_bar)
    return ScoreEstimator(basis=basis, beta=coefficients(basis))


def score(estimator: ScoreEstimator, points) -> np.ndarray:
    """Estimated score at each row of ``points``; returns ``(N, d)``."""
    return nystrom_eval(estimator.basis, points) @ estimator.beta


def stein_residual(estimator: ScoreEstimator, oracle_score, eval_samples) -> np.ndarray:
    """Monte Carlo Stein residual ``E[psi_j g_i + d psi_j / d x_i]``.

    Args:
        estimator: fitted estimator whose eigenfunctions serve as test
            functions.
        oracle_score: callable mapping ``(P, d)`` points to ``(P, d)`` scores.
        eval_samples: ``(P, d)`` draws from the same distribution as the
            training samples.

    Returns:
        ``(J, d)`` residual matrix; near zero when the oracle is correct.
    """
    z = as_samples(eval_samples)
    psi, dpsi = nystrom_eval_and_grad(estimator.basis, z)
    g = np.asarray(oracle_score(z), dtype=np.float64).reshape(z.shape)
    return (psi.T @ g) / z.shape[0] + dpsi.mean(axis=0)


def weighted_mse(est_scores, true_scores, weights) -> float:
    """Quadrature approximation of ``int |g_hat - g|^2 q dx``.

    ``weights`` are the (unnormalised) density values at the grid points; they
    are normalised to sum to one.
    """
    err = np.sum((np.asarray(est_scores) - np.asarray(true_scores)) ** 2, axis=-1)
    w = np.asarray(weights, dtype=np.float64)
    return float(np.sum(w * err) / np.sum(w))
