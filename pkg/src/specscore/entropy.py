"""Entropy gradients of reparameterisable implicit distributions.

For ``x = f(eps; phi)`` with ``eps ~ N(0, I)``,

    grad_phi H(q_phi) = -E_eps[ grad_phi f(eps; phi) . grad_x log q_phi(x) ]

The parameter-score term vanishes in expectation, so only the sample score
is needed, and that comes from SSGE fitted on the reparameterised draws.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import ssge


@dataclass(frozen=True)
class ReparamFamily:
    """A sampler ``x = transform(eps, phi)`` with closed-form Jacobian.

    Attributes:
        transform: maps ``(n, noise_dim)`` noise and a parameter vector to
            ``(n, d)`` samples.
        jacobian: maps the same inputs to ``(n, P, d)`` with entry
            ``[m, p, i] = d x^m_i / d phi_p``.
        noise_dim: dimension of ``eps``.
    """

    transform: Callable[[np.ndarray, np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray, np.ndarray], np.ndarray]
    noise_dim: int


def location_scale(dim: int = 1) -> ReparamFamily:
    """``x = mu + s * eps`` with ``phi = (mu_1..mu_d, s_1..s_d)``."""

    def transform(eps, phi):
        phi = np.asarray(phi, dtype=np.float64)
        return phi[:dim] + phi[dim:] * eps

    def jacobian(eps, phi):
        n = eps.shape[0]
        jac = np.zeros((n, 2 * dim, dim))
        idx = np.arange(dim)
        jac[:, idx, idx] = 1.0
        jac[:, dim + idx, idx] = eps
        return jac

    return ReparamFamily(transform, jacobian, dim)


def location(dim: int = 1) -> ReparamFamily:
    """``x = mu + eps`` with ``phi = mu``."""

    def transform(eps, phi):
        return np.asarray(phi, dtype=np.float64) + eps

    def jacobian(eps, phi):
        return np.broadcast_to(np.eye(dim), (eps.shape[0], dim, dim)).copy()

    return ReparamFamily(transform, jacobian, dim)


def entropy_grad(
    family: ReparamFamily,
    phi,
    n_noise: int,
    seed: int,
    sigma=None,
    j=None,
    r_bar=None,
    fresh_samples: bool = False,
) -> np.ndarray:
    """Monte Carlo estimate of ``grad_phi H`` using an SSGE score.

    The same noise draws fit the estimator and form the average unless
    ``fresh_samples`` is set, in which case the estimator is fitted on an
    independent draw of the same size.
    """
    if n_noise < 2:
        raise ValueError("entropy_grad needs n_noise >= 2")
    if j is None and r_bar is None:
        r_bar = 0.95
    phi = np.asarray(phi, dtype=np.float64)
    rng = np.random.default_rng(seed)
    eps = rng.standard_normal((n_noise, family.noise_dim))
    x = family.transform(eps, phi)
    if fresh_samples:
        fit_x = family.transform(rng.standard_normal((n_noise, family.noise_dim)), phi)
    else:
        fit_x = x
    estimator = ssge.fit(fit_x, sigma=sigma, j=j, r_bar=r_bar)
    g = estimator(x)
    return -np.einsum("npd,nd->p", family.jacobian(eps, phi), g) / n_noise


def analytic_location_scale_grad(phi) -> np.ndarray:
    """Exact entropy gradient of the diagonal location-scale Gaussian."""
    phi = np.asarray(phi, dtype=np.float64)
    d = phi.shape[0] // 2
    return np.concatenate([np.zeros(d), 1.0 / phi[d:]])
