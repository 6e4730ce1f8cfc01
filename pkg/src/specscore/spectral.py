"""Nyström eigenfunctions of the RBF kernel operator.

A :class:`SpectralBasis` holds the eigendecomposition of the Gram matrix on
the training samples. Eigenfunctions are extended to arbitrary points by

    psi_j(x) = sqrt(M) / lambda_j * sum_m u_jm k(x, x^m)

which reproduces ``sqrt(M) * u_jm`` exactly at the training samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AllZeroSpectrum, EigensolverFailure, InvalidRank
from .kernel import as_samples, cross_kernel, cross_kernel_and_grads, gram_matrix, median_bandwidth

# Eigenvalues below this fraction of the largest one carry no mass.
EIGEN_FLOOR = 1e-6


@dataclass(frozen=True)
class EigenSystem:
    eigvals: np.ndarray  # (M,), descending
    eigvecs: np.ndarray  # (M, M), column j pairs with eigvals[j]


def fix_signs(vecs: np.ndarray) -> np.ndarray:
    """Flip columns so each column's largest-magnitude entry is positive.

    Ties in magnitude go to the lowest row index.
    """
    vecs = np.array(vecs, dtype=np.float64, copy=True)
    if vecs.size == 0:
        return vecs
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def eigendecompose(gram) -> EigenSystem:
    """Full symmetric eigendecomposition, eigenvalues in descending order."""
    gram = np.asarray(gram, dtype=np.float64)
    if not np.all(np.isfinite(gram)):
        raise EigensolverFailure("Gram matrix contains non-finite entries")
    try:
        vals, vecs = np.linalg.eigh(gram)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(str(exc)) from exc
    # eigh returns ascending order; a stable reversal keeps index tie-breaking
    order = np.argsort(-vals, kind="stable")
    return EigenSystem(eigvals=vals[order], eigvecs=fix_signs(vecs[:, order]))


def n_retained(eigvals) -> int:
    """Number of leading eigenvalues above the relative floor."""
    eigvals = np.asarray(eigvals, dtype=np.float64)
    if eigvals.size == 0 or not eigvals[0] > 0:
        raise AllZeroSpectrum("largest eigenvalue is not positive")
    return int(np.count_nonzero(eigvals >= EIGEN_FLOOR * eigvals[0]))


def select_rank(eigvals, r_bar: float) -> int:
    """Largest J whose cumulative eigenvalue fraction does not exceed ``r_bar``.

    Eigenvalues under ``EIGEN_FLOOR * lambda_1`` count as zero mass. The
    result is clamped to at least 1.
    """
    if not 0.0 < r_bar <= 1.0:
        raise ValueError(f"r_bar must lie in (0, 1], got {r_bar}")
    eigvals = np.asarray(eigvals, dtype=np.float64)
    n_pos = n_retained(eigvals)
    kept = eigvals[:n_pos]
    ratios = np.cumsum(kept) / np.sum(kept)
    j = int(np.count_nonzero(ratios <= r_bar))
    return min(max(j, 1), n_pos)


@dataclass(frozen=True)
class SpectralBasis:
    """Fitted Nyström basis.

    Attributes:
        samples: ``(M, d)`` training samples.
        sigma: kernel bandwidth.
        eigvals: the ``J`` retained Gram eigenvalues, descending.
        eigvecs: ``(M, J)`` matching eigenvectors.
        spectrum: the full Gram spectrum, kept for diagnostics.
    """

    samples: np.ndarray
    sigma: float
    eigvals: np.ndarray
    eigvecs: np.ndarray
    spectrum: np.ndarray

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def j_rank(self) -> int:
        return self.eigvals.shape[0]

    @property
    def mu(self) -> np.ndarray:
        """Operator eigenvalue estimates ``lambda_j / M``."""
        return self.eigvals / self.n_samples

    def eigengap(self) -> float:
        """``min_{j <= J} |mu_j - mu_{j+1}|`` over the full spectrum."""
        mu_all = self.spectrum / self.n_samples
        if mu_all.shape[0] > self.j_rank:
            nxt = mu_all[1 : self.j_rank + 1]
        else:
            nxt = np.append(mu_all[1:], 0.0)
        return float(np.min(np.abs(mu_all[: self.j_rank] - nxt)))

    def with_flipped(self, columns) -> SpectralBasis:
        """Copy with the given eigenvector columns negated."""
        vecs = self.eigvecs.copy()
        vecs[:, list(columns)] *= -1.0
        return SpectralBasis(self.samples, self.sigma, self.eigvals, vecs, self.spectrum)


def build_basis(samples, sigma=None, j=None, r_bar=None) -> SpectralBasis:
    """Fit a Nyström basis on ``samples``.

    Args:
        samples: ``(M, d)`` sample matrix; ``M >= 2`` unless ``sigma`` is given.
        sigma: bandwidth; ``None`` or ``"auto"`` selects the median heuristic.
        j: fixed number of eigenfunctions. Clamped to the count of eigenvalues
            above the floor.
        r_bar: eigenvalue-mass threshold used when ``j`` is not given.

    Exactly one of ``j`` and ``r_bar`` must be given.
    """
    x = as_samples(samples)
    m = x.shape[0]
    if (j is None) == (r_bar is None):
        raise ValueError("give exactly one of j and r_bar")
    if sigma is None or sigma == "auto":
        sigma = median_bandwidth(x)
    sigma = float(sigma)
    if not sigma > 0:
        raise ValueError(f"bandwidth must be positive, got {sigma}")
    if j is not None and not 1 <= j <= m:
        raise InvalidRank(f"rank J={j} outside [1, {m}]")

    eig = eigendecompose(gram_matrix(x, sigma))
    n_pos = n_retained(eig.eigvals)
    rank = min(int(j), n_pos) if j is not None else select_rank(eig.eigvals, r_bar)
    return SpectralBasis(
        samples=x,
        sigma=sigma,
        eigvals=eig.eigvals[:rank].copy(),
        eigvecs=eig.eigvecs[:, :rank].copy(),
        spectrum=eig.eigvals,
    )


def nystrom_eval(basis: SpectralBasis, points) -> np.ndarray:
    """``(N, J)`` matrix of eigenfunction values at ``points``."""
    kmat = cross_kernel(points, basis.samples, basis.sigma)
    scale = np.sqrt(basis.n_samples) / basis.eigvals
    return (kmat @ basis.eigvecs) * scale


def nystrom_grad(basis: SpectralBasis, points) -> np.ndarray:
    """``(N, J, d)`` gradients of the eigenfunctions at ``points``."""
    _, grads = cross_kernel_and_grads(points, basis.samples, basis.sigma)
    scale = np.sqrt(basis.n_samples) / basis.eigvals
    return np.einsum("nmd,mj->njd", grads, basis.eigvecs) * scale[None, :, None]


def nystrom_eval_and_grad(basis: SpectralBasis, points):
    """Values and gradients in one kernel pass."""
    kmat, grads = cross_kernel_and_grads(points, basis.samples, basis.sigma)
    scale = np.sqrt(basis.n_samples) / basis.eigvals
    vals = (kmat @ basis.eigvecs) * scale
    jac = np.einsum("nmd,mj->njd", grads, basis.eigvecs) * scale[None, :, None]
    return vals, jac


def kpca_embed(basis: SpectralBasis, points) -> np.ndarray:
    """Kernel-PCA projections ``xi_j(x) = sqrt(lambda_j / M) psi_j(x)``."""
    return nystrom_eval(basis, points) * np.sqrt(basis.mu)


def kpca_coefficients(basis: SpectralBasis) -> np.ndarray:
    """``(M, J)`` dual coefficients ``alpha_j = u_j / sqrt(lambda_j)``."""
    return basis.eigvecs / np.sqrt(basis.eigvals)


def kpca_embed_dual(basis: SpectralBasis, points) -> np.ndarray:
    """Kernel-PCA projections computed as ``alpha_j . k_x``."""
    return cross_kernel(points, basis.samples, basis.sigma) @ kpca_coefficients(basis)
