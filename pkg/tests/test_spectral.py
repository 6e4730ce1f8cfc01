import math

import numpy as np
import pytest

from specscore import AllZeroSpectrum, InvalidRank
from specscore.kernel import gram_matrix, median_bandwidth
from specscore.spectral import (
    build_basis,
    eigendecompose,
    kpca_embed,
    kpca_embed_dual,
    nystrom_eval,
    nystrom_grad,
    select_rank,
)

from reference import central_diff, naive_psi, power_eigs


def test_eigendecompose_identity():
    eig = eigendecompose(np.eye(3))
    np.testing.assert_allclose(eig.eigvals, 1.0)
    np.testing.assert_allclose(eig.eigvecs.T @ eig.eigvecs, np.eye(3), atol=1e-12)
    for col in eig.eigvecs.T:
        assert col[np.argmax(np.abs(col))] > 0


def test_eigendecompose_rank_one():
    eig = eigendecompose(np.ones((2, 2)))
    np.testing.assert_allclose(eig.eigvals, [2.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(eig.eigvecs[:, 0], [1 / math.sqrt(2)] * 2, atol=1e-15)


def test_eigensystem_invariants():
    x = np.random.default_rng(0).standard_normal((40, 2))
    gram = gram_matrix(x, median_bandwidth(x))
    eig = eigendecompose(gram)
    assert np.all(np.diff(eig.eigvals) <= 0)
    u = eig.eigvecs
    assert np.abs(u.T @ u - np.eye(40)).max() <= 1e-8
    recon = u @ np.diag(eig.eigvals) @ u.T
    assert np.abs(gram - recon).max() <= 1e-7 * eig.eigvals[0]
    assert np.abs(gram @ u - u * eig.eigvals).max() <= 1e-7 * eig.eigvals[0]


def test_eigendecompose_matches_power_iteration():
    x = np.random.default_rng(1).standard_normal((20, 2))
    gram = gram_matrix(x, median_bandwidth(x))
    ref_vals, ref_vecs = power_eigs(gram, 4)
    eig = eigendecompose(gram)
    np.testing.assert_allclose(eig.eigvals[:4], ref_vals, atol=1e-6)
    for j in range(4):
        v = ref_vecs[:, j] * np.sign(ref_vecs[:, j] @ eig.eigvecs[:, j])
        np.testing.assert_allclose(eig.eigvecs[:, j], v, atol=1e-6)


@pytest.mark.parametrize(
    "eigvals, r_bar, expected",
    [([4, 3, 2, 1], 0.95, 3), ([10, 1], 0.5, 1), ([4, 3, 2, 1], 1.0, 4), ([4, 3, 2, 1], 0.7, 2)],
)
def test_select_rank_examples(eigvals, r_bar, expected):
    assert select_rank(np.array(eigvals, dtype=float), r_bar) == expected


def test_select_rank_matches_prefix_scan():
    x = np.random.default_rng(2).standard_normal((100, 1))
    vals = eigendecompose(gram_matrix(x, median_bandwidth(x))).eigvals
    kept = [v for v in vals if v >= 1e-6 * vals[0]]
    best = 1
    for jp in range(1, len(kept) + 1):
        if sum(kept[:jp]) / sum(kept) <= 0.99:
            best = jp
    assert select_rank(vals, 0.99) == best


def test_select_rank_errors():
    with pytest.raises(AllZeroSpectrum):
        select_rank(np.zeros(3), 0.9)
    with pytest.raises(ValueError):
        select_rank(np.ones(3), 0.0)


def test_build_basis_two_points():
    x = np.array([[0.0], [0.7]])
    basis = build_basis(x, sigma=0.5, j=1)
    k12 = math.exp(-0.49 / 0.5)
    assert basis.eigvals[0] == pytest.approx(1 + k12, rel=1e-14)
    assert basis.mu[0] == basis.eigvals[0] / 2


def test_build_basis_threshold_is_compositional():
    x = np.random.default_rng(3).standard_normal((100, 1))
    basis = build_basis(x, r_bar=0.95)
    vals = eigendecompose(gram_matrix(x, median_bandwidth(x))).eigvals
    assert basis.j_rank == select_rank(vals, 0.95)
    assert basis.sigma == median_bandwidth(x)


def test_build_basis_full_rank_keeps_positive_spectrum():
    x = np.random.default_rng(4).uniform(-3, 3, size=(8, 1))
    basis = build_basis(x, j=8)
    assert np.all(basis.eigvals > 0)
    assert basis.j_rank == np.count_nonzero(basis.spectrum >= 1e-6 * basis.spectrum[0])


def test_build_basis_invalid_rank():
    x = np.random.default_rng(5).standard_normal((10, 1))
    with pytest.raises(InvalidRank):
        build_basis(x, j=0)
    with pytest.raises(InvalidRank):
        build_basis(x, j=11)
    with pytest.raises(ValueError):
        build_basis(x, j=2, r_bar=0.9)


def test_nystrom_interpolates_training_samples():
    x = np.random.default_rng(6).standard_normal((30, 2))
    basis = build_basis(x, j=10)
    np.testing.assert_allclose(nystrom_eval(basis, x), math.sqrt(30) * basis.eigvecs, atol=1e-8)


def test_nystrom_single_sample():
    basis = build_basis(np.array([[0.3]]), sigma=1.0, j=1)
    assert basis.eigvals[0] == 1.0
    assert nystrom_eval(basis, [[0.3]])[0, 0] == 1.0


def test_nystrom_matches_triple_loop():
    rng = np.random.default_rng(7)
    x = rng.standard_normal((25, 2))
    basis = build_basis(x, j=5)
    pts = rng.standard_normal((7, 2)) * 2
    ref = naive_psi(x, basis.sigma, basis.eigvals, basis.eigvecs, pts)
    np.testing.assert_allclose(nystrom_eval(basis, pts), ref, rtol=0, atol=1e-12)


def test_nystrom_grad_matches_finite_differences():
    rng = np.random.default_rng(8)
    x = rng.standard_normal((40, 3))
    basis = build_basis(x, r_bar=0.95)
    for z in rng.standard_normal((10, 3)):
        analytic = nystrom_grad(basis, z[None])[0]
        for j in range(basis.j_rank):
            fd = central_diff(lambda p: nystrom_eval(basis, p[None])[0, j], z)
            np.testing.assert_allclose(analytic[j], fd, rtol=1e-5, atol=1e-7)


def test_nystrom_grad_even_function():
    basis = build_basis(np.array([[-0.8], [0.8]]), sigma=1.0, j=1)
    assert abs(nystrom_grad(basis, [[0.0]])[0, 0, 0]) <= 1e-15


def test_sign_flip_negates_gradients_and_values():
    x = np.random.default_rng(9).standard_normal((20, 2))
    basis = build_basis(x, j=4)
    flipped = basis.with_flipped([2])
    pts = np.random.default_rng(10).standard_normal((5, 2))
    np.testing.assert_array_equal(nystrom_grad(flipped, pts)[:, 2], -nystrom_grad(basis, pts)[:, 2])
    np.testing.assert_array_equal(nystrom_grad(flipped, pts)[:, 1], nystrom_grad(basis, pts)[:, 1])
    np.testing.assert_allclose(
        nystrom_eval(flipped, pts) ** 2, nystrom_eval(basis, pts) ** 2, rtol=0, atol=1e-12
    )


def test_kpca_dual_formulas_agree():
    rng = np.random.default_rng(11)
    x = rng.standard_normal((30, 2))
    basis = build_basis(x, r_bar=0.99)
    pts = rng.standard_normal((20, 2))
    np.testing.assert_allclose(kpca_embed(basis, pts), kpca_embed_dual(basis, pts), rtol=0, atol=1e-10)


def test_kpca_at_training_samples():
    x = np.random.default_rng(12).standard_normal((15, 1))
    basis = build_basis(x, j=4)
    expected = np.sqrt(basis.eigvals) * basis.eigvecs
    np.testing.assert_allclose(kpca_embed(basis, x), expected, atol=1e-10)


def test_kpca_single_point_basis():
    basis = build_basis(np.array([[-1.2, 0.4]]), sigma=0.7, j=1)
    assert kpca_embed(basis, basis.samples)[0, 0] == 1.0
    assert kpca_embed_dual(basis, basis.samples)[0, 0] == 1.0


def test_empirical_orthonormality_improves_with_m():
    def deviation(m, seed):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((m, 1))
        basis = build_basis(x, j=5)
        z = rng.standard_normal((10 * m, 1))
        psi = nystrom_eval(basis, z)
        gram = psi.T @ psi / z.shape[0]
        k = basis.j_rank
        return np.abs(gram - np.eye(k)).max()

    small = np.median([deviation(50, s) for s in range(20)])
    large = np.median([deviation(400, s) for s in range(20)])
    assert large < small
