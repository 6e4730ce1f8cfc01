import numpy as np
import pytest

from specscore import stein
from specscore.kernel import gram_matrix, median_bandwidth
from specscore.oracles import standard_normal

from reference import dense_stein


def test_symmetric_pair():
    fit = stein.stein_fit(np.array([[-0.5], [0.5]]), eta=0.1)
    assert fit.g_hat[0, 0] == pytest.approx(-fit.g_hat[1, 0], abs=1e-15)
    assert fit.g_hat[0, 0] > 0


def test_reference_setting_beats_zero_predictor_in_dense_region():
    # in-sample error relative to predicting 0, median over seeds
    ratios = []
    for seed in range(20):
        x = standard_normal().sample(100, seed)
        g = stein.stein_fit(x, eta=0.1).g_hat[:, 0]
        dense = np.abs(x[:, 0]) < 1.5
        ratios.append(np.mean((g[dense] + x[dense, 0]) ** 2) / np.mean(x[dense, 0] ** 2))
    assert np.median(ratios) < 0.5


@pytest.mark.parametrize("seed", range(10))
def test_matches_dense_inverse(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((5, 2))
    eta = float(rng.uniform(0.01, 1.0))
    sigma = median_bandwidth(x)
    np.testing.assert_allclose(stein.stein_fit(x, eta).g_hat, dense_stein(x, sigma, eta), rtol=0, atol=1e-10)


def test_solve_residual():
    x = np.random.default_rng(11).standard_normal((60, 2))
    fit = stein.stein_fit(x, eta=0.05)
    system = gram_matrix(x, fit.sigma) + 0.05 * np.eye(60)
    b = stein.stein_grad_matrix(x, fit.sigma)
    assert np.abs(system @ (-fit.g_hat / 60) - b).max() <= 1e-8


def test_ridge_shrinkage_is_monotone():
    x = np.random.default_rng(12).standard_normal((50, 1))
    norms = [np.linalg.norm(stein.stein_fit(x, eta).g_hat) for eta in (0.1, 10, 1e3, 1e6)]
    assert all(a > b for a, b in zip(norms, norms[1:]))
    assert np.abs(stein.stein_fit(x, 1e6).g_hat).max() < 1e-4


def test_permutation_equivariance():
    rng = np.random.default_rng(13)
    x = rng.standard_normal((25, 2))
    perm = rng.permutation(25)
    np.testing.assert_allclose(stein.stein_fit(x[perm], 0.1).g_hat, stein.stein_fit(x, 0.1).g_hat[perm], atol=1e-12)


def test_invalid_eta():
    with pytest.raises(ValueError):
        stein.stein_fit(np.random.default_rng(0).standard_normal((5, 1)), eta=0.0)


@pytest.mark.parametrize("seed", range(5))
def test_stein_plus_equals_augmented_refit(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((20, 2))
    pts = rng.standard_normal((3, 2)) * 1.5
    sigma = median_bandwidth(x)
    got = stein.stein_plus(x, 0.1, pts)
    for n in range(3):
        ref = stein.stein_fit(np.vstack([x, pts[n]]), 0.1, sigma=sigma).g_hat[-1]
        np.testing.assert_allclose(got[n], ref, rtol=0, atol=1e-10)


def test_stein_plus_keeps_original_bandwidth():
    x = np.random.default_rng(20).standard_normal((15, 1))
    sp = stein.SteinPlus(x, 0.1)
    assert sp.sigma == median_bandwidth(x)


def test_stein_plus_at_existing_sample_is_finite():
    x = np.random.default_rng(21).standard_normal((20, 1))
    out = stein.stein_plus(x, 0.001, x[3:4])
    assert np.all(np.isfinite(out))
    ref = stein.stein_fit(np.vstack([x, x[3:4]]), 0.001, sigma=median_bandwidth(x)).g_hat[-1]
    np.testing.assert_allclose(out[0], ref, rtol=1e-7)


def test_stein_plus_batch_equals_single_calls():
    rng = np.random.default_rng(22)
    x = rng.standard_normal((30, 2))
    pts = rng.standard_normal((3, 2))
    sp = stein.SteinPlus(x, 0.1)
    batch = sp(pts)
    for n in range(3):
        np.testing.assert_allclose(batch[n], sp(pts[n : n + 1])[0], rtol=0, atol=1e-14)
