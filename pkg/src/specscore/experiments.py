"""Experiment drivers shared by the CLI and the acceptance suite.

Everything here is a pure function of its arguments and seeds; the CLI
only adds parsing and file output on top.
"""

from __future__ import annotations

import numpy as np

from . import entropy, oracles, ssge
from .stein import SteinPlus, stein_fit

EVAL_SAMPLES = 1000  # Monte Carlo evaluation set size for d > 1


def grid_points(lo: float, hi: float, n: int) -> np.ndarray:
    return np.linspace(lo, hi, n)[:, None]


def evaluation_set(dist, grid=(-4.0, 4.0, 201), seed: int = 0):
    """Points and quadrature weights for the q-weighted squared error.

    One-dimensional targets use a deterministic grid weighted by the density;
    higher-dimensional targets use fresh draws from the target with equal
    weights.
    """
    if dist.dim == 1:
        pts = grid_points(*grid)
        logq = dist.log_density(pts)
        return pts, np.exp(logq - logq.max())
    pts = dist.sample(EVAL_SAMPLES, int(np.random.SeedSequence([seed, 1]).generate_state(1)[0]))
    return pts, np.ones(pts.shape[0])


def ssge_error(dist, m: int, seed: int, j=None, r_bar=None, sigma=None, grid=(-4.0, 4.0, 201)):
    """Fit SSGE on ``m`` draws and return ``(estimator, weighted_mse)``."""
    x = dist.sample(m, seed)
    est = ssge.fit(x, sigma=sigma, j=j, r_bar=r_bar)
    pts, w = evaluation_set(dist, grid, seed)
    return est, ssge.weighted_mse(est(pts), dist.score(pts), w)


def sweep(dist, ms, seeds, js=None, r_bars=None, sigma=None, grid=(-4.0, 4.0, 201)):
    """Long-format rows over ``M x rank x seed`` in configuration order."""
    if not ms or not seeds:
        raise ValueError("sweep lists must be nonempty")
    if (js is None) == (r_bars is None):
        raise ValueError("give exactly one of js and r_bars")
    ranks = [("j", v) for v in js] if js is not None else [("r_bar", v) for v in r_bars]
    rows = []
    for m in ms:
        for kind, value in ranks:
            for seed in seeds:
                kw = {kind: value}
                est, err = ssge_error(dist, m, seed, sigma=sigma, grid=grid, **kw)
                basis = est.basis
                rows.append(
                    {
                        "M": int(m),
                        "rank": value,
                        "J": basis.j_rank,
                        "seed": int(seed),
                        "weighted_mse": err,
                        "mu_J": float(basis.mu[-1]),
                        "delta_J": basis.eigengap(),
                    }
                )
    return rows


def fit_eval(dist, samples, estimators, j=None, r_bar=None, eta=None, sigma=None, points=None, weights=None):
    """Fit the requested estimators on ``samples`` and evaluate at ``points``.

    Returns a dict with the evaluation columns and summary statistics. When
    ``dist`` is ``None`` (samples from a file) no true score is available and
    the error fields are ``None``.
    """
    result = {"columns": {}, "summary": {}}
    truth = dist.score(points) if dist is not None else None
    if truth is not None:
        result["columns"]["true_score"] = truth
    mse = {}
    if "ssge" in estimators:
        est = ssge.fit(samples, sigma=sigma, j=j, r_bar=r_bar)
        vals = est(points)
        result["columns"]["ssge"] = vals
        basis = est.basis
        result["summary"].update(
            J_selected=basis.j_rank,
            sigma_used=basis.sigma,
            eigenvalue_spectrum=basis.spectrum.tolist(),
            mu_J=float(basis.mu[-1]),
            delta_J=basis.eigengap(),
        )
        if truth is not None:
            mse["ssge"] = ssge.weighted_mse(vals, truth, weights)
    if "stein_plus" in estimators:
        sp = SteinPlus(samples, eta, sigma=sigma)
        vals = sp(points)
        result["columns"]["stein_plus"] = vals
        result["summary"].setdefault("sigma_used", sp.sigma)
        if truth is not None:
            mse["stein_plus"] = ssge.weighted_mse(vals, truth, weights)
    if "stein" in estimators:
        fit = stein_fit(samples, eta, sigma=sigma)
        # in-sample estimates shown at the nearest training sample
        nearest = np.argmin(
            np.sum((points[:, None, :] - fit.samples[None, :, :]) ** 2, axis=-1), axis=1
        )
        result["columns"]["stein_at_samples"] = fit.g_hat[nearest]
        result["stein_samples"] = fit
        result["summary"].setdefault("sigma_used", fit.sigma)
        if dist is not None:
            result["summary"]["stein_in_sample_mse"] = float(
                np.mean(np.sum((fit.g_hat - dist.score(fit.samples)) ** 2, axis=1))
            )
    result["summary"]["weighted_mse"] = mse if truth is not None else None
    return result


def entropy_demo(phi, n_noise: int, seeds, j=None, r_bar=None, sigma=None):
    """Seed-averaged SSGE entropy gradient for the location-scale family."""
    phi = np.asarray(phi, dtype=np.float64)
    if phi.shape[0] % 2:
        raise ValueError("phi must hold d locations followed by d scales")
    if np.any(phi[phi.shape[0] // 2 :] <= 0):
        raise ValueError("scales must be positive")
    fam = entropy.location_scale(phi.shape[0] // 2)
    est = np.array(
        [entropy.entropy_grad(fam, phi, n_noise, s, sigma=sigma, j=j, r_bar=r_bar) for s in seeds]
    )
    mean = est.mean(axis=0)
    stderr = est.std(axis=0, ddof=1) / np.sqrt(len(seeds)) if len(seeds) > 1 else np.zeros_like(mean)
    analytic = entropy.analytic_location_scale_grad(phi)
    return {
        "phi": phi.tolist(),
        "estimate": mean.tolist(),
        "stderr": stderr.tolist(),
        "analytic": analytic.tolist(),
        "abs_error": np.abs(mean - analytic).tolist(),
        "n_noise": int(n_noise),
        "n_seeds": len(seeds),
    }


def default_target():
    return oracles.standard_normal(1)
