"""Analytic target distributions with samplers and exact scores.

All samplers use numpy's ``default_rng`` (PCG64) seeded with the given
integer, so a ``(distribution, m, seed)`` triple always yields the same
matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .kernel import as_samples


def _vec(values, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=np.float64))
    if arr.ndim != 1 or not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be a finite vector")
    return arr


@dataclass(frozen=True)
class Gaussian:
    """Diagonal Gaussian ``N(mean, diag(std^2))``."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        mean = _vec(self.mean, "mean")
        std = _vec(self.std, "std")
        if std.shape == (1,) and mean.shape[0] > 1:
            std = np.full_like(mean, std[0])
        if std.shape != mean.shape or np.any(std <= 0):
            raise ValueError("std must be positive and match mean")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def sample(self, m: int, seed: int) -> np.ndarray:
        rng = np.random.default_rng(seed)
        return self.mean + self.std * rng.standard_normal((m, self.dim))

    def log_density(self, points) -> np.ndarray:
        z = (as_samples(points) - self.mean) / self.std
        return -0.5 * np.sum(z * z, axis=1)

    def score(self, points) -> np.ndarray:
        return -(as_samples(points) - self.mean) / self.std**2


@dataclass(frozen=True)
class GaussianMixture2:
    """Two-component mixture with a shared diagonal covariance."""

    weight: float  # weight of the first component
    mean1: np.ndarray
    mean2: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        mean1 = _vec(self.mean1, "mean1")
        mean2 = _vec(self.mean2, "mean2")
        std = _vec(self.std, "std")
        if std.shape == (1,) and mean1.shape[0] > 1:
            std = np.full_like(mean1, std[0])
        if mean1.shape != mean2.shape or std.shape != mean1.shape or np.any(std <= 0):
            raise ValueError("means and std must share a dimension; std > 0")
        if not 0.0 < self.weight < 1.0:
            raise ValueError("mixture weight must lie in (0, 1)")
        object.__setattr__(self, "mean1", mean1)
        object.__setattr__(self, "mean2", mean2)
        object.__setattr__(self, "std", std)

    @property
    def dim(self) -> int:
        return self.mean1.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return np.array([self.weight, 1.0 - self.weight])

    def sample(self, m: int, seed: int) -> np.ndarray:
        rng = np.random.default_rng(seed)
        noise = rng.standard_normal((m, self.dim))
        first = rng.random(m) < self.weight
        centres = np.where(first[:, None], self.mean1, self.mean2)
        return centres + self.std * noise

    def _component_logs(self, x: np.ndarray) -> np.ndarray:
        z1 = (x - self.mean1) / self.std
        z2 = (x - self.mean2) / self.std
        return np.stack(
            [
                np.log(self.weight) - 0.5 * np.sum(z1 * z1, axis=1),
                np.log1p(-self.weight) - 0.5 * np.sum(z2 * z2, axis=1),
            ],
            axis=1,
        )

    def log_density(self, points) -> np.ndarray:
        return logsumexp(self._component_logs(as_samples(points)), axis=1)

    def score(self, points) -> np.ndarray:
        x = as_samples(points)
        logs = self._component_logs(x)
        resp = np.exp(logs - logsumexp(logs, axis=1, keepdims=True))
        s1 = -(x - self.mean1) / self.std**2
        s2 = -(x - self.mean2) / self.std**2
        return resp[:, :1] * s1 + resp[:, 1:] * s2


@dataclass(frozen=True)
class Banana:
    """Twisted Gaussian.

    ``x_1 ~ N(0, std^2)``, ``x_2 = y + curvature * (x_1^2 - std^2)`` with
    ``y ~ N(0, 1)``; any further coordinates are independent standard normal.
    The warp has unit Jacobian, so the density is the base density at the
    unwarped point.
    """

    curvature: float
    std: float
    dim: int = 2

    def __post_init__(self):
        if not np.isfinite(self.curvature):
            raise ValueError("curvature must be finite")
        if not self.std > 0:
            raise ValueError("std must be positive")
        if self.dim < 2:
            raise ValueError("banana needs dim >= 2")

    def _unwarp(self, x: np.ndarray) -> np.ndarray:
        y = x.copy()
        y[:, 1] = x[:, 1] - self.curvature * (x[:, 0] ** 2 - self.std**2)
        return y

    def sample(self, m: int, seed: int) -> np.ndarray:
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((m, self.dim))
        x[:, 0] *= self.std
        x[:, 1] += self.curvature * (x[:, 0] ** 2 - self.std**2)
        return x

    def log_density(self, points) -> np.ndarray:
        y = self._unwarp(as_samples(points))
        y[:, 0] /= self.std
        return -0.5 * np.sum(y * y, axis=1)

    def score(self, points) -> np.ndarray:
        x = as_samples(points)
        y = self._unwarp(x)
        g = -y
        g[:, 0] = -x[:, 0] / self.std**2 + y[:, 1] * 2.0 * self.curvature * x[:, 0]
        return g


def standard_normal(dim: int = 1) -> Gaussian:
    return Gaussian(np.zeros(dim), np.ones(dim))


def from_config(spec: dict):
    """Build a distribution from its JSON form, e.g.

    ``{"kind": "gaussian", "mean": [0], "std": [1]}``,
    ``{"kind": "gmm2", "weight": 0.5, "mean1": [-2], "mean2": [2], "std": [1]}``,
    ``{"kind": "banana", "curvature": 0.5, "std": 1.0, "dim": 2}``.
    """
    spec = dict(spec)
    kind = spec.pop("kind", None)
    try:
        if kind == "gaussian":
            return Gaussian(spec.get("mean", [0.0]), spec.get("std", [1.0]))
        if kind == "gmm2":
            return GaussianMixture2(
                float(spec.get("weight", 0.5)), spec["mean1"], spec["mean2"], spec.get("std", [1.0])
            )
        if kind == "banana":
            return Banana(float(spec["curvature"]), float(spec.get("std", 1.0)), int(spec.get("dim", 2)))
    except KeyError as exc:
        raise ValueError(f"target of kind {kind!r} is missing field {exc.args[0]!r}") from None
    raise ValueError(f"unknown target kind {kind!r}; expected gaussian, gmm2 or banana")


def sample(dist, m: int, seed: int) -> np.ndarray:
    if m < 1:
        raise ValueError("sample count must be at least 1")
    return dist.sample(m, seed)


def true_score(dist, points) -> np.ndarray:
    return dist.score(points)


def log_density_unnormalized(dist, points) -> np.ndarray:
    return dist.log_density(points)
