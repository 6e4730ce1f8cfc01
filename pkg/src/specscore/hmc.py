"""Hamiltonian Monte Carlo driven by a pluggable score function.

The leapfrog dynamics use whatever score they are given (exact or
estimated) while the Metropolis-Hastings correction uses the target's
unnormalised log density. Step size and leapfrog count are redrawn every
iteration and never adapted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import oracles, ssge
from .errors import NonFiniteEnergy
from .stein import SteinPlus


@dataclass(frozen=True)
class HmcConfig:
    step_size_range: tuple[float, float] = (0.01, 0.1)
    n_leapfrog_range: tuple[int, int] = (1, 10)
    n_iterations: int = 5000
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.step_size_range
        if not 0 < lo <= hi:
            raise ValueError(f"invalid step size range {self.step_size_range}")
        lo, hi = self.n_leapfrog_range
        if not 0 < lo <= hi:
            raise ValueError(f"invalid leapfrog range {self.n_leapfrog_range}")
        if self.n_iterations < 1:
            raise ValueError("n_iterations must be positive")


@dataclass
class HmcTrace:
    states: np.ndarray  # (n_iterations, d), initial state excluded
    accepted: np.ndarray  # (n_iterations,) bool
    n_nonfinite: int = 0

    @property
    def acceptance_ratio(self) -> float:
        return float(np.mean(self.accepted))


def leapfrog(position, momentum, score_fn, step: float, n_steps: int):
    """Leapfrog integration for ``H = -log q(x) + |p|^2 / 2``.

    ``score_fn`` maps a ``(d,)`` position to ``grad log q`` there.
    """
    if n_steps < 1 or not step > 0:
        raise ValueError("leapfrog needs n_steps >= 1 and step > 0")
    x = np.array(position, dtype=np.float64)
    p = np.array(momentum, dtype=np.float64)
    p = p + 0.5 * step * score_fn(x)
    for i in range(n_steps):
        x = x + step * p
        if i < n_steps - 1:
            p = p + step * score_fn(x)
    p = p + 0.5 * step * score_fn(x)
    return x, p


def hmc_chain(init, score_fn, logp_fn, config: HmcConfig) -> HmcTrace:
    """Run ``config.n_iterations`` HMC transitions from ``init``.

    A proposal whose energy is not finite is rejected and counted in
    ``n_nonfinite``.

    Raises:
        NonFiniteEnergy: if ``logp_fn(init)`` is not finite.
    """
    x = np.array(init, dtype=np.float64).ravel()
    logp = float(logp_fn(x))
    if not np.isfinite(logp):
        raise NonFiniteEnergy("log density is not finite at the initial state")
    rng = np.random.default_rng(config.seed)
    d = x.shape[0]
    n = config.n_iterations
    states = np.empty((n, d))
    accepted = np.zeros(n, dtype=bool)
    n_bad = 0
    s_lo, s_hi = config.step_size_range
    l_lo, l_hi = config.n_leapfrog_range
    for t in range(n):
        step = rng.uniform(s_lo, s_hi)
        n_steps = int(rng.integers(l_lo, l_hi, endpoint=True))
        p0 = rng.standard_normal(d)
        log_u = np.log(rng.random())
        with np.errstate(all="ignore"):
            x1, p1 = leapfrog(x, p0, score_fn, step, n_steps)
            logp1 = float(logp_fn(x1)) if np.all(np.isfinite(x1)) else np.nan
            h0 = -logp + 0.5 * p0 @ p0
            h1 = -logp1 + 0.5 * p1 @ p1
        if not np.isfinite(h1):
            n_bad += 1
        elif log_u < h0 - h1:
            x, logp = x1, logp1
            accepted[t] = True
        states[t] = x
    return HmcTrace(states=states, accepted=accepted, n_nonfinite=n_bad)


def _point_fn(batch_fn):
    return lambda x: batch_fn(x[None, :])[0]


def zero_score(x):
    return np.zeros_like(x)


@dataclass
class ComparisonRow:
    estimator: str
    ratios: list[float] = field(default_factory=list)
    traces: list[HmcTrace] = field(default_factory=list)

    @property
    def mean(self) -> float:
        return float(np.mean(self.ratios))

    @property
    def std(self) -> float:
        return float(np.std(self.ratios, ddof=1)) if len(self.ratios) > 1 else 0.0

    @property
    def stderr(self) -> float:
        return self.std / np.sqrt(len(self.ratios))


ESTIMATORS = ("true", "ssge", "stein_plus", "zero")


def acceptance_comparison(
    dist,
    fit_samples: int = 200,
    r_bar: float = 0.95,
    eta: float = 0.001,
    config: HmcConfig | None = None,
    n_repeats: int = 10,
    estimators=ESTIMATORS,
    keep_traces: bool = False,
) -> list[ComparisonRow]:
    """Acceptance ratios of HMC under exact and estimated scores.

    Every repeat draws a fresh set of ``fit_samples`` target samples, fits the
    estimators once on it, picks one of those samples as the starting point,
    and runs one chain per estimator with a shared chain seed.
    """
    config = config or HmcConfig()
    unknown = [e for e in estimators if e not in ESTIMATORS]
    if unknown:
        raise ValueError(f"unknown estimators {unknown}; valid names: {', '.join(ESTIMATORS)}")
    rows = {name: ComparisonRow(name) for name in estimators}
    logp = _point_fn(dist.log_density)
    for rep in range(n_repeats):
        rep_seed = np.random.SeedSequence([config.seed, rep])
        data_seed, init_seed, chain_seed = (int(s.generate_state(1)[0]) for s in rep_seed.spawn(3))
        x = dist.sample(fit_samples, data_seed)
        init = x[np.random.default_rng(init_seed).integers(fit_samples)]
        chain_config = HmcConfig(
            config.step_size_range, config.n_leapfrog_range, config.n_iterations, chain_seed
        )
        for name in estimators:
            if name == "true":
                score_fn = _point_fn(dist.score)
            elif name == "ssge":
                score_fn = _point_fn(ssge.fit(x, r_bar=r_bar))
            elif name == "stein_plus":
                score_fn = _point_fn(SteinPlus(x, eta))
            else:
                score_fn = zero_score
            trace = hmc_chain(init, score_fn, logp, chain_config)
            rows[name].ratios.append(trace.acceptance_ratio)
            if keep_traces:
                rows[name].traces.append(trace)
    return [rows[name] for name in estimators]


def default_banana():
    return oracles.Banana(curvature=0.5, std=1.0)
