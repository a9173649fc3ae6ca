"""Finite location mixture pooling for normalized state innovations.

The pooled law of motion treats each period's normalized state vector as
an exchangeable draw from a sparse finite mixture: a symmetric Dirichlet
over cluster weights whose concentration is itself learned, Gaussian
cluster means with coefficient-specific shrinkage scales, and unit
innovation variance in the normalized parameterization.  Emptying
clusters is how the model learns the effective number of regimes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import gammaln

from .distributions import GigParams, sample_categorical_rows, sample_dirichlet, sample_gig
from .shrinkage import MhScale

RANGE_FLOOR = 1e-8
WEIGHT_FLOOR = 1e-300


@dataclass(frozen=True)
class PoolPriors:
    """Hyperparameters of the pooling layer.

    d0 sets the Gamma(d0, d0 * n_clusters) prior on the Dirichlet
    concentration; e0, e1 parameterize the shrinkage on cluster-mean
    scales.
    """

    n_clusters: int = 10
    d0: float = 10.0
    e0: float = 0.6
    e1: float = 0.6

    def __post_init__(self):
        if self.n_clusters < 1:
            raise ValueError("need at least one cluster")
        if min(self.d0, self.e0, self.e1) <= 0.0:
            raise ValueError("pool hyperparameters must be positive")


@dataclass(frozen=True)
class PoolState:
    """Current values of the pooling block."""

    omega: np.ndarray
    xi: float
    theta: np.ndarray
    mu: np.ndarray
    l: np.ndarray

    def __post_init__(self):
        N, K = self.mu.shape
        if self.omega.shape != (N,):
            raise ValueError("weights and means disagree on cluster count")
        if self.l.shape != (K,):
            raise ValueError("scale vector must have one entry per coefficient")
        if self.xi <= 0.0:
            raise ValueError("concentration must be positive")
        if self.theta.min() < 0 or self.theta.max() >= N:
            raise ValueError("cluster labels out of range")

    @property
    def n_clusters(self) -> int:
        return self.omega.shape[0]

    def occupancy(self) -> np.ndarray:
        return np.bincount(self.theta, minlength=self.n_clusters).astype(float)

    def prior_mean_stack(self) -> np.ndarray:
        """Per-period prior means for the normalized states, shape (T, K)."""
        return self.mu[self.theta]


def initial_pool_state(T: int, K: int, priors: PoolPriors, rng: np.random.Generator) -> PoolState:
    N = priors.n_clusters
    xi = float(rng.gamma(shape=priors.d0, scale=1.0 / (priors.d0 * N)))
    omega = sample_dirichlet(np.full(N, xi), rng)
    theta = rng.integers(0, N, size=T)
    lam0 = np.ones(K)
    mu = rng.normal(size=(N, K)) * np.sqrt(lam0)
    return PoolState(omega=omega, xi=xi, theta=theta, mu=mu, l=np.ones(K))


def coefficient_ranges(alpha_tilde: np.ndarray) -> np.ndarray:
    """Per-coefficient spread of normalized states, floored away from zero."""
    r = alpha_tilde.max(axis=0) - alpha_tilde.min(axis=0)
    return np.maximum(r, RANGE_FLOOR)


def weight_posterior_params(theta: np.ndarray, n_clusters: int, xi: float) -> np.ndarray:
    return xi + np.bincount(theta, minlength=n_clusters).astype(float)


def sample_weights(theta, n_clusters, xi, rng) -> np.ndarray:
    return sample_dirichlet(weight_posterior_params(theta, n_clusters, xi), rng)


def _xi_log_target(xi: float, omega: np.ndarray, priors: PoolPriors) -> float:
    """Log posterior kernel of the symmetric Dirichlet concentration."""
    N = omega.shape[0]
    log_omega = np.log(np.maximum(omega, WEIGHT_FLOOR))
    loglik = gammaln(N * xi) - N * gammaln(xi) + (xi - 1.0) * log_omega.sum()
    logprior = (priors.d0 - 1.0) * np.log(xi) - priors.d0 * N * xi
    return float(loglik + logprior)


def update_xi(xi, omega, priors: PoolPriors, rng, scale: float = 0.3) -> tuple[float, bool]:
    """Random-walk step on log xi; returns the new value and acceptance."""
    prop = xi * np.exp(scale * rng.normal())
    log_ratio = _xi_log_target(prop, omega, priors) - _xi_log_target(xi, omega, priors)
    log_ratio += np.log(prop / xi)
    if np.log(rng.random()) < log_ratio:
        return float(prop), True
    return float(xi), False


def sample_group_indicators(alpha_tilde, omega, mu, rng) -> np.ndarray:
    """Cluster labels per period under unit innovation variance."""
    diff = alpha_tilde[:, None, :] - mu[None, :, :]
    logw = np.log(np.maximum(omega, WEIGHT_FLOOR))[None, :] - 0.5 * (diff**2).sum(axis=2)
    return sample_categorical_rows(logw, rng)


def group_mean_moments(alpha_tilde, theta, n_clusters, lam0):
    """Posterior mean and variance of each cluster mean, shapes (N, K)."""
    T, K = alpha_tilde.shape
    counts = np.bincount(theta, minlength=n_clusters).astype(float)
    sums = np.zeros((n_clusters, K))
    np.add.at(sums, theta, alpha_tilde)
    prec = counts[:, None] + 1.0 / lam0[None, :]
    return sums / prec, 1.0 / prec


def sample_group_means(alpha_tilde, theta, n_clusters, lam0, rng) -> np.ndarray:
    mean, var = group_mean_moments(alpha_tilde, theta, n_clusters, lam0)
    return mean + np.sqrt(var) * rng.standard_normal(mean.shape)


def l_posterior_params(mu: np.ndarray, ranges: np.ndarray, priors: PoolPriors) -> list[GigParams]:
    """Per-coefficient generalized inverse Gaussian parameters."""
    N = mu.shape[0]
    a = priors.e0 - 0.5 * N
    return [
        GigParams(a=a, b=2.0 * priors.e1, c=float((mu[:, j] ** 2).sum() / ranges[j]))
        for j in range(mu.shape[1])
    ]


def sample_l(mu, ranges, priors: PoolPriors, rng) -> np.ndarray:
    return np.array([sample_gig(p, rng) for p in l_posterior_params(mu, ranges, priors)])


def pool_sweep(
    alpha_tilde: np.ndarray,
    state: PoolState,
    priors: PoolPriors,
    rng: np.random.Generator,
    xi_scale: MhScale | None = None,
    adapting: bool = False,
) -> PoolState:
    """One full refresh of the pooling block, in fixed order."""
    N = state.n_clusters
    omega = sample_weights(state.theta, N, state.xi, rng)
    scale = xi_scale.scale if xi_scale is not None else 0.3
    xi, accepted = update_xi(state.xi, omega, priors, rng, scale)
    if xi_scale is not None:
        xi_scale.record(accepted, adapting)
    theta = sample_group_indicators(alpha_tilde, omega, state.mu, rng)
    ranges = coefficient_ranges(alpha_tilde)
    lam0 = state.l * ranges**2
    mu = sample_group_means(alpha_tilde, theta, N, lam0, rng)
    l = sample_l(mu, ranges, priors, rng)
    return replace(state, omega=omega, xi=xi, theta=theta, mu=mu, l=l)
